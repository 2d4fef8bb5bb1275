import pytest

from emofeat.pipeline.commands import cmd_extract, cmd_synth


@pytest.fixture(scope="session")
def eeg_run(tmp_path_factory):
    """The reference synthetic EEG set (5 subjects x 400 trials, seed 7) and its features."""
    root = tmp_path_factory.mktemp("eeg")
    cmd_synth(root / "data", "eeg", 5, 400, 7)
    summary = cmd_extract(root / "data" / "manifest.json", "eeg", root / "eeg.eavf")
    return root, summary
