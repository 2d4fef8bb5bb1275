from .commands import cmd_attnlab, cmd_extract, cmd_synth, cmd_train_eval, load_config
from .featurefile import read_feature_file, write_feature_file
from .manifest import Manifest, Subject, TrialEntry, ValidationError, load_manifest, parse_manifest, write_manifest
from .split import SplitSpec, split_trials, stratified_counts
from .synth import EegSynthParams, synth_dataset, synth_eeg_arrays

__all__ = [
    "EegSynthParams", "Manifest", "SplitSpec", "Subject", "TrialEntry", "ValidationError",
    "cmd_attnlab", "cmd_extract", "cmd_synth", "cmd_train_eval", "load_config", "load_manifest",
    "parse_manifest", "read_feature_file", "split_trials", "stratified_counts", "synth_dataset",
    "synth_eeg_arrays", "write_feature_file", "write_manifest",
]
