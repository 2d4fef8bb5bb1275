"""Dataset manifest: JSON index of per-subject trials stored as raw
little-endian arrays next to the manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODALITIES = ("eeg", "audio", "vision")
DTYPES = {"f32le": "<f4", "u8": "u1"}


class ValidationError(ValueError):
    """Malformed input data: bad manifest, shape or label, misaligned files."""


@dataclass
class TrialEntry:
    modality: str
    label: int
    path: str
    shape: list
    dtype: str = "f32le"

    def as_dict(self) -> dict:
        return {"modality": self.modality, "label": self.label, "path": self.path,
                "shape": list(self.shape), "dtype": self.dtype}


@dataclass
class Subject:
    id: str
    trials: list = field(default_factory=list)


@dataclass
class Manifest:
    subjects: list
    root: Path = Path(".")

    def entries(self, modality: str | None = None):
        """``(subject_id, index_in_subject, entry)`` in manifest order."""
        for s in self.subjects:
            for i, t in enumerate(s.trials):
                if modality is None or t.modality == modality:
                    yield s.id, i, t

    def as_dict(self) -> dict:
        return {"subjects": [{"id": s.id, "trials": [t.as_dict() for t in s.trials]} for s in self.subjects]}

    def load_array(self, entry: TrialEntry) -> np.ndarray:
        path = self.root / entry.path
        arr = np.fromfile(path, dtype=DTYPES[entry.dtype])
        expected = int(np.prod(entry.shape))
        if arr.size != expected:
            raise ValidationError(f"{entry.path}: holds {arr.size} values, shape {entry.shape} needs {expected}")
        return arr.reshape(entry.shape).astype(np.float64)


def check_shape(modality: str, shape) -> str | None:
    """Return a description of the violation, or None when the shape fits."""
    shape = list(shape)
    if modality == "eeg" and shape != [30, 500]:
        return f"eeg shape must be [30, 500], got {shape}"
    if modality == "audio" and shape != [80000]:
        return f"audio shape must be [80000], got {shape}"
    if modality == "vision":
        raw = len(shape) == 4 and shape[0] == 25 and shape[3] == 3 and shape[1] >= 16 and shape[2] >= 16
        emb = len(shape) == 2 and shape[0] == 25 and shape[1] >= 1
        if not (raw or emb):
            return f"vision shape must be [25, H, W, 3] or [25, D], got {shape}"
    return None


def parse_manifest(doc, root=".") -> Manifest:
    if not isinstance(doc, dict) or not isinstance(doc.get("subjects"), list):
        raise ValidationError("manifest must be an object with a 'subjects' list")
    subjects = []
    for si, sd in enumerate(doc["subjects"]):
        if not isinstance(sd, dict) or "id" not in sd or not isinstance(sd.get("trials"), list):
            raise ValidationError(f"subject #{si}: needs 'id' and a 'trials' list")
        sid = str(sd["id"])
        trials = []
        for ti, td in enumerate(sd["trials"]):
            where = f"subject {sid!r} trial {ti}"
            if not isinstance(td, dict):
                raise ValidationError(f"{where}: not an object")
            missing = {"modality", "label", "path", "shape"} - set(td)
            if missing:
                raise ValidationError(f"{where}: missing {sorted(missing)}")
            if td["modality"] not in MODALITIES:
                raise ValidationError(f"{where}: unknown modality {td['modality']!r}")
            label = td["label"]
            if not isinstance(label, int) or isinstance(label, bool) or not 0 <= label <= 4:
                raise ValidationError(f"{where}: label {label!r} outside 0..4")
            dtype = td.get("dtype", "f32le")
            if dtype not in DTYPES:
                raise ValidationError(f"{where}: unsupported dtype {dtype!r}")
            if not isinstance(td["shape"], list) or not all(isinstance(d, int) and d > 0 for d in td["shape"]):
                raise ValidationError(f"{where}: shape must be a list of positive ints")
            problem = check_shape(td["modality"], td["shape"])
            if problem:
                raise ValidationError(f"{where}: {problem}")
            trials.append(TrialEntry(td["modality"], label, str(td["path"]), list(td["shape"]), dtype))
        subjects.append(Subject(sid, trials))
    return Manifest(subjects, Path(root))


def load_manifest(path) -> Manifest:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    return parse_manifest(doc, path.parent)


def write_manifest(manifest: Manifest, path) -> None:
    Path(path).write_text(json.dumps(manifest.as_dict(), indent=1) + "\n", encoding="utf-8")
