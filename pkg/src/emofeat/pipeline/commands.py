"""Command implementations behind the CLI: synth, extract, train-eval, attnlab.

Each returns a plain dict so the CLI only has to print or write it.
"""

from __future__ import annotations

import datetime as _dt
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..audio import extract_audio_features
from ..eeg import extract_eeg_features
from ..vision import FrameSequence, embed_frames_default, extract_vision_features
from ..train.metrics import evaluate_metrics
from ..train.trainer import TrainConfig, predict, train_classifier
from .featurefile import read_feature_file, write_feature_file
from .manifest import Manifest, ValidationError, load_manifest
from .split import SplitSpec, split_trials
from .synth import EegSynthParams, synth_dataset, synth_params_dict

REPORT_LAYOUT = "emofeat.run-report"
REPORT_VERSION = 1
GENERATOR_FILE = "synth.json"
STANDARDIZATION = "per-feature z-score fitted on each subject's training portion"


def _map(fn, items, workers: int):
    # executor.map keeps input order, so row i always belongs to item i
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_synth(out_dir, modality: str, subjects: int, trials: int, seed: int,
              params: EegSynthParams = EegSynthParams()) -> dict:
    manifest = synth_dataset(out_dir, modality, subjects, trials, seed, params)
    generator = {"modality": modality, "subjects": subjects, "trials": trials, "seed": seed}
    if modality == "eeg":
        generator["eeg"] = synth_params_dict(params)
    Path(out_dir, GENERATOR_FILE).write_text(json.dumps(generator, indent=1, sort_keys=True) + "\n",
                                             encoding="utf-8")
    return {"manifest": str(Path(out_dir) / "manifest.json"),
            "trials": sum(len(s.trials) for s in manifest.subjects)}


def _features_for(manifest: Manifest, modality: str, entry) -> np.ndarray:
    arr = manifest.load_array(entry)
    if modality == "eeg":
        return extract_eeg_features(arr)
    if modality == "audio":
        return extract_audio_features(arr)
    if arr.ndim == 4:
        return extract_vision_features(embed_frames_default(arr, label=entry.label))
    return extract_vision_features(FrameSequence(arr, entry.label))


def cmd_extract(manifest_path, modality: str, out, workers: int = 1, tag_index: bool = False) -> dict:
    """Extract one feature row per manifest trial of ``modality``, in manifest order.

    ``tag_index`` is a debug aid: it overwrites column 0 with the trial's
    position so row alignment can be checked after a round trip.
    """
    manifest = load_manifest(manifest_path)
    entries = [e for _, _, e in manifest.entries(modality)]
    if not entries:
        raise ValidationError(f"manifest has no {modality} trials")
    rows = _map(lambda e: _features_for(manifest, modality, e), entries, workers)
    dims = {r.size for r in rows}
    if len(dims) != 1:
        raise ValidationError(f"{modality} trials produce mixed feature sizes {sorted(dims)}")
    feats = np.stack(rows)
    if tag_index:
        feats[:, 0] = np.arange(len(feats))
    labels = np.array([e.label for e in entries])
    nbytes = write_feature_file(out, feats, labels)
    return {"count": int(feats.shape[0]), "dim": int(feats.shape[1]), "bytes": nbytes, "out": str(out)}


def load_config(path) -> TrainConfig:
    if path is None:
        return TrainConfig()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    try:
        return TrainConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _pick_modality(manifest: Manifest, modality: str | None) -> str:
    if modality is not None:
        return modality
    present = sorted({e.modality for _, _, e in manifest.entries()})
    if len(present) != 1:
        raise ValidationError(f"manifest mixes modalities {present}; pass one explicitly")
    return present[0]


def _eval_subject(x, y, spec: SplitSpec, stream: int, cfg: TrainConfig, sid: str) -> dict:
    present = np.unique(y)
    tr, te = split_trials(y, spec, stream)
    if len(tr) < 10 or len(te) == 0:
        raise ValidationError(f"subject {sid!r}: {len(y)} trials are too few for a train/test split")
    if len(np.unique(y[tr])) < len(present):
        raise ValidationError(f"subject {sid!r}: a class has no training trial")
    res = train_classifier(x[tr], y[tr], cfg)
    m = evaluate_metrics(predict(res.model, x[te], res.standardizer), y[te])
    return {"id": sid, "n_train": int(len(tr)), "n_test": int(len(te)),
            "accuracy": m.accuracy, "weighted_f1": m.weighted_f1}


def cmd_train_eval(features_path, manifest_path, train_frac: float = 0.7, seed: int = 0,
                   config_path=None, report_out=None, modality: str | None = None, workers: int = 1,
                   timestamp: str | None = None) -> dict:
    """Per-subject split, standardize, train the feature MLP and score the test part."""
    if not 0 < train_frac < 1:
        raise ValidationError(f"train fraction must lie in (0, 1), got {train_frac}")
    manifest = load_manifest(manifest_path)
    x, labels = read_feature_file(features_path)
    modality = _pick_modality(manifest, modality)
    entries = list(manifest.entries(modality))
    if len(entries) != len(x):
        raise ValidationError(f"feature file has {len(x)} rows, manifest has {len(entries)} {modality} trials")
    if not np.array_equal(labels, [e.label for _, _, e in entries]):
        raise ValidationError("feature labels do not follow manifest order")
    cfg = load_config(config_path)
    cfg.seed = seed
    spec = SplitSpec(train_frac, seed)

    groups = {}
    for row, (sid, _, _) in enumerate(entries):
        groups.setdefault(sid, []).append(row)
    jobs = [(k, sid, np.array(rows)) for k, (sid, rows) in enumerate(groups.items())]
    subjects = _map(lambda j: _eval_subject(x[j[2]], labels[j[2]], spec, j[0], cfg, j[1]), jobs, workers)

    acc = np.array([s["accuracy"] for s in subjects])
    f1 = np.array([s["weighted_f1"] for s in subjects])
    gen_path = Path(manifest_path).parent / GENERATOR_FILE
    report = {
        "layout": REPORT_LAYOUT,
        "version": REPORT_VERSION,
        "package_version": __version__,
        "modality": modality,
        "seed": seed,
        "train_frac": train_frac,
        "config": cfg.as_dict(),
        "standardization": STANDARDIZATION,
        "generator": json.loads(gen_path.read_text(encoding="utf-8")) if gen_path.exists() else None,
        "subjects": subjects,
        "mean_accuracy": float(acc.mean()),
        "std_accuracy": float(acc.std()),
        "mean_weighted_f1": float(f1.mean()),
        "std_weighted_f1": float(f1.std()),
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if report_out is not None:
        Path(report_out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return report


def cmd_attnlab(subcommand: str, seed: int = 1, frames: int = 25, patches: int = 196) -> dict:
    if subcommand == "gradcheck":
        from ..attention.gradcheck import run_suite

        errors = run_suite(seed)
        worst = max(errors.values())
        return {"seed": seed, "max_error": worst, "passed": bool(worst < 1e-4), "ops": dict(errors)}
    if subcommand == "cost":
        from ..attention.cost import attention_cost

        return attention_cost(frames, patches).as_dict()
    raise ValueError(f"unknown attnlab subcommand {subcommand!r}")
