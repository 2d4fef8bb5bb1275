"""Small-sample comparison: band-power feature MLP against a tri-stream
attention model trained end to end on raw trials, under one shared
training budget."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..attention.models import TriStreamConfig, TriStreamModel
from ..eeg import extract_eeg_features
from ..train.metrics import evaluate_metrics
from ..train.trainer import TrainConfig, fit, predict, train_classifier
from .split import SplitSpec, split_trials
from .synth import EegSynthParams, synth_eeg_arrays


def _budget() -> TrainConfig:
    return TrainConfig(lr=3e-3, weight_decay=0.0, epochs=20, batch_size=8)


def _toy_tri_stream() -> TriStreamConfig:
    return TriStreamConfig(feat_dim=16, heads=4, kernel=11, stride=10, pool=5, hidden=64)


@dataclass
class StudyConfig:
    subjects: int = 5
    trials: int = 400
    data_seed: int = 7
    seeds: tuple = (0, 1, 2, 3, 4)
    train_frac: float = 0.7
    synth: EegSynthParams = field(default_factory=EegSynthParams)
    budget: TrainConfig = field(default_factory=_budget)
    tri: TriStreamConfig = field(default_factory=_toy_tri_stream)


@dataclass
class StudyResult:
    mlp_test: np.ndarray  # [seeds, subjects]
    mlp_train: np.ndarray
    tri_test: np.ndarray
    tri_train: np.ndarray

    def summary(self) -> dict:
        return {
            "mlp_test": float(self.mlp_test.mean()),
            "mlp_train": float(self.mlp_train.mean()),
            "tri_test": float(self.tri_test.mean()),
            "tri_train": float(self.tri_train.mean()),
            "tri_gap": float(self.tri_train.mean() - self.tri_test.mean()),
            "mlp_minus_tri": float(self.mlp_test.mean() - self.tri_test.mean()),
        }


def _raw_forward(model, xb, train, rng):
    return model(xb)


def _accuracy(pred, truth) -> float:
    return evaluate_metrics(pred, truth).accuracy


def run_subject(x, y, seed: int, stream: int, cfg: StudyConfig, feats=None):
    """Train both models on one subject; return ``(mlp_tr, mlp_te, tri_tr, tri_te)``."""
    tr, te = split_trials(y, SplitSpec(cfg.train_frac, seed), stream)
    budget = replace(cfg.budget, seed=seed)

    if feats is None:
        feats = np.stack([extract_eeg_features(trial) for trial in x])
    res = train_classifier(feats[tr], y[tr], budget)
    mlp_tr = _accuracy(predict(res.model, feats[tr], res.standardizer), y[tr])
    mlp_te = _accuracy(predict(res.model, feats[te], res.standardizer), y[te])

    # raw trials only get one global scale from the training portion
    scale = x[tr].std()
    model = TriStreamModel(replace(cfg.tri, seed=seed))
    fit(model, x[tr] / scale, y[tr], budget, forward=_raw_forward)
    tri_tr = _accuracy(predict(model, x[tr] / scale, None, _raw_forward), y[tr])
    tri_te = _accuracy(predict(model, x[te] / scale, None, _raw_forward), y[te])
    return mlp_tr, mlp_te, tri_tr, tri_te


def run_study(cfg: StudyConfig | None = None, log=None) -> StudyResult:
    cfg = cfg or StudyConfig()
    data = synth_eeg_arrays(cfg.subjects, cfg.trials, cfg.data_seed, cfg.synth)
    feats = [np.stack([extract_eeg_features(trial) for trial in x]) for x, _ in data]
    out = np.zeros((4, len(cfg.seeds), cfg.subjects))
    for i, seed in enumerate(cfg.seeds):
        for s, (x, y) in enumerate(data):
            out[:, i, s] = run_subject(x, y, seed, s, cfg, feats[s])
            if log is not None:
                log(f"seed {seed} subject {s + 1}: mlp {out[1, i, s]:.3f} "
                    f"tri train {out[2, i, s]:.3f} test {out[3, i, s]:.3f}")
    return StudyResult(mlp_train=out[0], mlp_test=out[1], tri_train=out[2], tri_test=out[3])


def study_config_dict(cfg: StudyConfig) -> dict:
    d = asdict(cfg)
    d["tri"].pop("pairs", None)
    return d
