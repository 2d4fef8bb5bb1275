"""Minibatch training loop shared by the feature MLP and the attention models."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import autograd as ag
from ..numkit import Rng
from .augment import AugmentSpec, augment_batch
from .losses import cross_entropy_var
from .mlp import MlpClassifier
from .optim import AdamW, cosine_lr


@dataclass
class TrainConfig:
    lr: float = 1e-3
    lr_min: float = 1e-5
    weight_decay: float = 0.01
    label_smoothing: float = 0.1
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    standardize: bool = True
    dropout: float = 0.5
    hidden: tuple = (128, 64)
    schedule: str = "cosine"

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= self.label_smoothing < 1:
            raise ValueError("label_smoothing must lie in [0, 1)")
        if self.schedule != "cosine":
            raise ValueError(f"unknown schedule {self.schedule!r}")
        self.hidden = tuple(self.hidden)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Standardizer:
    """Per-feature z-score; zero-variance features pass through with unit scale."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x) -> "Standardizer":
        x = np.asarray(x, dtype=np.float64)
        std = x.std(axis=0)
        return cls(x.mean(axis=0), np.where(std > 0, std, 1.0))

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    def __call__(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.scale


@dataclass
class TrainResult:
    model: object
    standardizer: Standardizer
    losses: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)


def mlp_forward(model, xb, train, rng):
    return model(xb, train=train, rng=rng)


def _batches(n: int, size: int, order: np.ndarray):
    bounds = list(range(0, n, size))
    # a trailing batch of one would break batch statistics; fold it back in
    if len(bounds) > 1 and n - bounds[-1] == 1:
        bounds.pop()
    for i, start in enumerate(bounds):
        stop = bounds[i + 1] if i + 1 < len(bounds) else n
        yield order[start:stop]


def fit(model, x, y, cfg: TrainConfig, forward=mlp_forward, augment: AugmentSpec | None = None) -> TrainResult:
    """Train ``model`` in place; ``x`` is already standardized/preprocessed."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=int)
    rng = Rng(cfg.seed)
    opt = AdamW(model, weight_decay=cfg.weight_decay)
    result = TrainResult(model, Standardizer.identity(x.shape[1]) if x.ndim == 2 else None)
    for epoch in range(cfg.epochs):
        lr = cosine_lr(epoch, cfg.epochs, cfg.lr, cfg.lr_min)
        total, correct = 0.0, 0
        for idx in _batches(len(x), cfg.batch_size, rng.permutation(len(x))):
            xb = x[idx]
            if augment is not None:
                xb = augment_batch(xb, augment, rng)
            logits = forward(model, xb, True, rng)
            loss = cross_entropy_var(logits, y[idx], cfg.label_smoothing)
            model.zero_grad()
            loss.backward()
            opt.step(lr)
            total += float(loss.data) * len(idx)
            correct += int(np.sum(np.argmax(logits.data, axis=1) == y[idx]))
        result.losses.append(total / len(x))
        result.train_accuracy.append(correct / len(x))
    return result


def train_classifier(features, labels, cfg: TrainConfig | None = None, model=None) -> TrainResult:
    """Standardize with training statistics, then fit the feature MLP."""
    cfg = cfg or TrainConfig()
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be [N, dim]")
    if len(x) < 10:
        raise ValueError("need at least 10 training samples")
    if model is None:
        model = MlpClassifier(x.shape[1], cfg.hidden, dropout=cfg.dropout, seed=cfg.seed)
    if getattr(model, "n_in", x.shape[1]) != x.shape[1]:
        raise ValueError(f"model expects {model.n_in} features, got {x.shape[1]}")
    std = Standardizer.fit(x) if cfg.standardize else Standardizer.identity(x.shape[1])
    result = fit(model, std(x), labels, cfg)
    result.standardizer = std
    return result


def predict(model, x, standardizer: Standardizer | None = None, forward=mlp_forward, batch_size: int = 256):
    x = np.asarray(x, dtype=np.float64)
    if standardizer is not None:
        x = standardizer(x)
    out = [np.argmax(forward(model, x[i : i + batch_size], False, None).data, axis=1)
           for i in range(0, len(x), batch_size)]
    return np.concatenate(out) if out else np.zeros(0, dtype=int)


def logits_of(model, x, forward=mlp_forward) -> ag.Var:
    return forward(model, np.asarray(x, dtype=np.float64), False, None)
