"""Training-time EEG augmentation: amplitude scaling, circular time shift and
additive Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..eeg import EegTrial
from ..numkit import Rng


@dataclass(frozen=True)
class AugmentSpec:
    scale_range: tuple[float, float] = (0.9, 1.1)
    noise_frac: float = 0.05  # noise sigma as a fraction of each channel's std
    max_shift: int = 50


def circular_shift(data, shift: int) -> np.ndarray:
    return np.roll(np.asarray(data), int(shift), axis=-1)


def augment_eeg(trial: EegTrial, spec: AugmentSpec, rng: Rng) -> EegTrial:
    """``scale * roll(data, s) + noise``; the label is carried over."""
    lo, hi = spec.scale_range
    scale = lo if lo == hi else rng.uniform(lo, hi)
    shift = int(rng.integers(-spec.max_shift, spec.max_shift + 1)) if spec.max_shift else 0
    out = scale * circular_shift(trial.data, shift)
    if spec.noise_frac > 0:
        sigma = spec.noise_frac * trial.data.std(axis=-1, keepdims=True)
        out = out + sigma * rng.normal(size=out.shape)
    return EegTrial(out, trial.label, trial.sampling_rate)


def augment_batch(x: np.ndarray, spec: AugmentSpec, rng: Rng) -> np.ndarray:
    """Vectorized :func:`augment_eeg` over ``x[B, C, T]``, independent draws per trial."""
    lo, hi = spec.scale_range
    b = x.shape[0]
    scale = rng.uniform(lo, hi, size=(b, 1, 1)) if lo != hi else np.full((b, 1, 1), lo)
    shifts = rng.integers(-spec.max_shift, spec.max_shift + 1, size=b) if spec.max_shift else np.zeros(b, int)
    out = np.stack([np.roll(xi, s, axis=-1) for xi, s in zip(x, shifts)]) * scale
    if spec.noise_frac > 0:
        out = out + spec.noise_frac * x.std(axis=-1, keepdims=True) * rng.normal(size=x.shape)
    return out
