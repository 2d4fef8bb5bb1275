"""Per-subject stratified train/test split."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..numkit import Rng


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    seed: int = 0


def stratified_counts(label_counts: dict, frac: float) -> dict:
    """Train quota per label, largest-remainder rounded to ``floor(frac * N)``.

    Ties in the remainder go to the smaller label.
    """
    total = sum(label_counts.values())
    target = math.floor(frac * total + 1e-9)
    exact = {k: frac * n for k, n in label_counts.items()}
    quota = {k: min(label_counts[k], math.floor(v + 1e-9)) for k, v in exact.items()}
    order = sorted(label_counts, key=lambda k: (-(exact[k] - quota[k]), k))
    short = target - sum(quota.values())
    for k in order:
        if short <= 0:
            break
        if quota[k] < label_counts[k]:
            quota[k] += 1
            short -= 1
    return quota


def split_trials(labels, spec: SplitSpec = SplitSpec(), stream: int = 0):
    """Return sorted ``(train_idx, test_idx)`` into ``labels``.

    ``stream`` separates the draws of different subjects under one seed.
    """
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise ValueError("cannot split an empty subject")
    counts = {int(k): int(n) for k, n in zip(*np.unique(labels, return_counts=True))}
    quota = stratified_counts(counts, spec.train_frac)
    rng = Rng(spec.seed).child(stream)
    train = []
    for k in sorted(counts):
        members = np.flatnonzero(labels == k)
        train.extend(members[rng.permutation(members.size)[: quota[k]]])
    train = np.sort(np.array(train, dtype=int))
    test = np.setdiff1d(np.arange(labels.size), train)
    return train, test
