"""Classification losses on raw logits, plus the double-softmax variant kept
to demonstrate why normalizing twice caps achievable confidence."""

from __future__ import annotations

import numpy as np

from .. import autograd as ag
from ..numkit import as_tensor, log_softmax, softmax


def _targets(labels, n_classes: int, smoothing: float) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    if not 0 <= smoothing < 1:
        raise ValueError("smoothing must lie in [0, 1)")
    y = np.full((labels.size, n_classes), smoothing / n_classes)
    y[np.arange(labels.size), labels] += 1.0 - smoothing
    return y


def cross_entropy_logits(logits, labels, smoothing: float = 0.0):
    """Mean label-smoothed cross-entropy and its gradient w.r.t. ``logits``.

    Targets are ``(1 - eps) * onehot + eps / K``.
    """
    z = as_tensor(logits, ndim=2)
    y = _targets(labels, z.shape[1], smoothing)
    if y.shape[0] != z.shape[0]:
        raise ValueError("logits and labels disagree on batch size")
    loss = float(-np.sum(y * log_softmax(z, axis=1)) / z.shape[0])
    grad = (softmax(z, axis=1) - y) / z.shape[0]
    return loss, grad


def cross_entropy_var(logits, labels, smoothing: float = 0.0) -> ag.Var:
    z = ag.const(logits)
    y = _targets(labels, z.shape[-1], smoothing)
    return ag.mul(ag.sum_(ag.mul(ag.log_softmax(z, axis=-1), y)), -1.0 / z.shape[0])


def double_softmax_ce(logits, labels) -> float:
    """Cross-entropy applied on top of an extra softmax layer.

    The inner softmax squeezes inputs into (0, 1), so for K classes the
    loss can never fall below ``ln((e + K - 1) / e)``.
    """
    p = softmax(as_tensor(logits, ndim=2), axis=1)
    return cross_entropy_logits(p, labels, 0.0)[0]


def double_softmax_var(logits, labels) -> ag.Var:
    return cross_entropy_var(ag.softmax(logits, axis=-1), labels, 0.0)


def double_softmax_floor(n_classes: int = 5) -> float:
    return float(np.log((np.e + n_classes - 1) / np.e))
