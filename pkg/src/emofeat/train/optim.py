"""AdamW with decoupled weight decay and a cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adamw_step(params: dict, grads: dict, state: AdamState, lr: float, beta1: float = 0.9,
               beta2: float = 0.999, eps: float = 1e-8, weight_decay: float = 0.0) -> dict:
    """One AdamW update; returns new parameter arrays and mutates ``state``.

    ``p <- p * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)``
    """
    state.step += 1
    bc1 = 1 - beta1**state.step
    bc2 = 1 - beta2**state.step
    out = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        if np.shape(g) != np.shape(p):
            raise ValueError(f"{name}: gradient shape {np.shape(g)} != parameter shape {np.shape(p)}")
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        state.m[name], state.v[name] = m, v
        out[name] = p * (1 - lr * weight_decay) - lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return out


class AdamW:
    """Applies :func:`adamw_step` to a module's parameter leaves in place."""

    def __init__(self, module, weight_decay: float = 0.0, betas=(0.9, 0.999), eps: float = 1e-8):
        self.module = module
        self.weight_decay = weight_decay
        self.betas = betas
        self.eps = eps
        self.state = AdamState()

    def step(self, lr: float):
        leaves = self.module.parameters()
        new = adamw_step({k: p.data for k, p in leaves.items()},
                         {k: p.grad for k, p in leaves.items() if p.grad is not None},
                         self.state, lr, *self.betas, eps=self.eps, weight_decay=self.weight_decay)
        for k, p in leaves.items():
            p.data = new[k]
            p.grad = None


def cosine_lr(t: float, total: float, lr_max: float, lr_min: float = 0.0) -> float:
    if not 0 <= t <= total:
        raise ValueError(f"epoch {t} outside [0, {total}]")
    return lr_min + 0.5 * (lr_max - lr_min) * (1 + math.cos(math.pi * t / total))
