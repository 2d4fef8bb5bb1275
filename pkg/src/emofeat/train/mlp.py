"""Feature MLP: linear layers with batch norm, ReLU and inverted dropout."""

from __future__ import annotations

import numpy as np

from .. import autograd as ag
from ..attention.layers import Linear, Module
from ..numkit import Rng


class BatchNorm(Module):
    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.add_param("gamma", np.ones(dim))
        self.add_param("beta", np.zeros(dim))
        self.momentum, self.eps = momentum, eps
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)

    def __call__(self, x, train: bool):
        g, b = self._params["gamma"], self._params["beta"]
        if not train:
            xhat = (ag.const(x).data - self.running_mean) / np.sqrt(self.running_var + self.eps)
            return ag.add(ag.mul(xhat, g), b)
        out, mu, var = ag.batch_norm(x, g, b, self.eps)
        n = ag.const(x).shape[0]
        unbiased = var * n / max(n - 1, 1)
        self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mu
        self.running_var = (1 - self.momentum) * self.running_var + self.momentum * unbiased
        return out


class MlpClassifier(Module):
    """``n_in -> hidden... -> n_classes``; each hidden layer is
    linear, batch norm, ReLU, dropout."""

    def __init__(self, n_in: int = 306, hidden=(128, 64), n_classes: int = 5, dropout: float = 0.5,
                 seed: int = 0, momentum: float = 0.1):
        super().__init__()
        rng = Rng(seed)
        self.dropout = dropout
        self.n_in = n_in
        self.blocks = []
        width = n_in
        for i, h in enumerate(hidden):
            fc = self.add_module(f"fc{i}", Linear(width, h, rng))
            bn = self.add_module(f"bn{i}", BatchNorm(h, momentum))
            self.blocks.append((fc, bn))
            width = h
        self.out = self.add_module("out", Linear(width, n_classes, rng))

    def __call__(self, x, train: bool = False, rng: Rng | None = None):
        h = ag.const(x)
        for fc, bn in self.blocks:
            h = ag.relu(bn(fc(h), train))
            if train and self.dropout > 0:
                if rng is None:
                    raise ValueError("training-mode dropout needs an Rng")
                keep = (rng.uniform(size=h.shape) >= self.dropout) / (1.0 - self.dropout)
                h = ag.mul(h, keep)
        return self.out(h)

    def state_dict(self) -> dict:
        state = super().state_dict()
        for i, (_, bn) in enumerate(self.blocks):
            state[f"bn{i}.running_mean"] = bn.running_mean.copy()
            state[f"bn{i}.running_var"] = bn.running_var.copy()
        return state

    def load_state_dict(self, state: dict):
        params = set(self.parameters())
        super().load_state_dict({k: v for k, v in state.items() if k in params})
        for i, (_, bn) in enumerate(self.blocks):
            bn.running_mean = np.asarray(state[f"bn{i}.running_mean"], dtype=np.float64).copy()
            bn.running_var = np.asarray(state[f"bn{i}.running_var"], dtype=np.float64).copy()


def param_count(model) -> int:
    """Trainable element count of a module, a ``{name: shape}`` mapping or a
    sequence of shapes."""
    if model is None:
        return 0
    if isinstance(model, Module):
        return model.num_params()
    shapes = model.values() if isinstance(model, dict) else model
    return int(sum(int(np.prod(s)) for s in shapes))


def mlp_descriptor(n_in: int = 306, hidden=(128, 64), n_classes: int = 5) -> dict:
    """Weight shapes of :class:`MlpClassifier` without building it."""
    desc, width = {}, n_in
    for i, h in enumerate(hidden):
        desc[f"fc{i}.W"], desc[f"fc{i}.b"] = (width, h), (h,)
        desc[f"bn{i}.gamma"], desc[f"bn{i}.beta"] = (h,), (h,)
        width = h
    desc["out.W"], desc["out.b"] = (width, n_classes), (n_classes,)
    return desc


def se_descriptor(channels: int, reduction: int) -> dict:
    return {"W1": (channels // reduction, channels), "W2": (channels, channels // reduction)}
