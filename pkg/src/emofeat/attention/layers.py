"""Attention building blocks: multi-head attention, squeeze-and-excitation,
and the learnable skip gate."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .. import autograd as ag
from .. import numkit
from ..numkit import Rng


class Module:
    """Holds named parameter leaves; submodules are flattened with dotted names."""

    def __init__(self):
        self._params: OrderedDict[str, ag.Var] = OrderedDict()
        self._children: OrderedDict[str, Module] = OrderedDict()

    def add_param(self, name: str, value) -> ag.Var:
        v = ag.param(value)
        self._params[name] = v
        return v

    def add_module(self, name: str, mod: "Module") -> "Module":
        self._children[name] = mod
        return mod

    def parameters(self) -> OrderedDict:
        out = OrderedDict(self._params)
        for cname, child in self._children.items():
            for pname, p in child.parameters().items():
                out[f"{cname}.{pname}"] = p
        return out

    def zero_grad(self):
        for p in self.parameters().values():
            p.grad = None

    def num_params(self) -> int:
        return int(sum(p.data.size for p in self.parameters().values()))

    def state_dict(self) -> dict:
        return {k: v.data.copy() for k, v in self.parameters().items()}

    def load_state_dict(self, state: dict):
        params = self.parameters()
        missing = set(params) - set(state)
        if missing:
            raise KeyError(f"state is missing {sorted(missing)}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(f"{k}: shape {arr.shape} != {p.data.shape}")
            p.data = arr.copy()


def glorot(rng: Rng, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    shape = shape or (fan_in, fan_out)
    return rng.normal(size=shape) * np.sqrt(2.0 / (fan_in + fan_out))


class MultiHeadAttention(Module):
    """Self-attention over the second-to-last axis of ``x[..., n, d_model]``.

    Weights are applied as ``x @ W``; ``W_o`` maps concatenated heads back
    to ``d_model``.
    """

    def __init__(self, d_model: int, heads: int, rng: Rng):
        super().__init__()
        if d_model % heads:
            raise ValueError(f"d_model {d_model} not divisible by heads {heads}")
        self.d_model, self.heads = d_model, heads
        self.d_k = d_model // heads
        for name in ("W_q", "W_k", "W_v", "W_o"):
            self.add_param(name, glorot(rng, d_model, d_model))

    def __call__(self, x, weight_fn=None, return_weights: bool = False):
        x = ag.const(x)
        lead, (n, d) = x.shape[:-2], x.shape[-2:]
        if d != self.d_model:
            raise ValueError(f"expected model dim {self.d_model}, got {d}")
        flat = ag.reshape(x, (-1, n, d))
        p = self._params

        def split(w):
            h = ag.reshape(ag.matmul(flat, w), (-1, n, self.heads, self.d_k))
            return ag.transpose(h, (0, 2, 1, 3))  # [M, h, n, d_k]

        out, attn = ag.scaled_dot_attention(split(p["W_q"]), split(p["W_k"]), split(p["W_v"]),
                                            weight_fn=weight_fn, return_weights=True)
        merged = ag.reshape(ag.transpose(out, (0, 2, 1, 3)), (-1, n, d))
        y = ag.reshape(ag.matmul(merged, p["W_o"]), lead + (n, d))
        return (y, attn) if return_weights else y


def scaled_dot_attention(q, k, v, return_weights: bool = False):
    """``softmax(Q K^T / sqrt(d_k)) V`` on plain arrays ``[n, d_k]``."""
    q, k, v = (numkit.as_tensor(a) for a in (q, k, v))
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ValueError("Q, K, V must be rank-2")
    if q.shape[1] != k.shape[1] or k.shape[0] != v.shape[0]:
        raise ValueError(f"attention shape mismatch Q{q.shape} K{k.shape} V{v.shape}")
    w = numkit.softmax(q @ k.T / np.sqrt(q.shape[1]), axis=-1)
    return (w @ v, w) if return_weights else w @ v


def column_reweight(column: int, factor: float):
    """Attention post-processor: scale one key column, renormalize rows."""

    def fn(attn: ag.Var) -> ag.Var:
        scale = np.ones(attn.shape[-1])
        scale[column] = factor
        scaled = ag.mul(attn, scale)
        return ag.div(scaled, ag.sum_(scaled, axis=-1, keepdims=True))

    return fn


class SkipGate(Module):
    """Convex blend ``(1 - a) * pre + a * att`` with ``a = sigmoid(w)``."""

    def __init__(self, w: float = -2.0):
        super().__init__()
        self.add_param("w", np.array(w))

    @property
    def alpha(self) -> float:
        return float(numkit.sigmoid(self._params["w"].data))

    def __call__(self, pre, att) -> ag.Var:
        pre, att = ag.const(pre), ag.const(att)
        if pre.shape != att.shape:
            raise ValueError(f"skip gate paths differ in shape: {pre.shape} vs {att.shape}")
        a = ag.sigmoid(self._params["w"])
        return ag.add(ag.mul(ag.sub(1.0, a), pre), ag.mul(a, att))


def skip_gate_fuse(pre_path, att_path, gate) -> np.ndarray:
    """Array version of :class:`SkipGate`; ``gate`` is a SkipGate or a raw weight."""
    w = gate._params["w"].data if isinstance(gate, SkipGate) else gate
    pre, att = numkit.as_tensor(pre_path), numkit.as_tensor(att_path)
    if pre.shape != att.shape:
        raise ValueError(f"skip gate paths differ in shape: {pre.shape} vs {att.shape}")
    a = numkit.sigmoid(float(w))
    return (1 - a) * pre + a * att


class SeBlock(Module):
    """Squeeze-and-excitation over ``x[C, L]`` (or ``[B, C, L]``), bias-free."""

    def __init__(self, channels: int, reduction: int, rng: Rng | None = None):
        super().__init__()
        if reduction < 1 or channels % reduction:
            raise ValueError(f"channels {channels} not divisible by reduction {reduction}")
        self.channels, self.reduction = channels, reduction
        hidden = channels // reduction
        rng = rng or Rng(0)
        self.add_param("W1", glorot(rng, channels, hidden, (hidden, channels)))
        self.add_param("W2", glorot(rng, hidden, channels, (channels, hidden)))

    def __call__(self, x, return_scale: bool = False):
        x = ag.const(x)
        if x.shape[-2] != self.channels:
            raise ValueError(f"SE block expects {self.channels} channels, got {x.shape[-2]}")
        z = ag.mean(x, axis=-1)  # [..., C]
        h = ag.relu(ag.matmul(ag.reshape(z, (-1, self.channels)), ag.transpose(self._params["W1"], (1, 0))))
        s = ag.sigmoid(ag.matmul(h, ag.transpose(self._params["W2"], (1, 0))))
        s = ag.reshape(s, z.shape + (1,))
        y = ag.mul(x, s)
        return (y, s) if return_scale else y


def se_param_count(channels: int, reduction: int) -> int:
    return 2 * channels * channels // reduction


def se_forward(x, block: SeBlock) -> np.ndarray:
    return block(x).data


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: Rng, bias: bool = True):
        super().__init__()
        self.add_param("W", glorot(rng, n_in, n_out))
        if bias:
            self.add_param("b", np.zeros(n_out))

    def __call__(self, x):
        x = ag.const(x)
        vec = x.ndim == 1
        y = ag.matmul(ag.reshape(x, (1, -1)) if vec else x, self._params["W"])
        if "b" in self._params:
            y = ag.add(y, self._params["b"])
        return ag.reshape(y, (-1,)) if vec else y


class LayerNorm(Module):
    def __init__(self, dim: int):
        super().__init__()
        self.add_param("gamma", np.ones(dim))
        self.add_param("beta", np.zeros(dim))

    def __call__(self, x):
        return ag.layer_norm(x, self._params["gamma"], self._params["beta"])
