"""Toy-scale attention models for EEG, audio-grid and video-grid inputs.

All models consume plain arrays and return :class:`~emofeat.autograd.Var`
outputs so they can be trained with the optimizers in ``emofeat.train``.
Pass a list as ``trace`` to collect every attention matrix of a forward
pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autograd as ag
from ..eeg import PAIRS, HemispherePair
from .. import numkit
from ..numkit import Rng, softmax
from .layers import LayerNorm, Linear, Module, MultiHeadAttention, SkipGate, column_reweight, glorot

N_CLASSES = 5


def _attend(mha, x, trace, weight_fn=None):
    y, attn = mha(x, weight_fn=weight_fn, return_weights=True)
    if trace is not None:
        trace.append(attn.data)
    return y


def sinusoidal_positions(n: int, d: int) -> np.ndarray:
    pos = np.arange(n)[:, None]
    i = np.arange(d)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


class ConvFrontEnd(Module):
    """Two same-length conv1d layers (kernel 11, padding 5) with ReLU."""

    def __init__(self, c_in: int, c_hidden: int, c_out: int, rng: Rng, kernel: int = 11, pool: int = 1,
                 stride: int = 1):
        super().__init__()
        if kernel % 2 == 0:
            raise ValueError("kernel size must be odd")
        self.kernel, self.pool, self.stride = kernel, pool, stride
        self.add_param("w1", glorot(rng, c_in * kernel, c_hidden, (c_hidden, c_in, kernel)))
        self.add_param("b1", np.zeros(c_hidden))
        self.add_param("w2", glorot(rng, c_hidden * kernel, c_out, (c_out, c_hidden, kernel)))
        self.add_param("b2", np.zeros(c_out))

    def __call__(self, x):
        p, pad = self._params, self.kernel // 2
        h = ag.relu(ag.conv1d(x, p["w1"], p["b1"], padding=pad, stride=self.stride))
        if self.pool > 1:
            h = ag.avg_pool_last(h, self.pool)
        return ag.relu(ag.conv1d(h, p["w2"], p["b2"], padding=pad))


class EncoderLayer(Module):
    """Post-norm transformer encoder layer."""

    def __init__(self, d_model: int, heads: int, d_ff: int, rng: Rng):
        super().__init__()
        self.attn = self.add_module("attn", MultiHeadAttention(d_model, heads, rng))
        self.norm1 = self.add_module("norm1", LayerNorm(d_model))
        self.ff1 = self.add_module("ff1", Linear(d_model, d_ff, rng))
        self.ff2 = self.add_module("ff2", Linear(d_ff, d_model, rng))
        self.norm2 = self.add_module("norm2", LayerNorm(d_model))

    def __call__(self, x, trace=None):
        x = self.norm1(ag.add(x, _attend(self.attn, x, trace)))
        return self.norm2(ag.add(x, self.ff2(ag.relu(self.ff1(x)))))


class EegTransformerBaseline(Module):
    """Conv front-end (30 -> 60 -> 60), six encoder layers with four heads,
    mean pooling over time and a two-layer classifier."""

    def __init__(self, seed: int = 0, channels: int = 30, d_model: int = 60, heads: int = 4,
                 layers: int = 6, d_ff: int = 120, positional: bool = True, zero_init_head: bool = False):
        super().__init__()
        rng = Rng(seed)
        self.positional = positional
        self.front = self.add_module("front", ConvFrontEnd(channels, d_model, d_model, rng))
        self.layers = [self.add_module(f"enc{i}", EncoderLayer(d_model, heads, d_ff, rng)) for i in range(layers)]
        self.head1 = self.add_module("head1", Linear(d_model, d_model, rng))
        self.head2 = self.add_module("head2", Linear(d_model, N_CLASSES, rng))
        if zero_init_head:
            for p in self.head2.parameters().values():
                p.data[...] = 0.0

    def encode(self, tokens, trace=None):
        """Encoder stack + mean pool + classifier on ``tokens[B, T, d_model]``."""
        h = ag.const(tokens)
        for layer in self.layers:
            h = layer(h, trace)
        pooled = ag.mean(h, axis=-2)
        return self.head2(ag.relu(self.head1(pooled)))

    def tokens(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[None]
        feats = self.front(x)  # [B, d, T]
        tok = ag.swapaxes(feats, 1, 2)
        if self.positional:
            tok = ag.add(tok, sinusoidal_positions(tok.shape[1], tok.shape[2]))
        return tok

    def __call__(self, x, trace=None):
        return self.encode(self.tokens(x), trace)


def m1_eeg_baseline_forward(trial, model: EegTransformerBaseline) -> np.ndarray:
    data = getattr(trial, "data", trial)
    return model(data).data[0]


@dataclass
class TriStreamConfig:
    """Defaults follow the 30 -> 60 -> 60, kernel-11 front-end; ``stride`` and
    ``pool`` shrink the time axis for desk-scale training."""

    feat_dim: int = 60
    heads: int = 4
    kernel: int = 11
    stride: int = 1
    pool: int = 1
    hidden: int = 60
    gate_w: float = 1.0
    pairs: tuple[HemispherePair, ...] = field(default_factory=lambda: PAIRS)
    emphasis: bool = True
    head_norm: bool = False
    channels: int = 30
    seed: int = 0

    def validate(self):
        if len(self.pairs) != 6:
            raise ValueError(f"tri-stream needs 6 hemisphere pairs, got {len(self.pairs)}")
        if self.feat_dim % self.heads:
            raise ValueError("feat_dim must be divisible by heads")
        if self.kernel % 2 == 0:
            raise ValueError("kernel size must be odd")
        if self.stride < 1 or self.pool < 1:
            raise ValueError("stride and pool must be >= 1")


class TriStreamModel(Module):
    """Spatial, temporal and hemispheric-asymmetry attention over conv
    features, fused with softmax weights and gated against the conv path.

    The first conv layer (channels -> F) is a sum over electrodes of
    per-electrode filter responses. Those responses, before the sum, are the
    electrode tokens for the spatial stream and, as right-minus-left
    differences, the pair tokens for the asymmetry stream. The summed
    response runs through the second conv layer (F -> F) and feeds the
    temporal stream and the conv path.
    """

    def __init__(self, cfg: TriStreamConfig | None = None):
        super().__init__()
        cfg = cfg or TriStreamConfig()
        cfg.validate()
        self.cfg = cfg
        rng = Rng(cfg.seed)
        f, c, k = cfg.feat_dim, cfg.channels, cfg.kernel
        # w1[c] is the [F, K] filter bank of electrode c
        self.w1 = self.add_param("w1", glorot(rng, c * k, f, (c, f, k)))
        self.b1 = self.add_param("b1", np.zeros(f))
        self.w2 = self.add_param("w2", glorot(rng, f * k, f, (f, f, k)))
        self.b2 = self.add_param("b2", np.zeros(f))
        self.spatial = self.add_module("spatial", MultiHeadAttention(f, cfg.heads, rng))
        self.temporal = self.add_module("temporal", MultiHeadAttention(f, cfg.heads, rng))
        self.asym = self.add_module("asym", MultiHeadAttention(f, cfg.heads, rng))
        self.fusion = self.add_param("fusion", np.zeros(3))
        self.gate = self.add_module("gate", SkipGate(cfg.gate_w))
        self.norm = self.add_module("norm", LayerNorm(f)) if cfg.head_norm else None
        self.head1 = self.add_module("head1", Linear(f, cfg.hidden, rng))
        self.head2 = self.add_module("head2", Linear(cfg.hidden, N_CLASSES, rng))
        self._left = np.array([p.left for p in cfg.pairs])
        self._right = np.array([p.right for p in cfg.pairs])
        self._emph = [i for i, p in enumerate(cfg.pairs) if p.weight != 1.0]

    def fusion_weights(self) -> np.ndarray:
        return softmax(self.fusion.data)

    def electrode_responses(self, x):
        """``x[B, C, T] -> [B, C, F, T']``: each electrode's share of the first conv."""
        k, stride = self.cfg.kernel, self.cfg.stride
        cols = numkit.im2col(x.reshape(-1, 1, x.shape[-1]), k, k // 2, stride)  # [B*C, K, T']
        cols = cols.reshape(x.shape[0], x.shape[1], k, -1)
        e = ag.matmul(self.w1, cols)
        if self.cfg.pool > 1:
            t = e.shape[-1] - e.shape[-1] % self.cfg.pool
            e = ag.avg_pool_last(e if t == e.shape[-1] else ag.take(e, np.arange(t), 3), self.cfg.pool)
        return e

    def conv_features(self, e):
        """Summed first-layer response -> second conv -> ``[B, F, T']``."""
        h = ag.relu(ag.add(ag.sum_(e, axis=1), ag.reshape(self.b1, (-1, 1))))
        return ag.relu(ag.conv1d(h, self.w2, self.b2, padding=self.cfg.kernel // 2))

    def _asym_weight_fn(self):
        if not self.cfg.emphasis or not self._emph:
            return None
        i = self._emph[0]
        return column_reweight(i, self.cfg.pairs[i].weight)

    def pooled_paths(self, x, trace=None):
        """Return ``(conv_pooled, [spatial, temporal, asym])``, each ``[B, F]``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[None]
        if x.shape[1] != self.cfg.channels:
            raise ValueError(f"expected {self.cfg.channels} electrodes, got {x.shape[1]}")
        e = self.electrode_responses(x)  # [B, C, F, T']
        h = self.conv_features(e)  # [B, F, T']
        tok_e = ag.transpose(e, (0, 3, 1, 2))  # [B, T', C, F]
        spatial = _attend(self.spatial, ag.relu(tok_e), trace)  # across electrodes
        temporal = _attend(self.temporal, ag.swapaxes(h, 1, 2), trace)  # across time
        diff = ag.sub(ag.take(tok_e, self._right, 2), ag.take(tok_e, self._left, 2))
        asym = _attend(self.asym, diff, trace, self._asym_weight_fn())  # across pairs
        streams = [ag.mean(spatial, axis=(1, 2)), ag.mean(temporal, axis=1), ag.mean(asym, axis=(1, 2))]
        return ag.mean(h, axis=2), streams

    def __call__(self, x, trace=None, stream_mask=(1.0, 1.0, 1.0)):
        conv, streams = self.pooled_paths(x, trace)
        w = ag.softmax(self.fusion)
        fused = None
        for i, (s, m) in enumerate(zip(streams, stream_mask)):
            term = ag.mul(ag.mul(s, ag.take(w, [i], 0)), float(m))
            fused = term if fused is None else ag.add(fused, term)
        # gate weight sigmoid(w) sits on the conv path
        z = self.gate(fused, conv)
        if self.norm is not None:
            z = self.norm(z)
        return self.head2(ag.relu(self.head1(z)))


def tri_stream_forward(trial, model: TriStreamModel) -> np.ndarray:
    data = getattr(trial, "data", trial)
    return model(data).data[0]


class DualAttention(Module):
    """Time-then-frequency factorized attention over a token grid ``[T, F, D]``
    with learnable per-axis positional encodings, mean-pooled and gated
    against a pre-computed summary token."""

    def __init__(self, d_model: int = 32, heads: int = 4, n_time: int = 101, n_freq: int = 12,
                 blocks: int = 2, gate_w: float = -2.0, seed: int = 0):
        super().__init__()
        rng = Rng(seed)
        self.shape = (n_time, n_freq, d_model)
        self.pos_t = self.add_param("pos_t", 0.02 * rng.normal(size=(n_time, 1, d_model)))
        self.pos_f = self.add_param("pos_f", 0.02 * rng.normal(size=(1, n_freq, d_model)))
        self.blocks = []
        for i in range(blocks):
            t_att = self.add_module(f"time{i}", MultiHeadAttention(d_model, heads, rng))
            f_att = self.add_module(f"freq{i}", MultiHeadAttention(d_model, heads, rng))
            self.blocks.append((t_att, f_att))
        self.gate = self.add_module("gate", SkipGate(gate_w))

    def attend(self, grid, trace=None):
        x = ag.const(grid)
        if x.shape[-3:] != self.shape:
            raise ValueError(f"grid must end in {self.shape}, got {x.shape}")
        x = ag.add(ag.add(x, self.pos_t), self.pos_f)
        for t_att, f_att in self.blocks:
            x = ag.swapaxes(_attend(t_att, ag.swapaxes(x, -3, -2), trace), -3, -2)  # each band across time
            x = _attend(f_att, x, trace)  # each frame across bands
        return ag.mean(x, axis=(-3, -2))

    def __call__(self, grid, cls_pre, trace=None):
        return self.gate(cls_pre, self.attend(grid, trace))


def dual_attention_forward(grid, model: DualAttention, cls_pre) -> np.ndarray:
    return model(grid, cls_pre).data


class SpaceTimeAttention(Module):
    """Factorized video attention: within-frame over patches, then across
    frames per patch position; separate spatial/temporal positional codes."""

    def __init__(self, d_model: int = 32, heads: int = 4, n_frames: int = 25, n_patches: int = 196,
                 blocks: int = 4, seed: int = 0, gate_w: float | None = None):
        super().__init__()
        rng = Rng(seed)
        self.d_model = d_model
        self.pos_s = self.add_param("pos_s", 0.02 * rng.normal(size=(1, n_patches, d_model)))
        self.pos_t = self.add_param("pos_t", 0.02 * rng.normal(size=(n_frames, 1, d_model)))
        self.blocks = []
        for i in range(blocks):
            s_att = self.add_module(f"space{i}", MultiHeadAttention(d_model, heads, rng))
            t_att = self.add_module(f"time{i}", MultiHeadAttention(d_model, heads, rng))
            self.blocks.append((s_att, t_att))
        self.gate = self.add_module("gate", SkipGate(gate_w)) if gate_w is not None else None

    def __call__(self, grid, trace=None, cls_pre=None):
        x = ag.const(grid)
        t, p, d = x.shape[-3:]
        if d != self.d_model or p != self.pos_s.shape[1] or t > self.pos_t.shape[0]:
            raise ValueError(f"grid {x.shape} does not fit the model")
        pos_t = self.pos_t if t == self.pos_t.shape[0] else ag.take(self.pos_t, np.arange(t), 0)
        x = ag.add(ag.add(x, self.pos_s), pos_t)
        for s_att, t_att in self.blocks:
            x = _attend(s_att, x, trace)  # patches within each frame
            x = ag.swapaxes(_attend(t_att, ag.swapaxes(x, -3, -2), trace), -3, -2)  # frames per patch
        out = ag.mean(x, axis=(-3, -2))
        if self.gate is not None and cls_pre is not None:
            out = self.gate(cls_pre, out)
        return out


def space_time_forward(grid, model: SpaceTimeAttention) -> np.ndarray:
    return model(grid).data
