"""Small deterministic numeric kernel shared by every other module.

Tensors are plain ``numpy.ndarray`` objects in float64. Randomness goes
through :class:`Rng`, a thin wrapper over numpy's counter-based Philox
bit generator so that a seed fully determines every draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FLOAT = np.float64


def as_tensor(x, ndim: int | None = None) -> np.ndarray:
    """Return ``x`` as a contiguous float64 array, optionally checking rank."""
    arr = np.ascontiguousarray(x, dtype=FLOAT)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a rank-{ndim} tensor, got shape {arr.shape}")
    return arr


class Rng:
    """Seeded counter-based generator (Philox).

    Two instances built from the same seed yield identical streams on any
    platform. ``child(i)`` derives an independent stream, e.g. one per trial.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def child(self, index: int) -> "Rng":
        # mix the index into the key rather than advancing the counter, so
        # children do not depend on how much the parent has been used
        mixed = (self.seed * 0x9E3779B97F4A7C15 + int(index) + 1) & 0xFFFFFFFFFFFFFFFF
        return Rng(mixed)

    def normal(self, size=None, loc=0.0, scale=1.0):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)


@dataclass(frozen=True)
class Spectrum:
    """One-sided DFT of a real signal."""

    bins: np.ndarray  # complex, length n // 2 + 1
    n: int
    sampling_rate: float = 1.0

    @property
    def bin_hz(self) -> float:
        return self.sampling_rate / self.n

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(len(self.bins)) * self.bin_hz


def dft_real(signal, sampling_rate: float = 1.0) -> Spectrum:
    """One-sided DFT of a real 1-D signal (``floor(N/2) + 1`` bins)."""
    x = as_tensor(signal, ndim=1)
    if x.size == 0:
        raise ValueError("dft_real needs a non-empty signal")
    if x.size < 2:
        raise ValueError("dft_real needs at least 2 samples")
    return Spectrum(np.fft.rfft(x), x.size, float(sampling_rate))


def idft_real(spec: Spectrum) -> np.ndarray:
    return np.fft.irfft(spec.bins, n=spec.n)


def parseval_energy(spec: Spectrum) -> float:
    """Time-domain energy recovered from a one-sided spectrum.

    Interior bins stand for a conjugate pair and count twice; DC and (for
    even N) the Nyquist bin count once.
    """
    mag2 = np.abs(spec.bins) ** 2
    weights = np.full(mag2.shape, 2.0)
    weights[0] = 1.0
    if spec.n % 2 == 0:
        weights[-1] = 1.0
    return float(np.sum(weights * mag2) / spec.n)


def conv1d(signal, kernels, padding: int = 0, bias=None) -> np.ndarray:
    """Cross-correlate ``signal[C_in, T]`` with ``kernels[C_out, C_in, K]``.

    Borders are zero-padded by ``padding`` on each side, so ``padding =
    (K - 1) // 2`` with odd ``K`` keeps the length. A leading batch axis on
    ``signal`` is allowed.
    """
    x = as_tensor(signal)
    w = as_tensor(kernels, ndim=3)
    batched = x.ndim == 3
    if not batched:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"signal must be [C_in, T] or [B, C_in, T], got {x.shape}")
    c_out, c_in, k = w.shape
    if x.shape[1] != c_in:
        raise ValueError(f"signal has {x.shape[1]} channels, kernels expect {c_in}")
    cols = im2col(x, k, padding)  # [B, C_in*K, T']
    out = np.matmul(w.reshape(c_out, c_in * k), cols)
    if bias is not None:
        out = out + as_tensor(bias)[None, :, None]
    return out if batched else out[0]


def im2col(x: np.ndarray, k: int, padding: int, stride: int = 1) -> np.ndarray:
    """``[B, C, T] -> [B, C*K, T']`` with windows laid out channel-major."""
    b, c, t = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding))) if padding else x
    if xp.shape[2] < k:
        raise ValueError("kernel longer than padded signal")
    win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)[:, :, ::stride]  # [B, C, T', K]
    t_out = win.shape[2]
    return np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(b, c * k, t_out)


def col2im(cols: np.ndarray, c: int, k: int, t: int, padding: int, stride: int = 1) -> np.ndarray:
    """Adjoint of :func:`im2col`."""
    b = cols.shape[0]
    t_out = cols.shape[2]
    cols = cols.reshape(b, c, k, t_out)
    xp = np.zeros((b, c, t + 2 * padding))
    span = (t_out - 1) * stride + 1
    for j in range(k):
        xp[:, :, j : j + span : stride] += cols[:, :, j, :]
    return xp[:, :, padding : padding + t] if padding else xp


def softmax(x, axis: int = -1) -> np.ndarray:
    x = as_tensor(x)
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def log_softmax(x, axis: int = -1) -> np.ndarray:
    x = as_tensor(x)
    z = x - np.max(x, axis=axis, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=axis, keepdims=True))


def sigmoid(x):
    """Logistic function, stable for large |x|; scalars stay scalars."""
    arr = np.asarray(x, dtype=FLOAT)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def relu(x) -> np.ndarray:
    return np.maximum(as_tensor(x), 0.0)
