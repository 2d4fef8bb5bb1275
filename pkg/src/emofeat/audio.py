"""Speech features: log-mel, MFCC, delta MFCC and chroma, time-averaged
into a 220-dim vector; SpecAugment masking for training."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct, idct

from .numkit import Rng, as_tensor

SR = 16000
CLIP_LEN = 5 * SR
FRAME_LEN = 400
HOP = 160
N_FFT = 512
N_MELS = 128
N_MFCC = 40
MEL_FLOOR = 1e-10
CHROMA_FMIN = 32.7
A4 = 440.0


@dataclass
class AudioClip:
    samples: np.ndarray
    label: int = 0
    sampling_rate: int = SR

    def __post_init__(self):
        self.samples = as_tensor(self.samples, ndim=1)
        if self.samples.shape[0] != CLIP_LEN:
            raise ValueError(f"audio clip must have {CLIP_LEN} samples, got {self.samples.shape[0]}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio clip contains non-finite values")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


@lru_cache(maxsize=4)
def mel_filterbank(n_mels: int = N_MELS, n_fft: int = N_FFT, sr: int = SR, fmax: float = SR / 2) -> np.ndarray:
    """Triangular mel filters ``[n_mels, n_fft//2 + 1]``, each row summing to 1.

    At 512-point resolution the lowest filters are narrower than one DFT
    bin; such a filter takes its whole weight from the bin nearest its
    centre.
    """
    freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(fmax), n_mels + 2))
    fb = np.zeros((n_mels, freqs.size))
    for m in range(n_mels):
        lo, mid, hi = edges[m : m + 3]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        row = np.maximum(0.0, np.minimum(up, down))
        if row.sum() <= 0:
            row[np.argmin(np.abs(freqs - mid))] = 1.0
        fb[m] = row / row.sum()
    fb.setflags(write=False)
    return fb


def filter_edges(n_mels: int = N_MELS, fmax: float = SR / 2) -> np.ndarray:
    return mel_to_hz(np.linspace(0.0, hz_to_mel(fmax), n_mels + 2))


def frame_signal(x: np.ndarray, frame_len: int = FRAME_LEN, hop: int = HOP) -> np.ndarray:
    n_frames = 1 + (x.shape[-1] - frame_len) // hop
    idx = np.arange(n_frames)[:, None] * hop + np.arange(frame_len)
    return x[idx]


def _hann(n: int) -> np.ndarray:
    # symmetric, so a reversed frame has the same magnitude spectrum
    return np.hanning(n)


def stft_magnitude(samples) -> np.ndarray:
    frames = frame_signal(as_tensor(samples, ndim=1)) * _hann(FRAME_LEN)
    return np.abs(np.fft.rfft(frames, n=N_FFT, axis=-1))


def _samples(clip) -> np.ndarray:
    return clip.samples if isinstance(clip, AudioClip) else AudioClip(clip).samples


def mel_spectrogram(clip) -> np.ndarray:
    """Mel-filtered power spectrogram ``[498, 128]``."""
    power = stft_magnitude(_samples(clip)) ** 2
    return power @ mel_filterbank().T


def mfcc(mel, n_mfcc: int = N_MFCC) -> np.ndarray:
    """Orthonormal DCT-II of the log mel energies, first ``n_mfcc`` kept."""
    mel = as_tensor(mel)
    if np.any(mel < 0):
        raise ValueError("mel energies must be nonnegative")
    return dct(np.log(mel + MEL_FLOOR), type=2, norm="ortho", axis=-1)[..., :n_mfcc]


def inverse_mfcc(coeffs) -> np.ndarray:
    """Log-mel reconstruction from a full set of orthonormal DCT coefficients."""
    return idct(as_tensor(coeffs), type=2, norm="ortho", axis=-1)


def delta_coeffs(c, n: int = 2) -> np.ndarray:
    """Regression deltas over a ``[T, D]`` sequence with edge frames repeated.

    ``d_t = sum_k k (c[t+k] - c[t-k]) / (2 sum_k k^2)`` for k = 1..n.
    """
    c = as_tensor(c)
    if c.shape[0] == 0:
        raise ValueError("delta_coeffs needs at least one frame")
    t = c.shape[0]
    padded = np.concatenate([np.repeat(c[:1], n, axis=0), c, np.repeat(c[-1:], n, axis=0)])
    num = np.zeros_like(c)
    for k in range(1, n + 1):
        num += k * (padded[n + k : n + k + t] - padded[n - k : n - k + t])
    return num / (2 * sum(k * k for k in range(1, n + 1)))


def pitch_classes(n_fft: int = N_FFT, sr: int = SR) -> np.ndarray:
    """Pitch class (C = 0, A = 9) of every DFT bin, or -1 below ``CHROMA_FMIN``."""
    freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
    pc = np.full(freqs.shape, -1)
    ok = freqs >= CHROMA_FMIN
    pc[ok] = (np.round(12 * np.log2(freqs[ok] / A4)).astype(int) + 9) % 12
    return pc


def chroma(clip) -> np.ndarray:
    """Per-frame sums of STFT magnitude folded into 12 pitch classes."""
    mag = stft_magnitude(_samples(clip))
    pc = pitch_classes()
    out = np.zeros((mag.shape[0], 12))
    for k in range(12):
        out[:, k] = mag[:, pc == k].sum(axis=1)
    return out


def extract_audio_features(clip, delta_n: int = 2) -> np.ndarray:
    """220 values: mean MFCC (40), mean delta MFCC (40), mean chroma (12),
    mean log-mel energies (128)."""
    samples = _samples(clip)
    mel = mel_spectrogram(samples)
    cep = mfcc(mel)
    return np.concatenate([
        cep.mean(axis=0),
        delta_coeffs(cep, delta_n).mean(axis=0),
        chroma(samples).mean(axis=0),
        np.log(mel + MEL_FLOOR).mean(axis=0),
    ])


def spec_augment(mel, rng: Rng, time_masks: int = 1, freq_masks: int = 1, max_t: int = 10,
                 max_f: int = 8, random_width: bool = False, return_log: bool = False):
    """Zero random contiguous time rows and frequency columns.

    Masks are ``max_t`` / ``max_f`` wide at random offsets; with
    ``random_width`` each width is drawn from ``[0, max]`` instead. With
    ``return_log`` the ``(axis, start, width)`` placements are returned
    alongside the masked copy.
    """
    mel = as_tensor(mel, ndim=2)
    t, f = mel.shape
    if max_t > t or max_f > f:
        raise ValueError(f"mask widths ({max_t}, {max_f}) exceed grid {mel.shape}")
    out = mel.copy()
    log = []
    for axis, count, max_w, size in ((0, time_masks, max_t, t), (1, freq_masks, max_f, f)):
        for _ in range(count):
            w = int(rng.integers(0, max_w + 1)) if random_width else max_w
            start = int(rng.integers(0, size - w + 1))
            if axis == 0:
                out[start : start + w, :] = 0.0
            else:
                out[:, start : start + w] = 0.0
            log.append((axis, start, w))
    return (out, log) if return_log else out
