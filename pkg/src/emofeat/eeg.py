"""EEG frequency-domain features: band power, differential entropy and
frontal alpha asymmetry, concatenated into a 306-dim vector per trial."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import as_tensor, dft_real

N_CHANNELS = 30
N_SAMPLES = 500
FS = 100.0
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class BandDef:
    name: str
    f_low: float
    f_high: float

    def check(self, fs: float) -> None:
        if not (0 < self.f_low < self.f_high <= fs / 2):
            raise ValueError(f"band {self.name} [{self.f_low}, {self.f_high}] outside (0, {fs / 2}]")


BANDS = (
    BandDef("delta", 0.5, 4.0),
    BandDef("theta", 4.0, 8.0),
    BandDef("alpha", 8.0, 13.0),
    BandDef("beta", 13.0, 30.0),
    BandDef("gamma", 30.0, 45.0),
)
ALPHA = BANDS[2]

# 30-electrode 10-20 montage; the defaults below index into this list
MONTAGE = (
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2",
    "FC6", "T7", "C3", "Cz", "C4", "T8", "CP5", "CP1", "CP2", "CP6",
    "P7", "P3", "Pz", "P4", "P8", "PO9", "O1", "Oz", "O2", "PO10",
)


@dataclass(frozen=True)
class HemispherePair:
    name: str
    left: int
    right: int
    weight: float = 1.0  # attention emphasis used by the tri-stream model


def make_pairs(montage=MONTAGE) -> tuple[HemispherePair, ...]:
    """The six homologous pairs, resolved against a channel-name list."""
    idx = {name: i for i, name in enumerate(montage)}
    spec = [("Fp1", "Fp2"), ("F3", "F4"), ("F7", "F8"), ("C3", "C4"), ("P3", "P4"), ("O1", "O2")]
    pairs = []
    for left, right in spec:
        if left not in idx or right not in idx:
            raise KeyError(f"montage lacks {left} or {right}")
        pairs.append(HemispherePair(f"{left}-{right}", idx[left], idx[right], 1.2 if left == "F3" else 1.0))
    return tuple(pairs)


PAIRS = make_pairs()


@dataclass
class EegTrial:
    data: np.ndarray  # [30, 500]
    label: int = 0
    sampling_rate: float = FS

    def __post_init__(self):
        self.data = as_tensor(self.data, ndim=2)
        if self.data.shape != (N_CHANNELS, N_SAMPLES):
            raise ValueError(f"EEG trial must be {(N_CHANNELS, N_SAMPLES)}, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("EEG trial contains non-finite values")
        if not 0 <= int(self.label) <= 4:
            raise ValueError(f"label {self.label} outside 0..4")


def welch_psd(signal, fs: float = FS, seg_len: int = 100, overlap: float = 0.5):
    """One-sided Welch PSD with a periodic Hann window.

    Returns ``(freqs, psd)`` in units of power per Hz, so integrating the
    PSD over ``[0, fs/2]`` gives the signal power. Accepts ``[..., N]``.
    """
    x = as_tensor(signal)
    n = x.shape[-1]
    if seg_len < 8:
        raise ValueError("seg_len must be at least 8")
    if seg_len > n:
        raise ValueError(f"seg_len {seg_len} exceeds signal length {n}")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    step = max(1, int(round(seg_len * (1 - overlap))))
    n_seg = 1 + (n - seg_len) // step
    win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(seg_len) / seg_len)
    starts = np.arange(n_seg) * step
    segs = x[..., starts[:, None] + np.arange(seg_len)]  # [..., n_seg, seg_len]
    spec = np.fft.rfft(segs * win, axis=-1)
    pxx = np.abs(spec) ** 2 / (fs * np.sum(win**2))
    # fold negative frequencies in; DC and Nyquist have no mirror image
    pxx[..., 1:] *= 2.0
    if seg_len % 2 == 0:
        pxx[..., -1] /= 2.0
    freqs = np.arange(seg_len // 2 + 1) * fs / seg_len
    return freqs, pxx.mean(axis=-2)


def band_power(psd, band: BandDef) -> np.ndarray | float:
    """Trapezoid integral of a Welch PSD over ``[f_low, f_high]``.

    The PSD is linearly interpolated at band edges that fall between grid
    points, so partial bins count proportionally.
    """
    freqs, pxx = psd
    nyq = freqs[-1]
    if not (0 <= band.f_low < band.f_high <= nyq):
        raise ValueError(f"band {band.name} outside [0, {nyq}] Hz")
    inner = freqs[(freqs > band.f_low) & (freqs < band.f_high)]
    grid = np.concatenate([[band.f_low], inner, [band.f_high]])
    pxx = np.asarray(pxx)
    flat = pxx.reshape(-1, pxx.shape[-1])
    vals = np.stack([np.interp(grid, freqs, row) for row in flat])
    out = np.trapezoid(vals, grid, axis=-1).reshape(pxx.shape[:-1])
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def brickwall_bandpass(signal, band: BandDef, fs: float = FS) -> np.ndarray:
    """Ideal zero-phase band-pass: zero every DFT bin outside the band."""
    band.check(fs)
    x = as_tensor(signal)
    n = x.shape[-1]
    if x.ndim == 1:
        spec = dft_real(x, fs)
        bins, freqs = spec.bins, spec.freqs
    else:
        bins = np.fft.rfft(x, axis=-1)
        freqs = np.fft.rfftfreq(n, 1.0 / fs)
    keep = (freqs >= band.f_low) & (freqs <= band.f_high)
    return np.fft.irfft(bins * keep, n=n, axis=-1)


def differential_entropy(band_signal) -> np.ndarray | float:
    """Gaussian differential entropy ``0.5 ln(2 pi e var)`` along the last axis."""
    x = as_tensor(band_signal)
    if x.shape[-1] < 2:
        raise ValueError("differential entropy needs at least 2 samples")
    var = np.maximum(np.var(x, axis=-1, ddof=1), LOG_FLOOR)
    out = 0.5 * np.log(2 * np.pi * np.e * var)
    return float(out) if out.ndim == 0 else out


def alpha_power(data, fs: float = FS) -> np.ndarray:
    return band_power(welch_psd(data, fs), ALPHA)


def alpha_asymmetry(trial, pairs=PAIRS, fs: float = FS) -> np.ndarray:
    """``ln P_alpha(right) - ln P_alpha(left)`` for each hemisphere pair."""
    data = trial.data if isinstance(trial, EegTrial) else as_tensor(trial, ndim=2)
    p = np.maximum(alpha_power(data, fs), LOG_FLOOR)
    return _asymmetry_from_power(p, pairs)


def _asymmetry_from_power(p_alpha: np.ndarray, pairs) -> np.ndarray:
    logp = np.log(np.maximum(p_alpha, LOG_FLOOR))
    return np.array([logp[pr.right] - logp[pr.left] for pr in pairs])


def extract_eeg_features(trial, pairs=PAIRS, fs: float = FS) -> np.ndarray:
    """306-dim feature vector.

    Layout: 150 band powers (channel-major, band-minor), 150 differential
    entropies in the same order, then the six pair asymmetries.
    """
    if not isinstance(trial, EegTrial):
        trial = EegTrial(trial)
    data = trial.data
    psd = welch_psd(data, fs)
    powers = np.stack([band_power(psd, b) for b in BANDS], axis=1)  # [30, 5]
    de = np.stack([differential_entropy(brickwall_bandpass(data, b, fs)) for b in BANDS], axis=1)
    asym = _asymmetry_from_power(powers[:, 2], pairs)
    return np.concatenate([powers.ravel(), de.ravel(), asym])


def feature_index(kind: str, channel: int = 0, band: int = 0) -> int:
    """Position of a named entry inside the 306-dim layout."""
    if kind == "power":
        return channel * len(BANDS) + band
    if kind == "de":
        return 150 + channel * len(BANDS) + band
    if kind == "asym":
        return 300 + channel
    raise ValueError(kind)
