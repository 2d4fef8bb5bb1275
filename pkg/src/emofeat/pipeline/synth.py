"""Synthetic class-structured datasets in the manifest format.

EEG: pink noise plus a bank of sinusoids in every canonical band, with the
band matching the class label boosted in amplitude. Each subject draws its
own per-channel gains. Audio: class-dependent harmonic tone complexes in
noise. Vision: frame embeddings drifting along a class-dependent rate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..audio import CLIP_LEN, SR
from ..eeg import BANDS, FS, N_CHANNELS, N_SAMPLES
from ..numkit import Rng
from .manifest import Manifest, Subject, TrialEntry, write_manifest


@dataclass(frozen=True)
class EegSynthParams:
    boost: float = 2.0
    sines_per_band: int = 3
    sine_amplitude: float = 1.0
    amplitude_jitter: float = 0.5  # std of log-amplitude per sinusoid
    noise_level: float = 1.0
    gain_range: tuple = (0.5, 1.5)


def pink_noise(rng: Rng, shape, fs: float = FS) -> np.ndarray:
    """Unit-variance noise with a 1/f power spectrum along the last axis."""
    n = shape[-1]
    spec = rng.normal(size=tuple(shape[:-1]) + (n // 2 + 1,)) + 1j * rng.normal(size=tuple(shape[:-1]) + (n // 2 + 1,))
    f = np.fft.rfftfreq(n, 1 / fs)
    f[0] = f[1]
    x = np.fft.irfft(spec / np.sqrt(f), n=n, axis=-1)
    x -= x.mean(axis=-1, keepdims=True)
    return x / x.std(axis=-1, keepdims=True)


def synth_eeg_trial(label: int, rng: Rng, gains: np.ndarray, params: EegSynthParams = EegSynthParams()) -> np.ndarray:
    t = np.arange(N_SAMPLES) / FS
    x = params.noise_level * pink_noise(rng, (N_CHANNELS, N_SAMPLES))
    for b, band in enumerate(BANDS):
        amp = params.sine_amplitude * (params.boost if b == label else 1.0)
        k = params.sines_per_band
        freqs = rng.uniform(band.f_low, band.f_high, size=(N_CHANNELS, k, 1))
        phases = rng.uniform(0, 2 * np.pi, size=(N_CHANNELS, k, 1))
        amps = amp * np.exp(params.amplitude_jitter * rng.normal(size=(N_CHANNELS, k, 1))) / np.sqrt(k)
        x += np.sum(amps * np.sin(2 * np.pi * freqs * t + phases), axis=1)
    return x * gains[:, None]


def synth_audio_clip(label: int, rng: Rng) -> np.ndarray:
    t = np.arange(CLIP_LEN) / SR
    f0 = 140.0 + 45.0 * label + rng.uniform(-10, 10)
    x = np.zeros(CLIP_LEN)
    for h in range(1, 6):
        x += rng.uniform(0.3, 1.0) / h * np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi))
    envelope = 0.6 + 0.4 * np.sin(2 * np.pi * (0.5 + 0.3 * label) * t)
    return 0.1 * (x * envelope + 0.5 * rng.normal(size=CLIP_LEN))


def synth_vision_sequence(label: int, rng: Rng, dim: int, direction: np.ndarray) -> np.ndarray:
    base = rng.normal(size=dim)
    rate = 0.05 * label
    steps = np.arange(25)[:, None]
    return base + steps * rate * direction + 0.3 * rng.normal(size=(25, dim))


def balanced_labels(n: int, rng: Rng) -> np.ndarray:
    return (np.arange(n) % 5)[rng.permutation(n)]


def subject_trials(modality: str, subject: int, trials: int, seed: int,
                   eeg_params: EegSynthParams = EegSynthParams(), vision_dim: int = 128):
    """Yield ``(label, array)`` for one subject; the stream depends only on
    ``(seed, subject, trial index)``."""
    root = Rng(seed)
    srng = root.child(subject)
    labels = balanced_labels(trials, srng)
    gains = srng.uniform(*eeg_params.gain_range, size=N_CHANNELS)
    direction = None
    if modality == "vision":
        direction = root.child(10**6).normal(size=vision_dim)
        direction /= np.linalg.norm(direction)
    for j, label in enumerate(labels):
        trng = srng.child(j)
        if modality == "eeg":
            arr = synth_eeg_trial(int(label), trng, gains, eeg_params)
        elif modality == "audio":
            arr = synth_audio_clip(int(label), trng)
        else:
            arr = synth_vision_sequence(int(label), trng, vision_dim, direction)
        yield int(label), arr


def synth_eeg_arrays(subjects: int, trials: int, seed: int, params: EegSynthParams = EegSynthParams()):
    """In-memory twin of :func:`synth_dataset` for EEG: list of ``(X[n,30,500], y[n])``."""
    out = []
    for s in range(subjects):
        pairs = list(subject_trials("eeg", s, trials, seed, params))
        # round through float32 so the arrays match what synth_dataset writes
        x = np.stack([a for _, a in pairs]).astype("<f4").astype(np.float64)
        out.append((x, np.array([l for l, _ in pairs])))
    return out


def synth_dataset(out_dir, modality: str, subjects: int, trials_per_subject: int, seed: int,
                  eeg_params: EegSynthParams = EegSynthParams(), vision_dim: int = 128) -> Manifest:
    """Write ``manifest.json`` plus one ``.f32`` file per trial under ``out_dir``."""
    if subjects < 1 or trials_per_subject < 1:
        raise ValueError("subjects and trials must be >= 1")
    if modality not in ("eeg", "audio", "vision"):
        raise ValueError(f"unknown modality {modality!r}")
    out = Path(out_dir)
    (out / "data").mkdir(parents=True, exist_ok=True)
    subs = []
    for s in range(subjects):
        entries = []
        for j, (label, arr) in enumerate(subject_trials(modality, s, trials_per_subject, seed, eeg_params, vision_dim)):
            rel = f"data/s{s:03d}_t{j:04d}_{modality}.f32"
            arr.astype("<f4").tofile(out / rel)
            entries.append(TrialEntry(modality, label, rel, list(arr.shape)))
        subs.append(Subject(f"S{s + 1}", entries))
    manifest = Manifest(subs, out)
    write_manifest(manifest, out / "manifest.json")
    return manifest


def synth_params_dict(params: EegSynthParams) -> dict:
    d = asdict(params)
    d["gain_range"] = list(params.gain_range)
    return d
