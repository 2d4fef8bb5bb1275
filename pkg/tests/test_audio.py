import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emofeat.audio import (
    CLIP_LEN, MEL_FLOOR, SR, AudioClip, chroma, delta_coeffs, extract_audio_features, filter_edges,
    hz_to_mel, inverse_mfcc, mel_filterbank, mel_spectrogram, mel_to_hz, mfcc, pitch_classes, spec_augment,
    stft_magnitude,
)
from emofeat.numkit import Rng

T = np.arange(CLIP_LEN) / SR


def tone(f, amp=1.0):
    return amp * np.sin(2 * np.pi * f * T)


def test_clip_validation():
    with pytest.raises(ValueError):
        AudioClip(np.zeros(100))
    AudioClip(np.zeros(CLIP_LEN))


def test_mel_scale_roundtrip():
    f = np.array([0.0, 100.0, 1000.0, 8000.0])
    assert np.allclose(mel_to_hz(hz_to_mel(f)), f)
    assert np.isclose(hz_to_mel(700.0), 2595 * np.log10(2))


def test_filterbank_rows_normalized():
    fb = mel_filterbank()
    assert fb.shape == (128, 257)
    assert np.all(fb >= 0)
    assert np.allclose(fb.sum(axis=1), 1.0)


def test_silence_spectrogram_and_mfcc():
    mel = mel_spectrogram(np.zeros(CLIP_LEN))
    assert mel.shape == (498, 128) and np.all(mel == 0)
    c = mfcc(mel)
    assert c.shape == (498, 40)
    assert np.allclose(c[:, 0], np.sqrt(128) * np.log(MEL_FLOOR))
    assert np.allclose(c[:, 1:], 0)


def test_tone_peak_in_filter_containing_it():
    mel = mel_spectrogram(tone(1000.0))
    edges = filter_edges()
    rows = np.argmax(mel, axis=1)
    # the winning filter's support covers 1 kHz
    assert np.all(edges[rows] <= 1000.0) and np.all(edges[rows + 2] >= 1000.0)


def test_mfcc_constant_frame():
    c = mfcc(np.full((3, 128), 2.0))
    assert np.allclose(c[:, 1:], 0, atol=1e-12)
    assert np.all(c[:, 0] != 0)


def test_mfcc_roundtrip_full_dct():
    mel = np.random.default_rng(0).uniform(0.01, 3, size=(5, 128))
    assert np.allclose(inverse_mfcc(mfcc(mel, 128)), np.log(mel + MEL_FLOOR), atol=1e-9)


def test_mfcc_rejects_negative():
    with pytest.raises(ValueError):
        mfcc(-np.ones((2, 128)))


def test_delta_examples():
    assert np.all(delta_coeffs(np.full((7, 3), 4.2)) == 0)
    ramp = np.arange(10.0)[:, None]
    assert np.array_equal(delta_coeffs(ramp)[2:-2, 0], np.ones(6))
    hand = delta_coeffs(np.array([0.0, 1, 0, 0, 0])[:, None], 2)[:, 0]
    assert hand[1] == 0.0 and np.isclose(hand[0], 0.1)
    with pytest.raises(ValueError):
        delta_coeffs(np.zeros((0, 3)))


def test_delta_window_one():
    c = np.array([0.0, 1.0, 4.0, 9.0])[:, None]
    assert np.allclose(delta_coeffs(c, 1)[:, 0], [0.5, 2.0, 4.0, 2.5])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-5, 5), st.floats(-5, 5), st.integers(1, 3))
def test_delta_linear(seed, a, b, n):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(12, 4)), rng.normal(size=(12, 4))
    assert np.allclose(delta_coeffs(a * x + b * y, n), a * delta_coeffs(x, n) + b * delta_coeffs(y, n), atol=1e-10)


def test_pitch_classes():
    pc = pitch_classes()
    f = np.arange(257) * SR / 512
    assert np.all(pc[f < 32.7] == -1)
    assert pc[np.argmin(abs(f - 437.5))] == 9


def test_chroma_octaves():
    assert np.all(chroma(np.zeros(CLIP_LEN)) == 0)
    for f in (440.0, 880.0):
        assert np.all(np.argmax(chroma(tone(f)), axis=1) == 9)


def test_feature_layout_and_silence():
    v = extract_audio_features(np.zeros(CLIP_LEN))
    assert v.shape == (220,)
    assert np.all(v[40:80] == 0)


def test_extraction_deterministic():
    x = np.random.default_rng(1).normal(size=CLIP_LEN)
    assert extract_audio_features(x).tobytes() == extract_audio_features(x.copy()).tobytes()


def test_time_reversal_full_clip():
    # reversal shifts the 160-sample frame grid by 80 samples on a 5 s clip,
    # so an 80-periodic waveform is the full-length case with an exact answer
    n = np.arange(CLIP_LEN)
    x = np.sin(2 * np.pi * n / 80) + 0.5 * np.cos(2 * np.pi * 3 * n / 80 + 0.3)
    fwd, rev = extract_audio_features(x), extract_audio_features(x[::-1])
    assert np.allclose(fwd[:40], rev[:40], atol=1e-6)
    assert np.allclose(fwd[40:80], -rev[40:80], atol=1e-6)


def test_time_reversal_on_aligned_grid():
    # 79,920 samples: (len - 400) is a multiple of the hop, reversed frames
    # land on the forward grid and nonstationary content is allowed
    x = np.random.default_rng(4).normal(size=79920) * np.linspace(0.2, 2.0, 79920)
    cep = lambda s: mfcc(stft_magnitude(s) ** 2 @ mel_filterbank().T)  # noqa: E731
    fwd, rev = cep(x), cep(x[::-1])
    assert np.allclose(rev, fwd[::-1], atol=1e-9)
    assert np.allclose(fwd.mean(axis=0), rev.mean(axis=0), atol=1e-6)
    d_fwd, d_rev = delta_coeffs(fwd).mean(axis=0), delta_coeffs(rev).mean(axis=0)
    assert np.abs(d_fwd).max() > 1e-4
    assert np.allclose(d_rev, -d_fwd, atol=1e-6)


def test_amplitude_scaling_shifts_c0_only():
    x = np.random.default_rng(2).normal(size=CLIP_LEN)
    a, b = mfcc(mel_spectrogram(x)), mfcc(mel_spectrogram(3.0 * x))
    assert np.allclose(b[:, 1:], a[:, 1:], atol=1e-6)
    assert np.allclose(b[:, 0] - a[:, 0], np.sqrt(128) * np.log(9.0), atol=1e-6)


def test_spec_augment_examples():
    mel = np.random.default_rng(0).uniform(0.1, 1, size=(498, 128))
    assert np.array_equal(spec_augment(mel, Rng(0), 0, 0), mel)
    assert np.all(spec_augment(mel, Rng(0), 1, 0, max_t=498, max_f=0) == 0)
    out, log = spec_augment(mel, Rng(5), 1, 1, 10, 8, return_log=True)
    mask = np.zeros(mel.shape, bool)
    for axis, start, w in log:
        if axis == 0:
            mask[start : start + w] = True
        else:
            mask[:, start : start + w] = True
    assert (out == 0).sum() == mask.sum() == 10 * 128 + 8 * 498 - 10 * 8
    assert np.array_equal(out[~mask], mel[~mask])


def test_spec_augment_random_width_and_errors():
    mel = np.ones((50, 128))
    out, log = spec_augment(mel, Rng(1), 2, 2, 10, 8, random_width=True, return_log=True)
    assert all(0 <= w <= (10 if a == 0 else 8) for a, _, w in log)
    with pytest.raises(ValueError):
        spec_augment(mel, Rng(0), 1, 1, max_t=51)


def test_zero_mask_augment_keeps_mean_mel():
    mel = mel_spectrogram(np.random.default_rng(3).normal(size=CLIP_LEN))
    assert np.array_equal(spec_augment(mel, Rng(0), 0, 0).mean(axis=0), mel.mean(axis=0))
