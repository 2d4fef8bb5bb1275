import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emofeat.vision import (
    EMBED_DIM, N_FRAMES, FrameSequence, RandomProjectionEmbedder, embed_frames_default, extract_vision_features,
    frame_deltas,
)


def seq(seed=0, d=16):
    return np.random.default_rng(seed).normal(size=(N_FRAMES, d))


def test_sequence_validation():
    with pytest.raises(ValueError):
        FrameSequence(np.zeros((24, 8)))
    with pytest.raises(ValueError):
        FrameSequence(np.full((25, 8), np.inf))
    assert FrameSequence(np.zeros((25, 8))).dim == 8


def test_frame_deltas_examples():
    assert np.all(frame_deltas(np.ones((25, 4))) == 0)
    v = np.array([1.0, -2.0, 0.5])
    d = frame_deltas(np.arange(25)[:, None] * v)
    assert d.shape == (24, 3) and np.allclose(d, v)
    with pytest.raises(ValueError):
        frame_deltas(np.zeros((1, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 40))
def test_telescoping_mean_delta(seed, t):
    f = np.random.default_rng(seed).normal(size=(t, 5))
    assert np.allclose(frame_deltas(f).mean(axis=0), (f[-1] - f[0]) / (t - 1), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
def test_frame_deltas_linear(seed, a, b):
    f, g = seq(seed), seq(seed + 1)
    assert np.allclose(frame_deltas(a * f + b * g), a * frame_deltas(f) + b * frame_deltas(g), atol=1e-10)


def test_feature_layout_and_static_video():
    f = seq(1)
    v = extract_vision_features(FrameSequence(f))
    assert v.shape == (32,)
    assert np.allclose(v[:16], f.mean(axis=0))
    static = extract_vision_features(np.tile(f[:1], (25, 1)))
    assert np.all(static[16:] == 0)


def test_reversal_negates_deltas():
    f = seq(2)
    fwd, rev = extract_vision_features(f), extract_vision_features(f[::-1])
    assert np.allclose(fwd[:16], rev[:16], atol=1e-12)
    assert np.allclose(fwd[16:], -rev[16:], atol=1e-12)


def test_embedder_examples():
    emb = RandomProjectionEmbedder()
    frame = np.random.default_rng(0).integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    assert emb(frame).shape == (EMBED_DIM,)
    assert np.array_equal(emb(frame), emb(frame.copy()))
    assert np.all(emb(np.zeros((32, 32, 3), np.uint8)) == 0)
    with pytest.raises(ValueError):
        emb(np.zeros((8, 32, 3)))
    with pytest.raises(ValueError):
        emb(np.zeros((32, 32)))


def test_downsample_area_average():
    # a 32x32 image made of 2x2 constant blocks downsamples to the block values
    blocks = np.random.default_rng(1).integers(0, 256, size=(16, 16)).astype(float)
    img = np.repeat(np.repeat(blocks, 2, axis=0), 2, axis=1)
    rgb = np.stack([img, img, img], axis=2)
    assert np.allclose(RandomProjectionEmbedder().downsample(rgb), blocks)


def test_projection_preserves_expected_norm():
    # entries ~ N(0, 1/256) give E|x P|^2 = |x|^2 * D / 256
    emb = RandomProjectionEmbedder(seed=3)
    rng = np.random.default_rng(5)
    ratios = []
    for _ in range(100):
        frame = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
        x = emb.downsample(frame).ravel()
        ratios.append(np.sum(emb(frame) ** 2) / (np.sum(x * x) * EMBED_DIM / 256))
    assert abs(np.mean(ratios) - 1.0) < 0.10


def test_embed_frames_default():
    frames = np.random.default_rng(2).integers(0, 256, size=(25, 20, 20, 3), dtype=np.uint8)
    frames[3] = frames[4]
    s = embed_frames_default(frames, dim=64, seed=1, label=2)
    assert s.embeddings.shape == (25, 64) and s.label == 2
    assert np.array_equal(s.embeddings[3], s.embeddings[4])
    assert np.array_equal(s.embeddings, embed_frames_default(frames, dim=64, seed=1).embeddings)
    with pytest.raises(ValueError):
        embed_frames_default(frames[:24])
