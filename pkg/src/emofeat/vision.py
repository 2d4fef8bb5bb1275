"""Frame-embedding features for video: mean static embedding plus mean
frame-to-frame delta."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import Rng, as_tensor

N_FRAMES = 25
EMBED_DIM = 2048
GRID = 16


@dataclass
class FrameSequence:
    embeddings: np.ndarray  # [25, D]
    label: int = 0

    def __post_init__(self):
        self.embeddings = as_tensor(self.embeddings, ndim=2)
        if self.embeddings.shape[0] != N_FRAMES:
            raise ValueError(f"expected {N_FRAMES} frames, got {self.embeddings.shape[0]}")
        if not np.all(np.isfinite(self.embeddings)):
            raise ValueError("frame embeddings contain non-finite values")

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


def frame_deltas(f) -> np.ndarray:
    """``d_t = f[t+1] - f[t]``; one fewer row than the input."""
    f = as_tensor(f, ndim=2)
    if f.shape[0] < 2:
        raise ValueError("frame_deltas needs at least 2 frames")
    return f[1:] - f[:-1]


def extract_vision_features(seq) -> np.ndarray:
    f = seq.embeddings if isinstance(seq, FrameSequence) else FrameSequence(seq).embeddings
    return np.concatenate([f.mean(axis=0), frame_deltas(f).mean(axis=0)])


class RandomProjectionEmbedder:
    """Default embedding provider.

    Grayscale (channel mean), area-downsample to 16x16, flatten, then project
    with a fixed Gaussian matrix whose entries are N(0, 1/256).
    """

    def __init__(self, dim: int = EMBED_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.projection = Rng(seed).normal(size=(GRID * GRID, dim)) / np.sqrt(GRID * GRID)

    def downsample(self, frame) -> np.ndarray:
        img = np.asarray(frame)
        if img.ndim != 3 or img.shape[2] != 3:
            raise ValueError(f"frames must be H x W x 3, got {img.shape}")
        h, w = img.shape[:2]
        if h < GRID or w < GRID:
            raise ValueError(f"frames must be at least {GRID}x{GRID}, got {h}x{w}")
        gray = img.astype(np.float64).mean(axis=2)
        # area average over an even partition of rows and columns
        rows = np.linspace(0, h, GRID + 1).astype(int)
        cols = np.linspace(0, w, GRID + 1).astype(int)
        rsum = np.add.reduceat(gray, rows[:-1], axis=0) / np.diff(rows)[:, None]
        return np.add.reduceat(rsum, cols[:-1], axis=1) / np.diff(cols)[None, :]

    def __call__(self, frame) -> np.ndarray:
        return self.downsample(frame).ravel() @ self.projection


def embed_frames_default(frames, dim: int = EMBED_DIM, seed: int = 0, label: int = 0) -> FrameSequence:
    """Embed raw ``[25, H, W, 3]`` byte frames with :class:`RandomProjectionEmbedder`."""
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[0] != N_FRAMES:
        raise ValueError(f"expected frames shaped [{N_FRAMES}, H, W, 3], got {frames.shape}")
    embed = RandomProjectionEmbedder(dim, seed)
    return FrameSequence(np.stack([embed(fr) for fr in frames]), label)
