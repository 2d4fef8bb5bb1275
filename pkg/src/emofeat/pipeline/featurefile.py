"""Binary feature matrix file.

``EAVF`` magic, then u32 version, n, dim; n int32 labels; n*dim float32
values, all little-endian. Total length is ``16 + 4n + 4n*dim`` bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .manifest import ValidationError

MAGIC = b"EAVF"
VERSION = 1


def write_feature_file(path, features, labels) -> int:
    x = np.asarray(features, dtype="<f4")
    y = np.asarray(labels, dtype="<i4")
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError(f"features {x.shape} and labels {y.shape} do not align")
    n, dim = x.shape
    payload = MAGIC + struct.pack("<III", VERSION, n, dim) + y.tobytes() + x.tobytes(order="C")
    Path(path).write_bytes(payload)
    return len(payload)


def read_feature_file(path):
    """Return ``(features[n, dim] float64, labels[n] int)``."""
    buf = Path(path).read_bytes()
    if len(buf) < 16 or buf[:4] != MAGIC:
        raise ValidationError(f"{path}: not a feature file")
    version, n, dim = struct.unpack_from("<III", buf, 4)
    if version != VERSION:
        raise ValidationError(f"{path}: unsupported version {version}")
    if len(buf) != 16 + 4 * n + 4 * n * dim:
        raise ValidationError(f"{path}: length {len(buf)} does not match n={n}, dim={dim}")
    labels = np.frombuffer(buf, dtype="<i4", count=n, offset=16).astype(int)
    feats = np.frombuffer(buf, dtype="<f4", count=n * dim, offset=16 + 4 * n).reshape(n, dim)
    return feats.astype(np.float64), labels
