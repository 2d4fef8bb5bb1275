"""Attention-score entry counts for full versus factorized space-time attention."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CostReport:
    frames: int
    patches: int
    full_entries: int
    factorized_entries: int
    ratio: float
    degenerate: bool

    def as_dict(self) -> dict:
        return {
            "frames": self.frames,
            "patches": self.patches,
            "full": self.full_entries,
            "factorized": self.factorized_entries,
            "ratio": self.ratio,
            "degenerate": self.degenerate,
        }


def attention_cost(frames: int, patches: int) -> CostReport:
    """Full joint attention scores ``(T*P)^2`` against ``T*P^2 + P*T^2``.

    With a singleton axis the factorized form does redundant work and the
    ratio drops to 1 or below; such cases are flagged ``degenerate``.
    """
    if frames < 1 or patches < 1:
        raise ValueError("frames and patches must be >= 1")
    full = (frames * patches) ** 2
    fact = frames * patches**2 + patches * frames**2
    return CostReport(frames, patches, full, fact, full / fact, frames == 1 or patches == 1)
