"""Pick the most salient frame from per-frame class scores."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

DEFAULT_STRIDE = 5


class FrameSelectionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FrameScoreSequence:
    """Frame indices (strictly increasing) with one score vector each.

    Scores can be logits or probabilities; the selector never normalizes
    them. Selecting over probabilities and over logits agree only when all
    frames share the same normalizer.
    """

    indices: np.ndarray
    scores: np.ndarray
    stride: int = 1

    def __post_init__(self):
        try:
            idx = np.asarray(self.indices, dtype=np.int64)
            scores = np.asarray(self.scores, dtype=np.float64)
        except (ValueError, TypeError):
            raise FrameSelectionError("need one non-empty score vector per frame, all the same length") from None
        if idx.ndim != 1:
            raise FrameSelectionError("frame indices must be a flat sequence")
        if idx.size == 0:
            scores = scores.reshape(0, scores.shape[-1] if scores.ndim == 2 else 1)
        if scores.ndim != 2 or scores.shape[0] != idx.size or scores.shape[1] < 1:
            raise FrameSelectionError("need one non-empty score vector per frame, all the same length")
        if np.any(idx < 0) or np.any(np.diff(idx) <= 0):
            raise FrameSelectionError("frame indices must be non-negative and strictly increasing")
        if not np.all(np.isfinite(scores)):
            raise FrameSelectionError("non-finite frame score")
        if int(self.stride) < 1:
            raise FrameSelectionError("stride must be a positive integer")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "stride", int(self.stride))

    @classmethod
    def from_pairs(cls, frames: Sequence[tuple[int, Sequence[float]]], stride: int = 1):
        return cls([f[0] for f in frames], [list(f[1]) for f in frames], stride)

    def __len__(self):
        return self.indices.size

    def candidates(self) -> np.ndarray:
        """Ordinal positions kept by the stride: 0, T, 2T, ..."""
        return np.arange(0, len(self), self.stride)


def select_best_frame(seq: FrameScoreSequence) -> tuple[int, float]:
    """Return ``(frame_index, saliency)`` of the candidate with the largest score.

    Saliency is the frame's maximum class score. Ties go to the earliest
    frame. A stride longer than the sequence is rejected rather than
    silently reducing to the first frame.
    """
    if len(seq) == 0:
        raise FrameSelectionError("no candidate frames")
    if seq.stride > len(seq):
        raise FrameSelectionError(
            f"no candidate frames: stride {seq.stride} exceeds sequence length {len(seq)}"
        )
    pos = seq.candidates()
    saliency = seq.scores[pos].max(axis=1)
    best = int(np.argmax(saliency))  # first maximum -> lowest frame index
    return int(seq.indices[pos[best]]), float(saliency[best])
