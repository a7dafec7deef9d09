"""Logits to evidence, Dirichlet parameters and single-source opinions."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

AUDIO = "audio"
VIDEO = "video"
TEXT = "text"
DEFAULT_ORDER = (AUDIO, VIDEO, TEXT)

OPINION_TOL = 1e-9


class EvidenceError(ValueError):
    """Invalid logit input (empty record, shape mismatch, non-finite value)."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DirichletParams:
    """Dirichlet concentration ``alpha`` (each >= 1) and its total ``strength``."""

    alpha: np.ndarray
    strength: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _frozen(self.alpha))
        object.__setattr__(self, "strength", float(self.strength))

    @property
    def evidence(self) -> np.ndarray:
        return self.alpha - 1.0


@dataclass(frozen=True, eq=False)
class Opinion:
    """Per-class belief masses plus the mass left on the whole frame.

    ``beliefs.sum() + uncertainty == 1`` and ``uncertainty > 0``. The vacuous
    opinion (all beliefs zero, uncertainty one) stands for a missing or
    uninformative source.
    """

    beliefs: np.ndarray
    uncertainty: float

    def __post_init__(self):
        b = _frozen(self.beliefs)
        u = float(self.uncertainty)
        object.__setattr__(self, "beliefs", b)
        object.__setattr__(self, "uncertainty", u)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("opinion needs a 1-d belief vector over at least 2 classes")
        if not (np.all(np.isfinite(b)) and math.isfinite(u)):
            raise ValueError("non-finite opinion")
        if np.any(b < 0.0) or np.any(b > 1.0):
            raise ValueError("beliefs must lie in [0, 1]")
        if not 0.0 < u <= 1.0:
            raise ValueError(f"uncertainty must lie in (0, 1], got {u!r}")
        total = float(b.sum()) + u
        if abs(total - 1.0) > OPINION_TOL:
            raise ValueError(f"beliefs + uncertainty must sum to 1, got {total!r}")

    @classmethod
    def vacuous(cls, k: int) -> "Opinion":
        return cls(np.zeros(k), 1.0)

    @property
    def k(self) -> int:
        return self.beliefs.size

    @property
    def is_vacuous(self) -> bool:
        return self.uncertainty == 1.0 and not np.any(self.beliefs)

    def same_as(self, other: "Opinion") -> bool:
        """Bit-for-bit equality."""
        return self.uncertainty == other.uncertainty and np.array_equal(self.beliefs, other.beliefs)

    def __repr__(self):
        return f"Opinion(beliefs={self.beliefs.tolist()}, uncertainty={self.uncertainty!r})"


def _validated(record: Mapping[str, object]) -> dict[str, np.ndarray]:
    if not record:
        raise EvidenceError("no modalities")
    out = {}
    k = None
    for name, values in record.items():
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise EvidenceError(f"dimension mismatch: {name} logits must be a vector of length >= 2")
        if k is None:
            k = arr.size
        elif arr.size != k:
            raise EvidenceError(f"dimension mismatch: {name} has {arr.size} classes, expected {k}")
        if not np.all(np.isfinite(arr)):
            raise EvidenceError(f"non-finite logit in {name}")
        out[name] = arr
    return out


def advanced_evidence(record: Mapping[str, object]) -> dict[str, np.ndarray]:
    """Shift every present modality by the smallest logit in the record.

    The minimum is taken jointly over all modalities present, so the output
    keeps relative scale across modalities and contains at least one exact 0.
    """
    arrs = _validated(record)
    floor = min(float(a.min()) for a in arrs.values())
    return {name: a - floor for name, a in arrs.items()}


def basic_evidence(record: Mapping[str, object]) -> dict[str, np.ndarray]:
    """Per-modality clip at zero, with no coupling between modalities."""
    arrs = _validated(record)
    return {name: np.where(a > 0.0, a, 0.0) for name, a in arrs.items()}


def evidence_to_dirichlet(evidence) -> DirichletParams:
    e = np.asarray(evidence, dtype=np.float64)
    if e.ndim != 1 or not np.all(np.isfinite(e)) or np.any(e < 0.0):
        raise EvidenceError("evidence must be a finite non-negative vector")
    alpha = e + 1.0
    return DirichletParams(alpha, float(alpha.sum()))


def dirichlet_to_opinion(d: DirichletParams) -> Opinion:
    e = d.alpha - 1.0
    return Opinion(e / d.strength, d.alpha.size / d.strength)


def opinion_from_evidence(evidence) -> Opinion:
    return dirichlet_to_opinion(evidence_to_dirichlet(evidence))
