"""Dempster-Shafer combination of opinions and recovery of class probabilities."""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .evidence import (
    DEFAULT_ORDER,
    DirichletParams,
    Opinion,
    advanced_evidence,
    basic_evidence,
    opinion_from_evidence,
)

CONFLICT_EPS = 1e-12
CERTAINTY_EPS = 1e-12

MODES = ("basic", "advanced")


class FusionError(ArithmeticError):
    pass


class TotalConflictError(FusionError):
    pass


class DegenerateCertaintyError(FusionError):
    pass


@dataclass(frozen=True, eq=False)
class FusionResult:
    fused: Opinion
    probabilities: np.ndarray
    dirichlet: DirichletParams
    per_modality: list[tuple[str, Opinion]] = field(default_factory=list)
    conflict_trace: list[float] = field(default_factory=list)

    @property
    def predicted_index(self) -> int:
        return int(np.argmax(self.probabilities))


def _check_pair(m1: Opinion, m2: Opinion):
    if m1.k != m2.k:
        raise ValueError(f"class count mismatch: {m1.k} vs {m2.k}")


def ds_combine(m1: Opinion, m2: Opinion) -> tuple[Opinion, float]:
    """Combine two opinions with Dempster's rule (closed form).

    Conflict ``sum_{i != j} b1_i * b2_j`` is evaluated as
    ``(1 - u1) * (1 - u2) - sum_k b1_k * b2_k``. The two agree for valid
    opinions, but this form does not amplify round-off in ``sum(b) + u``
    along long fusion chains. Combining with the vacuous opinion returns
    the other operand exactly.
    """
    _check_pair(m1, m2)
    b1, u1 = m1.beliefs, m1.uncertainty
    b2, u2 = m2.beliefs, m2.uncertainty
    c = max((1.0 - u1) * (1.0 - u2) - float(np.dot(b1, b2)), 0.0)
    norm = 1.0 - c
    if norm < CONFLICT_EPS:
        raise TotalConflictError(f"total conflict (1 - c = {norm!r})")
    b = (b1 * b2 + b1 * u2 + b2 * u1) / norm
    u = u1 * u2 / norm
    return Opinion(b, u), c


def ds_combine_oracle(m1: Opinion, m2: Opinion) -> tuple[Opinion, float]:
    """Dempster's rule by enumerating every pair of focal sets.

    Each opinion is read as a mass function with ``m({k}) = b_k`` and
    ``m(frame) = u``. Deliberately shares no arithmetic with ``ds_combine``.
    """
    _check_pair(m1, m2)
    k = m1.k
    frame = frozenset(range(k))

    def masses(m: Opinion) -> dict[frozenset, float]:
        out = {frozenset([i]): float(m.beliefs[i]) for i in range(k)}
        out[frame] = m.uncertainty
        return out

    joint: dict[frozenset, float] = {}
    conflict = 0.0
    for (a, ma), (b, mb) in itertools.product(masses(m1).items(), masses(m2).items()):
        inter = a & b
        if inter:
            joint[inter] = joint.get(inter, 0.0) + ma * mb
        else:
            conflict += ma * mb
    norm = 1.0 - conflict
    if norm < CONFLICT_EPS:
        raise TotalConflictError(f"total conflict (1 - c = {norm!r})")
    beliefs = [joint.get(frozenset([i]), 0.0) / norm for i in range(k)]
    return Opinion(beliefs, joint.get(frame, 0.0) / norm), conflict


def opinion_to_probabilities(m: Opinion) -> tuple[DirichletParams, np.ndarray]:
    """Map a (fused) opinion back to Dirichlet parameters and expected class probabilities."""
    if m.uncertainty < CERTAINTY_EPS:
        raise DegenerateCertaintyError(f"degenerate certainty (u = {m.uncertainty!r})")
    s = m.k / m.uncertainty
    alpha = m.beliefs * s + 1.0
    return DirichletParams(alpha, s), alpha / s


def fuse_sequence(opinions: Sequence[tuple[str, Opinion]]) -> FusionResult:
    """Left fold of ``ds_combine`` over ``(modality, opinion)`` pairs.

    Vacuous opinions are dropped before folding: they are the exact identity
    of the rule, so omitting a modality and passing it as vacuous give the
    same result, conflict trace included.
    """
    if not opinions:
        raise ValueError("nothing to fuse")
    k = opinions[0][1].k
    for name, op in opinions:
        if op.k != k:
            raise ValueError(f"class count mismatch: {name} has {op.k}, expected {k}")
    informative = [(name, op) for name, op in opinions if not op.is_vacuous]
    trace: list[float] = []

    def step(acc: Opinion, nxt: Opinion) -> Opinion:
        fused, c = ds_combine(acc, nxt)
        trace.append(c)
        return fused

    if informative:
        fused = reduce(step, (op for _, op in informative[1:]), informative[0][1])
    else:
        fused = Opinion.vacuous(k)
    dirichlet, probs = opinion_to_probabilities(fused)
    probs.setflags(write=False)
    return FusionResult(fused, probs, dirichlet, informative, trace)


def ordered_modalities(names: Iterable[str], order: Sequence[str] = DEFAULT_ORDER) -> list[str]:
    """Modalities in fold order: those named in ``order`` first, the rest alphabetically."""
    names = set(names)
    head = [n for n in order if n in names]
    return head + sorted(names.difference(head))


def modality_opinions(logits: Mapping[str, object], mode: str = "advanced") -> dict[str, Opinion]:
    if mode == "advanced":
        evidence = advanced_evidence(logits)
    elif mode == "basic":
        evidence = basic_evidence(logits)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return {name: opinion_from_evidence(e) for name, e in evidence.items()}


def fuse_record(record, mode: str = "advanced", order: Sequence[str] = DEFAULT_ORDER) -> FusionResult:
    """Evidence, per-modality opinions and sequential fusion for one record.

    ``record`` is a ``LogitRecord`` or a plain modality -> logits mapping.
    """
    logits = getattr(record, "logits", record)
    opinions = modality_opinions(logits, mode)
    return fuse_sequence([(name, opinions[name]) for name in ordered_modalities(opinions, order)])
