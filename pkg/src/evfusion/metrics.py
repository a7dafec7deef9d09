"""Standard and neutral-tolerant accuracy, confusion matrices, fallback rates."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .datasetio import EvalReport, LabelTaxonomy


@dataclass(frozen=True, eq=False)
class Prediction:
    record_id: str
    predicted_index: int
    probabilities: np.ndarray
    uncertainty: float

    @classmethod
    def from_probabilities(cls, record_id: str, probabilities, uncertainty: float) -> "Prediction":
        p = np.asarray(probabilities, dtype=np.float64)
        return cls(record_id, int(np.argmax(p)), p, float(uncertainty))

    @classmethod
    def from_result(cls, record_id: str, result) -> "Prediction":
        return cls.from_probabilities(record_id, result.probabilities, result.fused.uncertainty)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    row_labels: list[str]
    col_labels: list[str]
    counts: np.ndarray

    def row(self, label: str) -> np.ndarray:
        return self.counts[self.row_labels.index(label)]


def _aligned(preds: Sequence[Prediction], truths: Mapping[str, str], taxonomy: LabelTaxonomy):
    """Yield ``(prediction, truth_index_or_None, truth_name)`` in prediction order."""
    ids = [p.record_id for p in preds]
    if len(set(ids)) != len(ids) or set(ids) != set(truths):
        raise ValueError("record id mismatch between predictions and truths")
    for p in preds:
        if not 0 <= p.predicted_index < taxonomy.k:
            raise ValueError(f"{p.record_id}: predicted index {p.predicted_index} outside the taxonomy")
        idx, name = taxonomy.resolve(truths[p.record_id])
        yield p, idx, name


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def accuracy_standard(preds, truths, taxonomy: LabelTaxonomy, exclude_unseen: bool = False) -> float:
    """Fraction of records predicted as their truth class.

    Records whose truth is outside the prediction space count as wrong,
    unless ``exclude_unseen`` drops them from the denominator.
    """
    hit = total = 0
    for p, idx, _ in _aligned(preds, truths, taxonomy):
        if idx is None and exclude_unseen:
            continue
        total += 1
        hit += p.predicted_index == idx
    return _ratio(hit, total)


def accuracy_neutral_tolerant(preds, truths, taxonomy: LabelTaxonomy, exclude_unseen: bool = False) -> float:
    """Like ``accuracy_standard`` but a neutral prediction is always accepted."""
    hit = total = 0
    for p, idx, _ in _aligned(preds, truths, taxonomy):
        if idx is None and exclude_unseen:
            continue
        total += 1
        hit += p.predicted_index == idx or p.predicted_index == taxonomy.neutral_index
    return _ratio(hit, total)


def confusion(preds, truths, taxonomy: LabelTaxonomy) -> ConfusionMatrix:
    cells = list(_aligned(preds, truths, taxonomy))
    unseen = sorted({name for _, idx, name in cells if idx is None})
    rows = list(taxonomy.classes) + unseen
    row_of = {name: i for i, name in enumerate(rows)}
    counts = np.zeros((len(rows), taxonomy.k), dtype=np.int64)
    for p, idx, name in cells:
        counts[idx if idx is not None else row_of[name], p.predicted_index] += 1
    return ConfusionMatrix(rows, list(taxonomy.classes), counts)


def accuracies_from_confusion(cm: ConfusionMatrix, taxonomy: LabelTaxonomy, exclude_unseen: bool = False):
    """Recompute ``(standard, neutral_tolerant)`` from matrix cells alone."""
    k = taxonomy.k
    seen = cm.counts[:k]
    exact = int(np.trace(seen))
    neutral_col = cm.counts[:, taxonomy.neutral_index]
    # neutral predictions off the diagonal; the neutral row's own cell is already in the trace
    tolerant = exact + int(neutral_col[:k].sum() - seen[taxonomy.neutral_index, taxonomy.neutral_index])
    total = int(seen.sum())
    if not exclude_unseen:
        tolerant += int(neutral_col[k:].sum())
        total += int(cm.counts[k:].sum())
    return _ratio(exact, total), _ratio(tolerant, total)


def fallback_rate(preds, truths, taxonomy: LabelTaxonomy, unseen_label: str) -> float:
    """Share of records with truth ``unseen_label`` that were predicted neutral."""
    target = taxonomy.resolve(unseen_label)[1]
    hits = total = 0
    for p, _, name in _aligned(preds, truths, taxonomy):
        if name == target:
            total += 1
            hits += p.predicted_index == taxonomy.neutral_index
    if not total:
        raise ValueError(f"label absent: no records with truth {unseen_label!r}")
    return hits / total


def weighted_error(preds, truths, taxonomy: LabelTaxonomy, exclude_unseen: bool = False) -> float:
    """Mean probability committed to a wrong prediction.

    Each misclassified record contributes the fused probability of its
    predicted class; correct records contribute 0. Confident mistakes weigh
    most, hedged mistakes least.
    """
    acc = 0.0
    total = 0
    for p, idx, _ in _aligned(preds, truths, taxonomy):
        if idx is None and exclude_unseen:
            continue
        total += 1
        if p.predicted_index != idx:
            acc += float(p.probabilities[p.predicted_index])
    return acc / total if total else 0.0


def build_report(
    preds: Sequence[Prediction],
    truths: Mapping[str, str],
    taxonomy: LabelTaxonomy,
    mode: str = "advanced",
    conflicts: Sequence[float] = (),
    exclude_unseen: bool = False,
) -> EvalReport:
    """Assemble an ``EvalReport``; accuracies are cross-checked against the matrix."""
    cm = confusion(preds, truths, taxonomy)
    std = accuracy_standard(preds, truths, taxonomy, exclude_unseen)
    tol = accuracy_neutral_tolerant(preds, truths, taxonomy, exclude_unseen)
    if (std, tol) != accuracies_from_confusion(cm, taxonomy, exclude_unseen):
        raise RuntimeError("accuracy disagrees with confusion matrix")
    unseen = cm.row_labels[taxonomy.k:]
    conflicts = list(conflicts)
    return EvalReport(
        mode=mode,
        classes=list(taxonomy.classes),
        row_labels=cm.row_labels,
        confusion=cm.counts,
        accuracy_standard=std,
        accuracy_neutral_tolerant=tol,
        n_records=len(preds),
        per_step_mean_conflict=float(np.mean(conflicts)) if conflicts else 0.0,
        weighted_error=weighted_error(preds, truths, taxonomy, exclude_unseen),
        fallback_rates={u: fallback_rate(preds, truths, taxonomy, u) for u in unseen},
        exclude_unseen=exclude_unseen,
    )
