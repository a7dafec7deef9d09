import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evfusion.datasetio import LabelTaxonomy
from evfusion.metrics import (
    Prediction,
    accuracies_from_confusion,
    accuracy_neutral_tolerant,
    accuracy_standard,
    build_report,
    confusion,
    fallback_rate,
    weighted_error,
)

TAX = LabelTaxonomy()
K = TAX.k


def pred(rid, cls, conf=0.9):
    p = np.full(K, (1 - conf) / (K - 1))
    p[TAX.index(cls)] = conf
    return Prediction.from_probabilities(rid, p, 0.1)


def fixture(pairs):
    preds = [pred(f"r{i}", p) for i, (p, _) in enumerate(pairs)]
    truths = {f"r{i}": t for i, (_, t) in enumerate(pairs)}
    return preds, truths


THREE_OF_FOUR = [("joy", "joy"), ("anger", "anger"), ("fear", "fear"), ("joy", "sadness")]
TWO_PLUS_FALLBACK = [("joy", "joy"), ("anger", "anger"), ("neutral", "fear"), ("joy", "sadness")]


def test_three_of_four():
    preds, truths = fixture(THREE_OF_FOUR)
    assert accuracy_standard(preds, truths, TAX) == 0.75
    assert accuracy_neutral_tolerant(preds, truths, TAX) == 0.75


def test_neutral_fallback_fixture():
    preds, truths = fixture(TWO_PLUS_FALLBACK)
    assert accuracy_standard(preds, truths, TAX) == 0.5
    assert accuracy_neutral_tolerant(preds, truths, TAX) == 0.75


@pytest.mark.parametrize(
    "pairs, std, tol",
    [
        ([("anger", "anger"), ("joy", "joy")], 1.0, 1.0),
        ([("joy", "anger"), ("fear", "joy")], 0.0, 0.0),
        ([("neutral", "anger")], 0.0, 1.0),
        ([("joy", "anger")], 0.0, 0.0),
        ([("neutral", "neutral")], 1.0, 1.0),
    ],
)
def test_small_cases(pairs, std, tol):
    preds, truths = fixture(pairs)
    assert accuracy_standard(preds, truths, TAX) == std
    assert accuracy_neutral_tolerant(preds, truths, TAX) == tol


def test_aliases_resolve():
    preds, truths = fixture([("joy", "Happy "), ("sadness", "sad")])
    assert accuracy_standard(preds, truths, TAX) == 1.0


def test_contempt_row():
    preds, truths = fixture([("neutral", "contempt")])
    cm = confusion(preds, truths, TAX)
    assert cm.row_labels == [*TAX.classes, "contempt"]
    assert cm.col_labels == list(TAX.classes)
    assert cm.row("contempt").tolist() == [0, 0, 0, 0, 1, 0, 0]
    assert cm.counts[:K].sum() == 0
    assert fallback_rate(preds, truths, TAX, "contempt") == 1.0


def test_unseen_rows_sorted_and_counted_wrong():
    preds, truths = fixture([("joy", "contempt"), ("neutral", "calm"), ("joy", "joy"), ("joy", "boredom")])
    cm = confusion(preds, truths, TAX)
    assert cm.row_labels[K:] == ["boredom", "calm", "contempt"]
    assert accuracy_standard(preds, truths, TAX) == 0.25
    assert accuracy_neutral_tolerant(preds, truths, TAX) == 0.5
    assert accuracy_standard(preds, truths, TAX, exclude_unseen=True) == 1.0
    assert accuracies_from_confusion(cm, TAX, exclude_unseen=True) == (1.0, 1.0)


def test_zero_records():
    cm = confusion([], {}, TAX)
    assert cm.counts.shape == (K, K) and not cm.counts.any()
    assert accuracy_standard([], {}, TAX) == 0.0


def test_order_independent():
    preds, truths = fixture(TWO_PLUS_FALLBACK + [("neutral", "contempt")])
    a = confusion(preds, truths, TAX)
    b = confusion(preds[::-1], truths, TAX)
    assert a.row_labels == b.row_labels and np.array_equal(a.counts, b.counts)


def test_id_mismatch():
    preds, truths = fixture(THREE_OF_FOUR)
    truths["extra"] = "joy"
    for fn in (accuracy_standard, accuracy_neutral_tolerant, confusion):
        with pytest.raises(ValueError, match="record id mismatch"):
            fn(preds, truths, TAX)
    with pytest.raises(ValueError, match="record id mismatch"):
        accuracy_standard(preds + preds[:1], dict(list(truths.items())[:4]), TAX)


def test_label_absent():
    preds, truths = fixture(THREE_OF_FOUR)
    with pytest.raises(ValueError, match="label absent"):
        fallback_rate(preds, truths, TAX, "contempt")


def test_prediction_tie_breaks_low():
    p = Prediction.from_probabilities("x", [0.3, 0.3, 0.1, 0.1, 0.1, 0.05, 0.05], 0.2)
    assert p.predicted_index == 0


def test_weighted_error():
    preds = [pred("a", "joy", 0.9), pred("b", "anger", 0.6), pred("c", "fear", 0.5)]
    truths = {"a": "joy", "b": "fear", "c": "contempt"}
    assert weighted_error(preds, truths, TAX) == pytest.approx((0.6 + 0.5) / 3)
    assert weighted_error(preds, truths, TAX, exclude_unseen=True) == pytest.approx(0.6 / 2)


def test_report_fields():
    preds, truths = fixture(TWO_PLUS_FALLBACK + [("neutral", "contempt")])
    rep = build_report(preds, truths, TAX, "basic", [0.1, 0.3])
    assert rep.n_records == 5
    assert rep.accuracy_standard == 0.4 and rep.accuracy_neutral_tolerant == 0.8
    assert rep.per_step_mean_conflict == pytest.approx(0.2)
    assert rep.fallback_rates == {"contempt": 1.0}
    assert rep.confusion.sum(axis=1).tolist() == [1, 0, 1, 1, 0, 1, 0, 1]


labels = st.sampled_from([*TAX.classes, "contempt", "calm", "happy", "boredom"])


@given(st.lists(st.tuples(st.sampled_from(TAX.classes), labels), max_size=40), st.booleans())
def test_tolerant_dominates_and_matches_matrix(pairs, exclude):
    preds, truths = fixture(pairs)
    std = accuracy_standard(preds, truths, TAX, exclude)
    tol = accuracy_neutral_tolerant(preds, truths, TAX, exclude)
    assert tol >= std
    cm = confusion(preds, truths, TAX)
    assert accuracies_from_confusion(cm, TAX, exclude) == (std, tol)
    assert int(cm.counts.sum()) == len(pairs)
