import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evfusion.evidence import (
    DirichletParams,
    EvidenceError,
    Opinion,
    advanced_evidence,
    basic_evidence,
    dirichlet_to_opinion,
    evidence_to_dirichlet,
    opinion_from_evidence,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def logit_records(k=st.integers(2, 10)):
    @st.composite
    def build(draw):
        kk = draw(k)
        names = draw(st.lists(st.sampled_from(["audio", "video", "text", "eeg"]), min_size=1, max_size=4, unique=True))
        return {n: draw(arrays(np.float64, kk, elements=finite)) for n in names}
    return build()


class TestAdvancedEvidence:
    def test_worked_example(self):
        out = advanced_evidence({"audio": [2.0, 0.5, -1.0], "video": [1.0, 0.0, 1.0]})
        np.testing.assert_array_equal(out["audio"], [3.0, 1.5, 0.0])
        np.testing.assert_array_equal(out["video"], [2.0, 1.0, 2.0])

    def test_zero_logits(self):
        np.testing.assert_array_equal(advanced_evidence({"audio": [0, 0, 0]})["audio"], [0, 0, 0])

    @pytest.mark.parametrize("c", [-1e6, -3.25, 0.0, 17.0, 1e6])
    def test_translation(self, c):
        out = advanced_evidence({"audio": [c + 2, c, c + 1]})
        np.testing.assert_array_equal(out["audio"], [2, 0, 1])

    @pytest.mark.parametrize(
        "record, message",
        [
            ({}, "no modalities"),
            ({"audio": [1, 2, 3], "video": [1, 2]}, "dimension mismatch"),
            ({"audio": [1, math.nan, 3]}, "non-finite logit"),
            ({"audio": [1, math.inf, 3]}, "non-finite logit"),
            ({"audio": [1.0]}, "dimension mismatch"),
        ],
    )
    def test_errors(self, record, message):
        for fn in (advanced_evidence, basic_evidence):
            with pytest.raises(EvidenceError, match=message):
                fn(record)

    @given(logit_records(), st.floats(-1e3, 1e3, allow_nan=False))
    def test_shift_invariance(self, record, c):
        # exact in real arithmetic; rounding of v + c stays < 5e-13 for |v|, |c| <= 1e3
        base = advanced_evidence(record)
        shifted = advanced_evidence({m: v + c for m, v in record.items()})
        for m in record:
            np.testing.assert_allclose(shifted[m], base[m], rtol=0, atol=1e-12)

    @given(logit_records())
    def test_has_exact_zero_and_nonnegative(self, record):
        out = advanced_evidence(record)
        flat = np.concatenate(list(out.values()))
        assert flat.min() == 0.0
        assert np.all(flat >= 0.0)


class TestBasicEvidence:
    def test_clip(self):
        np.testing.assert_array_equal(basic_evidence({"audio": [2.0, 0.5, -1.0]})["audio"], [2.0, 0.5, 0.0])

    def test_all_negative(self):
        np.testing.assert_array_equal(basic_evidence({"audio": [-5, -5, -5]})["audio"], [0, 0, 0])

    def test_no_coupling(self):
        out = basic_evidence({"audio": [1, 2, 3], "video": [10, 20, 30]})
        np.testing.assert_array_equal(out["audio"], [1, 2, 3])
        np.testing.assert_array_equal(out["video"], [10, 20, 30])

    @given(logit_records())
    def test_per_modality(self, record):
        joint = basic_evidence(record)
        for m, v in record.items():
            np.testing.assert_array_equal(basic_evidence({m: v})[m], joint[m])
            assert np.all(joint[m] >= 0)


class TestDirichletAndOpinion:
    @pytest.mark.parametrize(
        "e, alpha, s",
        [([3.0, 1.5, 0.0], [4.0, 2.5, 1.0], 7.5), ([0, 0, 0], [1, 1, 1], 3), ([2, 2, 2], [3, 3, 3], 9)],
    )
    def test_evidence_to_dirichlet(self, e, alpha, s):
        d = evidence_to_dirichlet(e)
        np.testing.assert_array_equal(d.alpha, alpha)
        assert d.strength == s

    @pytest.mark.parametrize(
        "alpha, s, b, u",
        [
            ([4.0, 2.5, 1.0], 7.5, [0.4, 0.2, 0.0], 0.4),
            ([1, 1, 1], 3, [0, 0, 0], 1.0),
            ([3, 3, 3], 9, [2 / 9, 2 / 9, 2 / 9], 1 / 3),
        ],
    )
    def test_dirichlet_to_opinion(self, alpha, s, b, u):
        op = dirichlet_to_opinion(DirichletParams(alpha, s))
        np.testing.assert_allclose(op.beliefs, b, rtol=0, atol=1e-15)
        assert op.uncertainty == pytest.approx(u, abs=1e-15)

    def test_vacuous(self):
        op = opinion_from_evidence([0.0, 0.0, 0.0, 0.0])
        assert op.is_vacuous and op.same_as(Opinion.vacuous(4))

    def test_rejects_negative_evidence(self):
        with pytest.raises(EvidenceError):
            evidence_to_dirichlet([1.0, -0.1])

    @given(arrays(np.float64, st.integers(2, 12), elements=st.floats(0, 1e6)))
    def test_opinion_invariants(self, e):
        d = evidence_to_dirichlet(e)
        assert np.all(d.alpha >= 1.0)
        assert abs(d.strength - d.alpha.sum()) <= 1e-12 * d.strength
        op = dirichlet_to_opinion(d)
        assert abs(op.beliefs.sum() + op.uncertainty - 1.0) <= 1e-9
        assert np.all((op.beliefs >= 0) & (op.beliefs <= 1))
        assert 0 < op.uncertainty <= 1

    @given(arrays(np.float64, st.integers(2, 12), elements=st.floats(0, 1e6)))
    def test_round_trip(self, e):
        # 1 ulp of 1e6 is ~1.2e-10, so the bound is relative to the magnitude
        d = evidence_to_dirichlet(e)
        op = dirichlet_to_opinion(d)
        recovered = op.beliefs * d.strength
        assert np.all(np.abs(recovered - e) <= 1e-12 * np.maximum(1.0, e))

    @given(
        arrays(np.float64, st.integers(2, 8), elements=st.floats(0, 1e3)),
        st.integers(0, 7),
        st.floats(1e-3, 1e3),
    )
    def test_monotone(self, e, idx, delta):
        idx %= e.size
        bumped = e.copy()
        bumped[idx] += delta
        before, after = opinion_from_evidence(e), opinion_from_evidence(bumped)
        assert after.beliefs[idx] > before.beliefs[idx]
        assert after.uncertainty < before.uncertainty


class TestOpinionValidation:
    @pytest.mark.parametrize(
        "b, u",
        [([0.5, 0.5], 0.0), ([0.6, 0.5], 0.1), ([-0.1, 0.6], 0.5), ([0.5, 0.4], 0.2), ([1.0], 0.0)],
    )
    def test_invalid(self, b, u):
        with pytest.raises(ValueError):
            Opinion(b, u)

    def test_immutable(self):
        op = Opinion([0.2, 0.3], 0.5)
        with pytest.raises(ValueError):
            op.beliefs[0] = 0.9
