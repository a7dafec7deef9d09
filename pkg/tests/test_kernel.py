import numpy as np
import pytest

from _gen import random_logit_record
from evfusion import _backend, _kernel_py
from evfusion.batch import fuse_arrays, fuse_records, pack
from evfusion.datasetio import LogitRecord
from evfusion.fusion import fuse_record

try:
    from evfusion import _kernel
except ImportError:  # extension not built
    _kernel = None

needs_ext = pytest.mark.skipif(_kernel is None, reason="compiled kernel not built")
BACKENDS = [pytest.param(_kernel_py, id="python"), pytest.param(_kernel, id="compiled", marks=needs_ext)]


def _random_batch(seed, n=3000, m=3, k=7):
    rng = np.random.default_rng(seed)
    logits = rng.normal(rng.uniform(-3, 3, (n, m, 1)), rng.uniform(0.1, 5, (n, m, 1)), (n, m, k))
    present = (rng.random((n, m)) < 0.75).astype(np.uint8)
    present[np.arange(n), rng.integers(0, m, n)] = 1
    return logits, present


@needs_ext
@pytest.mark.parametrize("advanced", [True, False])
@pytest.mark.parametrize("shape", [(3000, 3, 7), (500, 1, 2), (500, 5, 10)])
def test_backends_bit_identical(advanced, shape):
    logits, present = _random_batch(1, *shape)
    a = _kernel.fuse_batch(logits, present, advanced)
    b = _kernel_py.fuse_batch(logits, present, advanced)
    for key in a:
        assert np.array_equal(a[key], b[key], equal_nan=True), key


@pytest.mark.parametrize("backend", BACKENDS)
def test_worked_example(backend):
    logits = np.array([[[2.0, 0.5, -1.0], [1.0, 0.0, 1.0], [0.0, 0.0, 0.0]]])
    out = backend.fuse_batch(logits, np.array([[1, 1, 0]], np.uint8), True)
    np.testing.assert_allclose(out["beliefs"][0], [7 / 15, 1 / 5, 2 / 15], atol=1e-15)
    np.testing.assert_allclose(out["probabilities"][0], [8 / 15, 4 / 15, 3 / 15], atol=1e-15)
    assert out["uncertainty"][0] == pytest.approx(0.2, abs=1e-15)
    assert out["n_steps"][0] == 1 and out["conflicts"][0, 0] == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("mode", ["basic", "advanced"])
def test_matches_library_path(mode):
    rng = np.random.default_rng(5)
    records = [LogitRecord(f"r{i}", random_logit_record(rng, 6)) for i in range(400)]
    batch = fuse_records(records, 6, mode)
    for i, rec in enumerate(records):
        ref = fuse_record(rec, mode)
        assert np.max(np.abs(batch.probabilities[i] - ref.probabilities)) <= 1e-12
        assert abs(batch.uncertainty[i] - ref.fused.uncertainty) <= 1e-12
        np.testing.assert_allclose(batch.conflict_trace(i), ref.conflict_trace, rtol=0, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_absent_equals_vacuous_row(backend):
    # a modality whose evidence is all zero is vacuous and must not change anything
    logits, present = _random_batch(2, n=500)
    out = backend.fuse_batch(logits, present, False)
    padded = logits.copy()
    padded[present == 0] = -1.0  # basic mode clips these to zero evidence
    out2 = backend.fuse_batch(padded, np.ones_like(present), False)
    for key in ("beliefs", "uncertainty", "probabilities", "n_steps"):
        assert np.array_equal(out[key], out2[key]), key


@pytest.mark.parametrize("backend", BACKENDS)
def test_status_codes(backend):
    logits = np.zeros((3, 2, 2))
    logits[1] = [[40.0, 0.0], [0.0, 40.0]]  # finite but nearly dogmatic, opposite classes
    logits[2] = [[1e15, 0.0], [0.0, 0.0]]
    present = np.array([[0, 0], [1, 1], [1, 0]], np.uint8)
    out = backend.fuse_batch(logits, present, True)
    assert out["status"][0] == _backend.NO_MODALITIES
    assert out["status"][1] == _backend.OK
    assert out["status"][2] == _backend.DEGENERATE_CERTAINTY
    assert np.isnan(out["probabilities"][2]).all()


@pytest.mark.parametrize("backend", BACKENDS)
def test_total_conflict_status(backend):
    logits = np.array([[[1e14, 0.0], [0.0, 1e14]]])
    out = backend.fuse_batch(logits, np.ones((1, 2), np.uint8), True)
    assert out["status"][0] == _backend.TOTAL_CONFLICT


def test_workers_do_not_change_results():
    logits, present = _random_batch(3, n=2001)
    one = fuse_arrays(logits, present, "advanced", workers=1)
    many = fuse_arrays(logits, present, "advanced", workers=3)
    for key in one:
        assert np.array_equal(one[key], many[key], equal_nan=True)


def test_pack_orders_modalities():
    recs = [LogitRecord("a", {"text": np.ones(3), "eeg": np.zeros(3)}), LogitRecord("b", {"audio": np.ones(3)})]
    ids, mods, logits, present = pack(recs, 3)
    assert ids == ["a", "b"] and mods == ["audio", "text", "eeg"]
    assert present.tolist() == [[0, 1, 1], [1, 0, 0]]


def test_backend_selected():
    assert _backend.BACKEND in ("compiled", "python")
    if _kernel is not None:
        assert _backend.BACKEND == "compiled" or _backend._kernel is None
