"""Record-parallel fusion through the batch kernel."""

from __future__ import annotations

import json
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .evidence import DEFAULT_ORDER
from .fusion import MODES, ordered_modalities

_KEYS = ("beliefs", "uncertainty", "strength", "alpha", "probabilities", "conflicts", "n_steps", "status")


@dataclass(eq=False)
class BatchResult:
    ids: list[str]
    modalities: list[str]
    beliefs: np.ndarray
    uncertainty: np.ndarray
    strength: np.ndarray
    alpha: np.ndarray
    probabilities: np.ndarray
    conflicts: np.ndarray
    n_steps: np.ndarray
    status: np.ndarray

    def __len__(self):
        return len(self.ids)

    def conflict_trace(self, i: int) -> list[float]:
        return self.conflicts[i, : self.n_steps[i]].tolist()

    def error(self, i: int) -> str | None:
        return _backend.STATUS_MESSAGES.get(int(self.status[i]))

    def all_conflicts(self) -> np.ndarray:
        """Every recorded combination-step conflict, flattened."""
        ok = self.status == _backend.OK
        mask = np.arange(self.conflicts.shape[1]) < self.n_steps[:, None]
        return self.conflicts[mask & ok[:, None]]


def pack(records, k: int, order: Sequence[str] = DEFAULT_ORDER):
    """Stack records into ``(N, M, K)`` logits and an ``(N, M)`` presence mask."""
    names = set()
    for rec in records:
        names.update(rec.logits)
    modalities = ordered_modalities(names, order)
    col = {m: j for j, m in enumerate(modalities)}
    n, m = len(records), len(modalities)
    logits = np.zeros((n, m, k), dtype=np.float64)
    present = np.zeros((n, m), dtype=np.uint8)
    for i, rec in enumerate(records):
        for name, vec in rec.logits.items():
            j = col[name]
            logits[i, j] = vec
            present[i, j] = 1
    return [r.id for r in records], modalities, logits, present


def _run(args):
    logits, present, advanced = args
    return _backend.fuse_batch(logits, present, advanced)


def fuse_arrays(logits: np.ndarray, present: np.ndarray, mode: str = "advanced", workers: int = 1) -> dict:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    advanced = mode == "advanced"
    n = logits.shape[0]
    if workers <= 1 or n < 2:
        return _backend.fuse_batch(logits, present, advanced)
    bounds = np.linspace(0, n, min(workers, n) + 1).astype(int)
    chunks = [(logits[a:b], present[a:b], advanced) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run, chunks))
    return {key: np.concatenate([p[key] for p in parts]) for key in _KEYS}


def fuse_records(records, k: int, mode: str = "advanced", order: Sequence[str] = DEFAULT_ORDER,
                 workers: int = 1) -> BatchResult:
    ids, modalities, logits, present = pack(records, k, order)
    out = fuse_arrays(logits, present, mode, workers)
    return BatchResult(ids, modalities, **out)


def format_lines(result: BatchResult, classes: Sequence[str]) -> list[str]:
    """One JSON line per record, sorted by id."""
    names = [json.dumps(c) for c in classes]
    probs = result.probabilities.tolist()
    unc = result.uncertainty.tolist()
    pred = np.argmax(result.probabilities, axis=1).tolist() if len(result) else []
    lines = []
    for i in sorted(range(len(result)), key=result.ids.__getitem__):
        rid = json.dumps(result.ids[i])
        err = result.error(i)
        if err is not None:
            lines.append(f'{{"id":{rid},"error":{json.dumps(err)}}}')
            continue
        p = ",".join(map(repr, probs[i]))
        trace = ",".join(map(repr, result.conflict_trace(i)))
        lines.append(
            f'{{"id":{rid},"probabilities":[{p}],"predicted":{names[pred[i]]},'
            f'"uncertainty":{unc[i]!r},"conflict_trace":[{trace}]}}'
        )
    return lines
