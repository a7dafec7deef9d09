"""Synthetic class-conditional logit records for tests and demos."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasetio import LabelTaxonomy, LogitRecord
from .evidence import DEFAULT_ORDER

KNOBS = ("signal", "noise", "bias", "dropout", "disagree", "neutral_bias")
# used for any modality a knob table does not mention
_FALLBACK = {"signal": 2.0, "noise": 1.0, "bias": 0.0, "dropout": 0.0, "disagree": 0.0, "neutral_bias": 0.0}


@dataclass
class SimulationConfig:
    """Knobs for the generator. Per-modality maps are keyed by modality name.

    For each record a truth class is drawn uniformly. Each modality emits
    ``bias + noise * N(0, 1)`` logits and adds ``signal`` to one target
    class: the truth, or with probability ``neutral_bias`` the neutral
    class, or with probability ``disagree`` a uniformly chosen wrong class.
    A share ``unseen[label]`` of records gets an out-of-taxonomy truth
    label and no signal in any modality. Every random draw happens whatever
    the knob values, so changing one knob never reshuffles the others.
    """

    n: int = 100
    seed: int = 0
    modalities: tuple[str, ...] = DEFAULT_ORDER
    signal: dict[str, float] = field(default_factory=lambda: {"audio": 3.0, "video": 2.5, "text": 2.0})
    noise: dict[str, float] = field(default_factory=dict)
    bias: dict[str, float] = field(default_factory=dict)
    dropout: dict[str, float] = field(default_factory=dict)
    disagree: dict[str, float] = field(default_factory=dict)
    neutral_bias: dict[str, float] = field(default_factory=dict)
    unseen: dict[str, float] = field(default_factory=dict)
    decimals: int = 6

    def get(self, knob: str, modality: str) -> float:
        return float(getattr(self, knob).get(modality, _FALLBACK[knob]))

    def validate(self, taxonomy: LabelTaxonomy):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not self.modalities or len(set(self.modalities)) != len(self.modalities):
            raise ValueError("modalities must be a non-empty list of unique names")
        for knob in KNOBS:
            unknown = set(getattr(self, knob)) - set(self.modalities)
            if unknown:
                raise ValueError(f"{knob}: unknown modality {sorted(unknown)}")
        for m in self.modalities:
            vals = {k: self.get(k, m) for k in KNOBS}
            if not all(np.isfinite(v) for v in vals.values()):
                raise ValueError(f"{m}: parameters must be finite")
            if vals["noise"] < 0:
                raise ValueError(f"{m}: noise must be >= 0")
            for k in ("dropout", "disagree", "neutral_bias"):
                if not 0.0 <= vals[k] <= 1.0:
                    raise ValueError(f"{m}: {k} must lie in [0, 1]")
            if vals["disagree"] + vals["neutral_bias"] > 1.0:
                raise ValueError(f"{m}: disagree + neutral_bias must not exceed 1")
        if all(self.get("dropout", m) >= 1.0 for m in self.modalities):
            raise ValueError("every modality is always dropped")
        for label, rate in self.unseen.items():
            if taxonomy.resolve(label)[0] is not None:
                raise ValueError(f"unseen label {label!r} is a taxonomy class")
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"unseen rate for {label!r} must lie in [0, 1]")
        if sum(self.unseen.values()) > 1.0:
            raise ValueError("unseen rates sum to more than 1")


def simulate_records(config: SimulationConfig, taxonomy: LabelTaxonomy | None = None) -> list[LogitRecord]:
    taxonomy = taxonomy or LabelTaxonomy()
    config.validate(taxonomy)
    rng = np.random.default_rng(config.seed)
    n, k = config.n, taxonomy.k

    truth = rng.integers(0, k, n)
    pick = rng.random(n)
    unseen_of = np.full(n, -1)
    unseen_labels = sorted(config.unseen)
    edge = 0.0
    for j, label in enumerate(unseen_labels):
        lo, edge = edge, edge + config.unseen[label]
        unseen_of[(pick >= lo) & (pick < edge)] = j
    has_signal = unseen_of < 0

    logits = {}
    present = {}
    for m in config.modalities:
        base = rng.normal(0.0, 1.0, (n, k)) * config.get("noise", m) + config.get("bias", m)
        route = rng.random(n)
        keep = rng.random(n)
        shift = rng.integers(1, k, n) if k > 1 else np.zeros(n, dtype=np.int64)
        nb, dis = config.get("neutral_bias", m), config.get("disagree", m)
        target = np.where(route < nb, taxonomy.neutral_index,
                          np.where(route < nb + dis, (truth + shift) % k, truth))
        rows = np.flatnonzero(has_signal)
        base[rows, target[rows]] += config.get("signal", m)
        logits[m] = np.round(base, config.decimals)
        present[m] = keep >= config.get("dropout", m)

    # a record with every modality dropped gets back the least-dropped one
    mask = np.column_stack([present[m] for m in config.modalities])
    fallback = min(config.modalities, key=lambda m: (config.get("dropout", m), config.modalities.index(m)))
    present[fallback] = present[fallback] | ~mask.any(axis=1)

    width = max(6, len(str(max(n - 1, 0))))
    meta = {"generator": "evfusion.simulate", "seed": str(config.seed)}
    out = []
    for i in range(n):
        label = taxonomy.classes[truth[i]] if has_signal[i] else unseen_labels[unseen_of[i]]
        vecs = {m: logits[m][i] for m in config.modalities if present[m][i]}
        for v in vecs.values():
            v.setflags(write=False)
        out.append(LogitRecord(f"sim-{i:0{width}d}", vecs, label, dict(meta)))
    return out
