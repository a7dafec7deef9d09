"""Label taxonomy, logit record files and evaluation report serialization.

Record files are JSON Lines, one object per record::

    {"id": "u1", "logits": {"audio": [..K numbers..], "text": [...]},
     "label": "happy", "metadata": {"dataset": "demo"}}

See docs/formats.md for the exact grammar.
"""

from __future__ import annotations

import configparser
import io
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import IO, NamedTuple

import numpy as np

from .evidence import DEFAULT_ORDER
from .fusion import ordered_modalities

UNSEEN = "unseen"

DEFAULT_CLASSES = ("anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise")
DEFAULT_ALIASES = {
    "happy": "joy",
    "happiness": "joy",
    "sad": "sadness",
    "angry": "anger",
    "calm": UNSEEN,
    "contempt": UNSEEN,
    "fearful": "fear",
    "surprised": "surprise",
}

RECORD_FIELDS = frozenset({"id", "logits", "label", "metadata"})


class RecordError(ValueError):
    """A record line failed validation; carries the 1-based line number."""

    def __init__(self, line: int, message: str, record_id: str | None = None):
        self.line = line
        self.message = message
        self.record_id = record_id
        super().__init__(f"line {line}: {message}")


def normalize_label(label: str) -> str:
    return label.strip().lower()


@dataclass(frozen=True)
class LabelTaxonomy:
    classes: tuple[str, ...] = DEFAULT_CLASSES
    neutral_index: int = DEFAULT_CLASSES.index("neutral")
    aliases: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    def __post_init__(self):
        classes = tuple(normalize_label(c) for c in self.classes)
        if len(classes) < 2:
            raise ValueError("taxonomy needs at least 2 classes")
        if any(not c for c in classes) or len(set(classes)) != len(classes):
            raise ValueError("class names must be unique and non-empty")
        if UNSEEN in classes:
            raise ValueError(f"{UNSEEN!r} is reserved and cannot be a class name")
        if not 0 <= self.neutral_index < len(classes):
            raise ValueError(f"neutral_index {self.neutral_index} out of range")
        aliases = {}
        for key, target in self.aliases.items():
            key, target = normalize_label(key), normalize_label(target)
            if key in classes:
                raise ValueError(f"alias {key!r} shadows a class name")
            if target != UNSEEN and target not in classes:
                raise ValueError(f"alias {key!r} points at unknown class {target!r}")
            aliases[key] = target
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "aliases", dict(sorted(aliases.items())))
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(classes)})

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def neutral(self) -> str:
        return self.classes[self.neutral_index]

    def resolve(self, label: str) -> tuple[int | None, str]:
        """Map an external label to ``(class_index, canonical_name)``.

        Labels outside the prediction space come back as ``(None, name)``;
        anything not a class and not aliased counts as unseen.
        """
        name = normalize_label(label)
        name = self.aliases.get(name, name)
        if name == UNSEEN:
            return None, normalize_label(label)
        idx = self._index.get(name)
        return idx, name

    def index(self, name: str) -> int:
        return self._index[normalize_label(name)]


def load_taxonomy(source: str | IO[str], inherit_aliases: bool | None = None) -> LabelTaxonomy:
    """Read a taxonomy from INI-style key-value text.

    ::

        [taxonomy]
        classes = anger, disgust, fear, joy, neutral, sadness, surprise
        neutral = neutral
        inherit_aliases = yes

        [aliases]
        happy = joy
        contempt = unseen

    File aliases are merged over the defaults unless ``inherit_aliases = no``.
    Default aliases that target a class the file does not declare are dropped.
    """
    parser = configparser.ConfigParser(interpolation=None)
    if isinstance(source, str):
        parser.read_string(source)
    else:
        parser.read_file(source)
    sect = parser["taxonomy"] if parser.has_section("taxonomy") else {}
    raw = sect.get("classes")
    classes = tuple(c.strip() for c in raw.split(",")) if raw else DEFAULT_CLASSES
    classes_norm = [normalize_label(c) for c in classes]
    neutral = normalize_label(sect.get("neutral", "neutral"))
    if neutral not in classes_norm:
        raise ValueError(f"neutral class {neutral!r} is not among the classes")
    if inherit_aliases is None:
        inherit_aliases = parser.getboolean("taxonomy", "inherit_aliases", fallback=True)
    aliases = {}
    if inherit_aliases:
        aliases = {
            a: t for a, t in DEFAULT_ALIASES.items()
            if (t == UNSEEN or t in classes_norm) and a not in classes_norm
        }
    if parser.has_section("aliases"):
        aliases.update(parser["aliases"])
    return LabelTaxonomy(classes, classes_norm.index(neutral), aliases)


def dump_taxonomy(tax: LabelTaxonomy) -> str:
    lines = [
        "[taxonomy]",
        "classes = " + ", ".join(tax.classes),
        f"neutral = {tax.neutral}",
        "inherit_aliases = no",
        "",
        "[aliases]",
    ]
    lines += [f"{a} = {t}" for a, t in tax.aliases.items()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class LogitRecord:
    id: str
    logits: dict[str, np.ndarray]
    label: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, LogitRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.metadata == other.metadata
            and self.logits.keys() == other.logits.keys()
            and all(np.array_equal(v, other.logits[m]) for m, v in self.logits.items())
        )

    __hash__ = None


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str
    record_id: str | None = None

    def __str__(self):
        where = f"line {self.line}" + (f" ({self.record_id})" if self.record_id else "")
        return f"{where}: {self.message}"


class LoadResult(NamedTuple):
    records: list[LogitRecord]
    diagnostics: list[Diagnostic]


def _text_lines(source) -> Iterable[str]:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    for line in source:
        yield line.decode("utf-8") if isinstance(line, (bytes, bytearray)) else line


def _is_number(x) -> bool:
    t = type(x)
    return t is float or t is int


def parse_record(line: str, k: int, lineno: int = 1) -> LogitRecord:
    """Parse and validate one record line; raises ``RecordError``."""
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise RecordError(lineno, f"unparseable line: {exc}") from None
    if not isinstance(obj, dict):
        raise RecordError(lineno, "unparseable line: record must be a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise RecordError(lineno, "missing or empty id")
    extra = obj.keys() - RECORD_FIELDS
    if extra:
        raise RecordError(lineno, f"unknown field(s): {', '.join(sorted(extra))}", rid)
    raw = obj.get("logits")
    if not isinstance(raw, dict) or not raw:
        raise RecordError(lineno, "no modalities", rid)
    logits = {}
    for mod, vals in raw.items():
        if not mod:
            raise RecordError(lineno, "empty modality name", rid)
        if not isinstance(vals, list) or not all(map(_is_number, vals)):
            raise RecordError(lineno, f"{mod}: logits must be an array of numbers", rid)
        if len(vals) != k:
            raise RecordError(lineno, f"dimension mismatch: {mod} has {len(vals)} values, expected {k}", rid)
        try:
            fvals = list(map(float, vals))
        except OverflowError:  # integer literal beyond float range
            fvals = [math.inf]
        if not all(map(math.isfinite, fvals)):
            raise RecordError(lineno, f"non-finite logit in {mod}", rid)
        arr = np.array(fvals, dtype=np.float64)
        arr.setflags(write=False)
        logits[mod] = arr
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise RecordError(lineno, "label must be a string or null", rid)
    meta = obj.get("metadata", {})
    if not isinstance(meta, dict) or not all(isinstance(v, str) for v in meta.values()):
        raise RecordError(lineno, "metadata must map strings to strings", rid)
    return LogitRecord(rid, logits, label, dict(meta))


def load_records(source, taxonomy: LabelTaxonomy, fail_fast: bool = True) -> LoadResult:
    """Read and validate a JSON Lines record stream.

    With ``fail_fast`` the first bad line raises ``RecordError``; otherwise
    bad lines are skipped and reported as diagnostics. Blank lines are ignored.
    """
    records: list[LogitRecord] = []
    diagnostics: list[Diagnostic] = []
    seen: set[str] = set()
    k = taxonomy.k
    for lineno, line in enumerate(_text_lines(source), start=1):
        if not line.strip():
            continue
        try:
            rec = parse_record(line, k, lineno)
            if rec.id in seen:
                raise RecordError(lineno, f"duplicate id {rec.id!r}", rec.id)
        except RecordError as err:
            if fail_fast:
                raise
            diagnostics.append(Diagnostic(err.line, err.message, err.record_id))
            continue
        seen.add(rec.id)
        records.append(rec)
    return LoadResult(records, diagnostics)


def dump_record(rec: LogitRecord, order=DEFAULT_ORDER) -> str:
    obj = {
        "id": rec.id,
        "logits": {m: rec.logits[m].tolist() for m in ordered_modalities(rec.logits, order)},
        "label": rec.label,
        "metadata": dict(sorted(rec.metadata.items())),
    }
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def write_records(records: Iterable[LogitRecord], sink: IO) -> None:
    _write(sink, "".join(dump_record(r) + "\n" for r in records))


def _write(sink: IO, text: str) -> None:
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


@dataclass(eq=False)
class EvalReport:
    """Aggregate evaluation of one fusion mode over a labelled record set.

    ``confusion`` rows follow ``row_labels`` (taxonomy classes, then unseen
    truth labels alphabetically); columns follow ``classes``.
    """

    mode: str
    classes: list[str]
    row_labels: list[str]
    confusion: np.ndarray
    accuracy_standard: float = 0.0
    accuracy_neutral_tolerant: float = 0.0
    n_records: int = 0
    per_step_mean_conflict: float = 0.0
    weighted_error: float = 0.0
    fallback_rates: dict[str, float] = field(default_factory=dict)
    exclude_unseen: bool = False

    def __post_init__(self):
        self.confusion = np.asarray(self.confusion, dtype=np.int64).reshape(len(self.row_labels), len(self.classes))

    @classmethod
    def empty(cls, taxonomy: LabelTaxonomy, mode: str = "advanced") -> "EvalReport":
        return cls(mode, list(taxonomy.classes), list(taxonomy.classes), np.zeros((taxonomy.k, taxonomy.k)))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "classes": list(self.classes),
            "row_labels": list(self.row_labels),
            "confusion": self.confusion.tolist(),
            "accuracy_standard": float(self.accuracy_standard),
            "accuracy_neutral_tolerant": float(self.accuracy_neutral_tolerant),
            "n_records": int(self.n_records),
            "per_step_mean_conflict": float(self.per_step_mean_conflict),
            "weighted_error": float(self.weighted_error),
            "fallback_rates": dict(sorted(self.fallback_rates.items())),
            "exclude_unseen": bool(self.exclude_unseen),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        return cls(**{k: d[k] for k in (
            "mode", "classes", "row_labels", "confusion", "accuracy_standard",
            "accuracy_neutral_tolerant", "n_records", "per_step_mean_conflict",
            "weighted_error", "fallback_rates", "exclude_unseen",
        )})

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


REPORT_FORMATS = ("tabular", "structured")


def _tabular(report: EvalReport) -> str:
    lines = [
        f"mode: {report.mode}",
        f"records: {report.n_records}",
        f"accuracy (standard): {report.accuracy_standard:.6f}",
        f"accuracy (neutral-tolerant): {report.accuracy_neutral_tolerant:.6f}",
        f"confidence-weighted error: {report.weighted_error:.6f}",
        f"mean conflict per fusion step: {report.per_step_mean_conflict:.6f}",
        f"unseen truth labels excluded: {'yes' if report.exclude_unseen else 'no'}",
    ]
    for label, rate in sorted(report.fallback_rates.items()):
        lines.append(f"fallback to neutral ({label}): {rate:.6f}")
    lines.append("confusion (rows = truth, columns = predicted):")
    head = ["truth\\pred", *report.classes]
    body = [[lab, *map(str, row)] for lab, row in zip(report.row_labels, report.confusion.tolist())]
    widths = [max(len(r[i]) for r in [head, *body]) for i in range(len(head))]
    for row in [head, *body]:
        lines.append("  ".join([row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]))
    return "\n".join(lines) + "\n"


def format_report(report: EvalReport, fmt: str = "structured") -> str:
    if fmt == "structured":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "tabular":
        return _tabular(report)
    raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")


def write_report(report: EvalReport, sink: IO, fmt: str = "structured") -> None:
    _write(sink, format_report(report, fmt))


def read_report(source: IO | str | bytes) -> EvalReport:
    if not isinstance(source, (str, bytes)):
        source = source.read()
    return EvalReport.from_dict(json.loads(source))


COMPARED_FIELDS = ("accuracy_standard", "accuracy_neutral_tolerant", "weighted_error", "per_step_mean_conflict")


def comparison_delta(basic: EvalReport, advanced: EvalReport) -> dict[str, float]:
    """``advanced - basic`` for each headline metric."""
    return {f: float(getattr(advanced, f)) - float(getattr(basic, f)) for f in COMPARED_FIELDS}


def format_comparison(basic: EvalReport, advanced: EvalReport, fmt: str = "structured") -> str:
    delta = comparison_delta(basic, advanced)
    if fmt == "structured":
        doc = {"basic": basic.to_dict(), "advanced": advanced.to_dict(), "delta": delta}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "tabular":
        lines = ["delta (advanced - basic):"]
        lines += [f"  {f}: {v:+.6f}" for f, v in delta.items()]
        return _tabular(basic) + "\n" + _tabular(advanced) + "\n" + "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
