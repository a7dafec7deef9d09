"""Command-line entry point: ``evfusion {fuse,evaluate,simulate,select-frame}``.

Exit codes: 0 success, 1 validation failure under ``--fail-fast``, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import dataclass

from .batch import format_lines, fuse_records
from .datasetio import (
    REPORT_FORMATS,
    Diagnostic,
    LabelTaxonomy,
    RecordError,
    format_comparison,
    format_report,
    load_records,
    load_taxonomy,
    write_records,
)
from .evidence import DEFAULT_ORDER
from .frameselect import DEFAULT_STRIDE, FrameScoreSequence, FrameSelectionError, select_best_frame
from .metrics import Prediction, build_report
from .simulate import SimulationConfig, simulate_records

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str = "advanced"
    fusion_order: tuple[str, ...] = DEFAULT_ORDER
    taxonomy: str | None = None
    input: str = "-"
    output: str = "-"
    fail_fast: bool = False
    seed: int | None = None
    workers: int = 1

    def __post_init__(self):
        if len(set(self.fusion_order)) != len(self.fusion_order) or not all(self.fusion_order):
            raise UsageError("--order entries must be unique, non-empty modality names")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")

    def load_taxonomy(self) -> LabelTaxonomy:
        if self.taxonomy is None:
            return LabelTaxonomy()
        try:
            with open(self.taxonomy, encoding="utf-8") as fh:
                return load_taxonomy(fh)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"taxonomy {self.taxonomy}: {exc}") from None


@contextlib.contextmanager
def _reader(path: str):
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as fh:
            yield fh


@contextlib.contextmanager
def _writer(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _warn(diag) -> None:
    print(f"evfusion: {diag}", file=sys.stderr)


def _load(cfg: RunConfig, taxonomy: LabelTaxonomy):
    """Validated records, or None when a fail-fast diagnostic fired."""
    with _reader(cfg.input) as fh:
        try:
            records, diags = load_records(fh, taxonomy, fail_fast=cfg.fail_fast)
        except RecordError as err:
            _warn(err)
            return None
    for d in diags:
        _warn(d)
    return records


def cmd_fuse(cfg: RunConfig) -> int:
    taxonomy = cfg.load_taxonomy()
    records = _load(cfg, taxonomy)
    if records is None:
        return EXIT_INVALID
    result = fuse_records(records, taxonomy.k, cfg.mode, cfg.fusion_order, cfg.workers)
    failed = [i for i in range(len(result)) if result.error(i)]
    for i in failed:
        _warn(f"{result.ids[i]}: {result.error(i)}")
    if failed and cfg.fail_fast:
        return EXIT_INVALID
    with _writer(cfg.output) as out:
        out.write("".join(line + "\n" for line in format_lines(result, taxonomy.classes)))
    return EXIT_OK


def evaluate_records(records, taxonomy, mode, order=DEFAULT_ORDER, workers=1, exclude_unseen=False):
    """Fuse labelled records and build an ``EvalReport``; returns ``(report, diagnostics)``."""
    diags = []
    labelled = []
    for rec in records:
        if rec.label is None:
            diags.append(Diagnostic(0, "missing ground truth", rec.id))
        else:
            labelled.append(rec)
    result = fuse_records(labelled, taxonomy.k, mode, order, workers)
    preds, truths = [], {}
    for i, rec in enumerate(labelled):
        err = result.error(i)
        if err:
            diags.append(Diagnostic(0, err, rec.id))
            continue
        preds.append(Prediction.from_probabilities(rec.id, result.probabilities[i], result.uncertainty[i]))
        truths[rec.id] = rec.label
    report = build_report(preds, truths, taxonomy, mode, result.all_conflicts().tolist(), exclude_unseen)
    return report, diags


def cmd_evaluate(cfg: RunConfig, fmt: str = "structured", exclude_unseen: bool = False) -> int:
    taxonomy = cfg.load_taxonomy()
    records = _load(cfg, taxonomy)
    if records is None:
        return EXIT_INVALID
    modes = ("basic", "advanced") if cfg.mode == "compare" else (cfg.mode,)
    reports = {}
    diags = {}
    for mode in modes:
        reports[mode], found = evaluate_records(
            records, taxonomy, mode, cfg.fusion_order, cfg.workers, exclude_unseen
        )
        diags.update(dict.fromkeys(found))
    for d in diags:
        _warn(f"{d.record_id}: {d.message}")
    if diags and cfg.fail_fast:
        return EXIT_INVALID
    if cfg.mode == "compare":
        text = format_comparison(reports["basic"], reports["advanced"], fmt)
    else:
        text = format_report(reports[cfg.mode], fmt)
    with _writer(cfg.output) as out:
        out.write(text)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, sim: SimulationConfig) -> int:
    if cfg.seed is None:
        raise UsageError("simulate requires --seed")
    sim.seed = cfg.seed
    taxonomy = cfg.load_taxonomy()
    try:
        records = simulate_records(sim, taxonomy)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _writer(cfg.output) as out:
        write_records(records, out)
    return EXIT_OK


def _parse_sequence(line: str, stride: int, lineno: int):
    try:
        obj = json.loads(line)
        sid = obj["id"]
        frames = obj["frames"]
        if not isinstance(sid, str) or not isinstance(frames, list):
            raise TypeError
        pairs = [(f["index"], f["scores"]) for f in frames]
    except (ValueError, KeyError, TypeError):
        raise RecordError(lineno, "unparseable frame sequence") from None
    try:
        return sid, FrameScoreSequence.from_pairs(pairs, stride)
    except (FrameSelectionError, ValueError, TypeError) as exc:
        raise RecordError(lineno, str(exc), sid) from None


def cmd_select_frame(cfg: RunConfig, stride: int = DEFAULT_STRIDE) -> int:
    if stride < 1:
        raise UsageError("--stride must be >= 1")
    results = []
    status = EXIT_OK
    with _reader(cfg.input) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.decode("utf-8")
            if not line.strip():
                continue
            try:
                sid, seq = _parse_sequence(line, stride, lineno)
            except RecordError as err:
                _warn(err)
                if cfg.fail_fast:
                    return EXIT_INVALID
                continue
            try:
                frame, saliency = select_best_frame(seq)
                results.append((sid, {"id": sid, "frame": frame, "saliency": saliency}))
            except FrameSelectionError as exc:
                _warn(f"line {lineno} ({sid}): {exc}")
                results.append((sid, {"id": sid, "error": str(exc)}))
                if cfg.fail_fast:
                    status = EXIT_INVALID
    if status != EXIT_OK:
        return status
    results.sort(key=lambda r: r[0])
    with _writer(cfg.output) as out:
        out.write("".join(json.dumps(obj, separators=(",", ":")) + "\n" for _, obj in results))
    return EXIT_OK


def _order(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(","))


def _assignments(pairs, cast=float) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"expected NAME=VALUE, got {item!r}")
        try:
            out[key.strip()] = cast(val)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evfusion", description="Evidential late fusion of per-modality classifier logits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, modes=("basic", "advanced")):
        p.add_argument("--in", dest="input", default="-", help="input JSON Lines file (default: stdin)")
        p.add_argument("--out", dest="output", default="-", help="output file (default: stdout)")
        p.add_argument("--taxonomy", help="taxonomy config file (default: built-in 7 classes)")
        p.add_argument("--fail-fast", action="store_true", help="abort with exit 1 on the first invalid input")
        if modes:
            p.add_argument("--mode", choices=modes, default="advanced")
            p.add_argument("--order", type=_order, default=DEFAULT_ORDER,
                           help="comma-separated fusion order (default: audio,video,text)")
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("fuse", help="fuse every record and emit probabilities")
    common(p)

    p = sub.add_parser("evaluate", help="fuse labelled records and write an accuracy report")
    common(p, modes=("basic", "advanced", "compare"))
    p.add_argument("--format", choices=REPORT_FORMATS, default="structured")
    p.add_argument("--exclude-unseen", action="store_true",
                   help="drop truth labels outside the taxonomy from accuracy denominators")

    p = sub.add_parser("simulate", help="generate synthetic labelled logit records")
    p.add_argument("--out", dest="output", default="-")
    p.add_argument("--taxonomy")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--modalities", type=_order, default=DEFAULT_ORDER)
    for knob in ("signal", "noise", "bias", "dropout", "disagree", "neutral-bias"):
        p.add_argument(f"--{knob}", action="append", metavar="MODALITY=VALUE")
    p.add_argument("--unseen", action="append", metavar="LABEL=RATE")
    p.add_argument("--decimals", type=int, default=6)

    p = sub.add_parser("select-frame", help="pick the most salient frame per score sequence")
    common(p, modes=())
    p.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    return parser


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = RunConfig(taxonomy=args.taxonomy, output=args.output, seed=args.seed)
        sim = SimulationConfig(n=args.n, modalities=args.modalities, decimals=args.decimals)
        for knob in ("signal", "noise", "bias", "dropout", "disagree", "neutral_bias"):
            given = _assignments(getattr(args, knob))
            if knob == "signal":
                getattr(sim, knob).update(given)
            else:
                setattr(sim, knob, given)
        sim.unseen = _assignments(args.unseen)
        return cmd_simulate(cfg, sim)
    if args.command == "select-frame":
        cfg = RunConfig(input=args.input, output=args.output, taxonomy=args.taxonomy, fail_fast=args.fail_fast)
        return cmd_select_frame(cfg, args.stride)
    cfg = RunConfig(
        mode=args.mode, fusion_order=args.order, taxonomy=args.taxonomy, input=args.input,
        output=args.output, fail_fast=args.fail_fast, workers=args.workers,
    )
    if args.command == "fuse":
        return cmd_fuse(cfg)
    return cmd_evaluate(cfg, args.format, args.exclude_unseen)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"evfusion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"evfusion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
