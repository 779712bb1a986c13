"""surgecheck command line.

Exit status: 0 ok, 1 property violated or suite mismatch, 2 usage or input
error, 3 a resource limit was hit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .checker import CapacityExceeded, check
from .data import SortTooLarge, SurgeError
from .lts import ExploreLimits, LimitExceeded, explore, export_lts, import_lts
from .speclang import load_model

OK, FAIL, USAGE, LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def default_workers() -> int:
    env = os.environ.get("SURGECHECK_WORKERS")
    if env:
        try:
            return _positive(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"SURGECHECK_WORKERS: {exc}") from None
    return os.cpu_count() or 1


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


def _model_lts(args):
    tm = load_model(_read(args.model), args.model)
    limits = ExploreLimits(max_states=getattr(args, "max_states", None))
    return tm, explore(tm, limits, _workers(args))


# ---------------------------------------------------------------------------
# subcommands

def cmd_parse(args, out) -> int:
    tm = load_model(_read(args.model), args.model)
    sig = tm.signature
    print(f"{args.model}: ok", file=out)
    print(f"sorts: {len(sig.sorts)}", file=out)
    print(f"actions: {len(sig.actions)}", file=out)
    print(f"globals: {len(sig.globals)}", file=out)
    for p in tm.proc_list:
        print(f"proc {p.name}/{len(p.params)}", file=out)
    return OK


def cmd_explore(args, out) -> int:
    t0 = time.perf_counter()
    _, lts = _model_lts(args)
    if args.output:
        _write(args.output, export_lts(lts))
    print(f"states: {lts.num_states}", file=out)
    print(f"transitions: {lts.num_transitions}", file=out)
    print(f"deadlocks: {len(lts.deadlocks)}", file=out)
    if args.stats:
        print(f"seconds: {time.perf_counter() - t0:.3f}", file=out)
    return OK


def cmd_export(args, out) -> int:
    _, lts = _model_lts(args)
    text = export_lts(lts)
    if args.output:
        _write(args.output, text)
    else:
        out.write(text)
    return OK


def _formula_text(arg: str) -> str:
    # a path when it names a file, otherwise the formula itself
    p = Path(arg)
    if p.suffix in (".mcf", ".mcl") or p.is_file():
        return _read(arg)
    return arg


def cmd_check(args, out) -> int:
    t0 = time.perf_counter()
    if args.model.endswith(".ltx"):
        signature = None
        lts = import_lts(_read(args.model))
    else:
        tm, lts = _model_lts(args)
        signature = tm.signature
    t1 = time.perf_counter()
    res = check(lts, _formula_text(args.formula), signature, want_trace=args.trace)
    print(f"holds: {'true' if res.holds else 'false'}", file=out)
    if args.trace and not res.holds:
        if res.counterexample is not None:
            print("trace:", file=out)
            for step in res.trace_text():
                print(f"  {step}", file=out)
        else:
            print(f"surgecheck: no trace: {res.note}", file=sys.stderr)
    if args.stats:
        st = res.stats
        print(f"states: {lts.num_states}", file=out)
        print(f"transitions: {lts.num_transitions}", file=out)
        print(f"equations: {st['equations']}", file=out)
        print(f"blocks: {st['blocks']}", file=out)
        print(f"components: {st['components']}", file=out)
        print(f"iterations: {st['iterations']}", file=out)
        print(f"explore seconds: {t1 - t0:.3f}", file=out)
        print(f"check seconds: {st['seconds']:.3f}", file=out)
    return OK if res.holds else FAIL


def _scenario(path: str):
    from .besw.config import parse_scenario
    return parse_scenario(_read(path))


def cmd_gen(args, out) -> int:
    from .besw.model import generate_model
    text = generate_model(_scenario(args.scenario))
    if args.output:
        _write(args.output, text)
    else:
        out.write(text)
    return OK


def cmd_suite(args, out) -> int:
    from .besw.suite import run_suite
    cfg = _scenario(args.scenario)
    report = run_suite(cfg, only=args.only, workers=_workers(args))
    if args.json:
        for p in report.properties:
            print(json.dumps(p.as_json(), sort_keys=False), file=out)
    else:
        print(f"states: {report.states}  transitions: {report.transitions}", file=out)
        print(f"{'id':<10} {'expected':<9} {'verdict':<8} {'result':<8} {'equations':>10} {'ms':>9}",
              file=out)
        for p in report.properties:
            verdict = "-" if p.verdict is None else str(p.verdict).lower()
            result = "skipped" if p.match is None else ("ok" if p.match else "MISMATCH")
            print(f"{p.id:<10} {str(p.expected).lower():<9} {verdict:<8} {result:<8} "
                  f"{p.equations:>10} {p.millis:>9.1f}", file=out)
        bad = [p.id for p in report.properties if p.match is False]
        print("all expectations met" if not bad else "mismatches: " + ", ".join(bad), file=out)
    return OK if report.all_match else FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surgecheck",
                                 description="Explicit-state mu-calculus checker for controller models.")
    sub = ap.add_subparsers(dest="command", required=True)

    def workers(p):
        p.add_argument("--workers", type=_positive, default=None,
                       help="exploration threads (default: $SURGECHECK_WORKERS or CPU count)")

    p = sub.add_parser("parse", help="parse and typecheck a model")
    p.add_argument("model")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("explore", help="build the state space")
    p.add_argument("model")
    p.add_argument("--max-states", type=_positive, default=None)
    workers(p)
    p.add_argument("-o", "--output", help="write the LTS in .ltx format")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(run=cmd_explore)

    p = sub.add_parser("check", help="check a formula on a model or .ltx file")
    p.add_argument("model")
    p.add_argument("-f", "--formula", required=True, help="formula file or formula text")
    p.add_argument("--trace", action="store_true", help="print a counterexample when violated")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--max-states", type=_positive, default=None)
    workers(p)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("suite", help="run the property corpus on a scenario")
    p.add_argument("scenario")
    p.add_argument("--json", action="store_true", help="one JSON record per property")
    p.add_argument("--only", action="append", metavar="ID", help="restrict to these property ids")
    workers(p)
    p.set_defaults(run=cmd_suite)

    p = sub.add_parser("gen", help="generate the controller model for a scenario")
    p.add_argument("scenario")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("export", help="explore a model and write the LTS")
    p.add_argument("model")
    p.add_argument("-o", "--output")
    p.add_argument("--max-states", type=_positive, default=None)
    workers(p)
    p.set_defaults(run=cmd_export)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.run(args, out)
    except (LimitExceeded, CapacityExceeded, SortTooLarge) as exc:
        print(f"surgecheck: limit: {exc}", file=sys.stderr)
        return LIMIT
    except UsageError as exc:
        print(f"surgecheck: {exc}", file=sys.stderr)
        return USAGE
    except SurgeError as exc:
        print(f"surgecheck: {exc}", file=sys.stderr)
        return USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
