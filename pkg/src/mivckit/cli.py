"""Command-line entry point: ``mivc-kit <check|ivc|mcs|must> [flags] FILE.lus``."""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .errors import InputError, NoCutSetExists, SolverError
from .induction import DEFAULT_BUDGET_MS, DEFAULT_KMAX, AnalysisContext, Safe, Unsafe
from .ivc import all_mivcs, categorize, get_approximate_mivc, minimal_ivc
from .mcs import all_mcs_up_to_ub, get_single_mcs, must_set
from .parser import parse_program
from .report import AnalysisReport, PropertyReport, render_json, render_text
from .solver import Session, SolverConfig, default_command
from .system import CATEGORIES, dump_ts, elaborate, parse_categories, select_elements
from .typecheck import type_check

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3, 4


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="Lustre model (.lus)")
    common.add_argument("--main", metavar="NODE", help="top-level node (default: first non-imported node)")
    common.add_argument(
        "--elements",
        default="assumptions,guarantees",
        help=f"element categories to analyse, comma separated from {','.join(CATEGORIES)}",
    )
    common.add_argument("--kmax", type=_non_negative, default=DEFAULT_KMAX, help="maximum induction depth")
    common.add_argument("--timeout", type=_positive, default=DEFAULT_BUDGET_MS, metavar="MS",
                        help="time limit per verification, in milliseconds")
    common.add_argument("--solver-cmd", metavar="CMD", help="SMT-LIB solver command line (default: $MIVCKIT_SOLVER or z3)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--dump-ts", action="store_true", help="print the elaborated transition system to stderr")
    common.add_argument("--jobs", type=_positive, default=1, help="properties analysed in parallel")

    parser = argparse.ArgumentParser(prog="mivc-kit", description="Inductive validity cores and minimal cut sets for Lustre models.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="prove or refute the main node's guarantees")

    ivc = sub.add_parser("ivc", parents=[common], help="inductive validity cores")
    mode = ivc.add_mutually_exclusive_group()
    mode.add_argument("--approximate", dest="ivc_mode", action="store_const", const="approximate")
    mode.add_argument("--minimal", dest="ivc_mode", action="store_const", const="minimal")
    mode.add_argument("--all", dest="ivc_mode", action="store_const", const="all")
    ivc.add_argument("--must", action="store_true", help="also compute the MUST set")
    ivc.set_defaults(ivc_mode="minimal")

    mcs = sub.add_parser("mcs", parents=[common], help="minimal cut sets")
    mmode = mcs.add_mutually_exclusive_group()
    mmode.add_argument("--smallest", dest="mcs_mode", action="store_const", const="smallest")
    mmode.add_argument("--all", dest="mcs_mode", action="store_const", const="all")
    mmode.add_argument("--max-cardinality", dest="mcs_bound", type=_non_negative, metavar="N")
    mcs.add_argument("--must", action="store_true", help="also compute the MUST set")
    mcs.set_defaults(mcs_mode=None)

    sub.add_parser("must", parents=[common], help="elements needed by every minimal IVC")
    return parser


def _timed(timings: dict, phase: str, fn, *args, **kwargs):
    t0 = time.perf_counter()
    try:
        return fn(*args, **kwargs)
    finally:
        timings[phase] = timings.get(phase, 0.0) + time.perf_counter() - t0


def analyze_property(ts, prop, selected, args, cfg: SolverConfig) -> PropertyReport:
    """Run the requested pipeline for one property with a private engine stack."""
    timings: dict = {}
    with AnalysisContext(cfg=cfg, kmax=args.kmax, budget_ms=args.timeout) as ctx:
        r = _timed(timings, "check", ctx.verify, ts, ts.element_ids, prop)
        rep = PropertyReport(prop.label, prop.span, "unknown", timings=timings)
        if isinstance(r, Safe):
            rep.verdict, rep.k = "safe", r.k
        elif isinstance(r, Unsafe):
            rep.verdict, rep.trace = "unsafe", r.trace
        else:
            rep.reason = r.reason
        if rep.verdict != "unsafe":
            _analyses(ctx, ts, prop, selected, args, rep, timings)
        rep.stats = ctx.stats()
    return rep


def _analyses(ctx, ts, prop, E, args, rep, timings):
    cmd = args.command
    want_must = cmd == "must" or getattr(args, "must", False) or getattr(args, "ivc_mode", None) == "all"
    if want_must:
        rep.must = _timed(timings, "must", must_set, ctx, ts, E, prop)
    if cmd == "ivc":
        rep.ivc_mode = args.ivc_mode
        if args.ivc_mode == "approximate":
            rep.ivc = _timed(timings, "ivc", get_approximate_mivc, ctx, ts, E, prop)
        elif args.ivc_mode == "minimal":
            rep.ivc = _timed(timings, "ivc", minimal_ivc, ctx, ts, E, prop)
        else:
            rep.ivc_mode = None
            rep.mivcs = _timed(timings, "mivcs", all_mivcs, ctx, ts, E, prop, rep.must)
            if rep.mivcs.complete and not any(m.approximate for m in rep.mivcs.mivcs):
                rep.categorization = categorize(rep.mivcs, E)
    elif cmd == "mcs":
        mode = _mcs_mode(args)
        rep.mcs_mode = mode
        if mode == "smallest":
            try:
                one = _timed(timings, "mcs", get_single_mcs, ctx, ts, E, prop)
                rep.mcs, rep.mcs_complete = [one], not one.approximate
            except NoCutSetExists:
                rep.mcs, rep.mcs_complete = [], True
        else:
            rep.mcs_bound = args.mcs_bound if mode == "bounded" else len(E)
            rep.mcs, rep.mcs_complete = _timed(timings, "mcs", all_mcs_up_to_ub, ctx, ts, E, prop, rep.mcs_bound)


def _mcs_mode(args) -> str:
    if args.mcs_bound is not None:
        return "bounded"
    return args.mcs_mode or "all"


def _config(args, categories) -> dict:
    cfg = {
        "elements": sorted(name for name, kind in CATEGORIES.items() if kind in categories),
        "kmax": args.kmax,
        "timeout_ms": args.timeout,
        "solver_cmd": args.solver_cmd or " ".join(default_command()),
        "jobs": args.jobs,
        "must": bool(getattr(args, "must", False)) or args.command == "must",
        "ivc_mode": getattr(args, "ivc_mode", None) if args.command == "ivc" else None,
        "mcs_mode": _mcs_mode(args) if args.command == "mcs" else None,
        "mcs_bound": getattr(args, "mcs_bound", None) if args.command == "mcs" else None,
    }
    return cfg


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        categories = parse_categories(args.elements)
    except ValueError as exc:
        print(f"mivc-kit: error: {exc}", file=stderr)
        return EXIT_USAGE

    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"mivc-kit: error: cannot read {args.file}: {exc}", file=stderr)
        return EXIT_INPUT
    try:
        ts = elaborate(type_check(parse_program(text, args.main)), args.main)
    except InputError as exc:
        where = f"{exc.line}:{exc.column}:" if exc.line is not None else ""
        print(f"{args.file}:{where} error: {exc.message}", file=stderr)
        return EXIT_INPUT
    if args.dump_ts:
        stderr.write(dump_ts(ts))

    cmd = tuple(args.solver_cmd.split()) if args.solver_cmd else default_command()
    cfg = SolverConfig(command=cmd, timeout_ms=args.timeout)
    selected = select_elements(ts, categories)
    try:
        with Session(cfg) as probe:
            identity = probe.identity
        if args.jobs > 1 and len(ts.properties) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                props = list(pool.map(lambda p: analyze_property(ts, p, selected, args, cfg), ts.properties))
        else:
            props = [analyze_property(ts, p, selected, args, cfg) for p in ts.properties]
    except SolverError as exc:
        print(f"mivc-kit: solver error: {exc}", file=stderr)
        return EXIT_SOLVER

    report = AnalysisReport(ts, args.file, args.command, selected, _config(args, categories), identity, props)
    out = render_json(report).decode("utf-8") if args.format == "json" else render_text(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        stdout.write(out)
    return report.exit_code()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
