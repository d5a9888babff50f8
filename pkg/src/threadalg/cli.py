"""Command-line front end.

Input files are thread terms, except that a `.pglb` suffix marks an
instruction sequence, which is run through extraction first.  All
output is deterministic: identical invocations print identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import analysis, interaction, interleaving, pglb, services, terms, threads
from .errors import Error


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_thread(path: str, args) -> threads.ThreadGraph:
    if path.endswith(".pglb"):
        program = pglb.parse_program(_read(path))
        return pglb.extract(
            program,
            entry=getattr(args, "entry", 1),
            with_random=not getattr(args, "no_random", False),
            with_abstraction=not getattr(args, "no_abstraction", False),
        )
    return terms.parse_thread(_read(path))


def _scheduler(text: str) -> interleaving.SchedulerSpec:
    if text.startswith("table:"):
        table = json.loads(_read(text[len("table:") :]))
        return interleaving.scheduler_from_table(table)
    try:
        return interleaving.builtin_scheduler(text)
    except ValueError as exc:
        raise Error(str(exc)) from exc


def _pipeline(args) -> threads.ThreadGraph:
    """Build the analyzed thread from input files plus pipeline flags."""
    loaded = [_load_thread(path, args) for path in args.inputs]
    if getattr(args, "services", None):
        family = services.parse_family(args.services)
        loaded = [interaction.use(g, family) for g in loaded]
    if len(loaded) > 1 or getattr(args, "scheduler", None):
        if not getattr(args, "scheduler", None):
            raise Error("interleaving several threads requires --scheduler")
        return interleaving.interleave(_scheduler(args.scheduler), loaded)
    return loaded[0]


def _environment(args) -> analysis.Environment:
    if getattr(args, "env", None):
        return analysis.Environment.from_table(_read(args.env))
    return analysis.EMPTY_ENVIRONMENT


def _print_thread(g: threads.ThreadGraph) -> int:
    print(terms.print_term(threads.normalize(g)))
    return 0


def _cmd_normalize(args) -> int:
    return _print_thread(terms.parse_thread(_read(args.input)))


def _cmd_extract(args) -> int:
    program = pglb.parse_program(_read(args.input))
    g = pglb.extract(
        program,
        entry=args.entry,
        with_random=not args.no_random,
        with_abstraction=not args.no_abstraction,
    )
    return _print_thread(g)


def _cmd_use(args) -> int:
    g = _load_thread(args.input, args)
    family = services.parse_family(args.services)
    return _print_thread(interaction.use(g, family))


def _cmd_interleave(args) -> int:
    loaded = [_load_thread(path, args) for path in args.inputs]
    g = interleaving.interleave(_scheduler(args.scheduler), loaded)
    return _print_thread(g)


def _cmd_dist(args) -> int:
    g = _pipeline(args)
    dist = analysis.outcome_distribution(
        g, _environment(args), args.depth, with_traces=args.traces
    )
    print(f"terminate: {dist.terminate}")
    print(f"deadlock: {dist.deadlock}")
    print(f"surviving: {dist.surviving}")
    if args.traces:
        for trace, mass in dist.traces or ():
            label = "trace" if not trace else "trace " + " ".join(trace)
            print(f"{label}: {mass}")
    return 0


def _cmd_equiv(args) -> int:
    g1 = _load_thread(args.first, args)
    g2 = _load_thread(args.second, args)
    if threads.equal_up_to(args.depth, g1, g2):
        print("equivalent")
    else:
        print("not equivalent")
    return 0


def _cmd_sample(args) -> int:
    g = _pipeline(args)
    env = _environment(args)
    if args.runs is None:
        tag, trace = analysis.sample_run(g, env, args.depth, args.seed)
        print(f"outcome: {tag}")
        print("trace:" + ("" if not trace else " " + " ".join(trace)))
    else:
        freq = analysis.sample_outcomes(g, env, args.depth, args.seed, args.runs)
        for tag in (analysis.TERMINATE, analysis.DEADLOCK, analysis.SURVIVING):
            print(f"{tag}: {freq[tag]}")
    return 0


def _add_extraction_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--entry", type=int, default=1, help="start position (default 1)")
    p.add_argument(
        "--no-abstraction",
        action="store_true",
        help="keep internal steps visible after extraction",
    )
    p.add_argument(
        "--no-random",
        action="store_true",
        help="leave random choice instructions as service requests",
    )


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    _add_extraction_flags(p)
    p.add_argument("--services", help="family literal, e.g. '{random: Random}'")
    p.add_argument(
        "--scheduler",
        help="cyclic | uniform | lottery:defaultTickets=N | table:FILE.json",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threadalg",
        description="Exact analysis of probabilistic threads, "
        "instruction sequences, services, and interleaving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="print the canonical form of a term file")
    p.add_argument("input")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("extract", help="behaviour of an instruction sequence")
    p.add_argument("input")
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("use", help="run a thread against named services")
    p.add_argument("input")
    p.add_argument("--services", required=True)
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_use)

    p = sub.add_parser("interleave", help="schedule several threads into one")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--scheduler", required=True)
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_interleave)

    p = sub.add_parser("dist", help="exact outcome distribution at a depth bound")
    p.add_argument("inputs", nargs="+")
    _add_pipeline_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--env", help="reply table file with `f.m = p` lines")
    p.add_argument("--traces", action="store_true", help="include the trace table")
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("equiv", help="compare two inputs up to a depth")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--depth", type=int, required=True)
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("sample", help="seeded pseudo-random executions")
    p.add_argument("inputs", nargs="+")
    _add_pipeline_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--runs", type=int, help="aggregate frequencies over this many runs")
    p.add_argument("--env", help="reply table file with `f.m = p` lines")
    p.set_defaults(func=_cmd_sample)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
