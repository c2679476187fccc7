"""Command-line front end.

Exit codes: 0 success, 1 a property violation was found (the witness is
printed), 2 bad input or usage.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Sequence

from . import __version__
from .diagonalize import EXACT, FLOAT, count_interval, inertia, sigma_split
from .dot import rep_to_dot, tree_to_dot
from .enumerate import MAX_N, PipelineFailure, free_trees, verify_conjecture, verify_pipeline
from .gpp import expand
from .numerics import fmt, to_rational
from .trace_io import read_trace, replay_trace, step_to_record, trace_to_records, write_trace
from .transforms import MIN_N, ProperViolation, TransformRejected, Trace, prototype, transform
from .tree import TreeError, average_degree, canonical_code, format_edge_list, parse_edge_list, random_tree

OK, VIOLATION, USAGE = 0, 1, 2
SEED_ENV = "LAPDIST_SEED"


class UsageError(Exception):
    pass


def _read_tree(path: str):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_edge_list(text)
    except TreeError as exc:
        # parse errors already name their line
        raise UsageError(f"{path}: {exc} [{exc.code}]") from None


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload) if args.json else text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _rational(text: str):
    try:
        return to_rational(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


# -- verbs ----------------------------------------------------------------------------

def cmd_sigma(args) -> int:
    tree = _read_tree(args.tree)
    dn = average_degree(tree.n)
    if args.mode == FLOAT:
        inr = inertia(tree, dn, mode=FLOAT)
        if inr.zero:
            print(f"{inr.zero} ambiguous values in float mode; re-run with --exact", file=sys.stderr)
            return USAGE
        below, sig = inr.negative, inr.positive
    else:
        below, sig = sigma_split(tree)
    _emit(args, {"n": tree.n, "d_n": fmt(dn), "m_below": below, "sigma": sig},
          f"n={tree.n} d_n={fmt(dn)} m_below={below} sigma={sig}")
    return OK


def cmd_count(args) -> int:
    tree = _read_tree(args.tree)
    lo, hi = args.lo, args.hi
    if lo > hi:
        raise UsageError(f"--lo {fmt(lo)} exceeds --hi {fmt(hi)}")
    lo_closed, hi_closed = not args.lo_open, args.hi_closed
    if args.mode == FLOAT:
        a, b = inertia(tree, lo, mode=FLOAT), inertia(tree, hi, mode=FLOAT)
        if a.zero or b.zero:
            print("ambiguous values in float mode; re-run with --exact", file=sys.stderr)
            return USAGE
        count = max(b.negative - a.negative, 0)
    else:
        count = count_interval(tree, lo, hi, lo_closed, hi_closed)
    interval = f"{'[' if lo_closed else '('}{fmt(lo)}, {fmt(hi)}{']' if hi_closed else ')'}"
    _emit(args, {"n": tree.n, "interval": interval, "count": count}, f"n={tree.n} m{interval}={count}")
    return OK


def _print_violations(report, limit: int = 5) -> None:
    for v in report.violations[:limit]:
        print(json.dumps({"n": v.n, "edges": [list(e) for e in v.edges], "counts": v.counts,
                          "message": v.message}), file=sys.stderr)


def cmd_verify(args) -> int:
    if args.pipeline:
        lo = args.min_n if args.min_n is not None else MIN_N
        if not MIN_N <= lo <= args.max_n <= MAX_N:
            raise UsageError(f"pipeline range needs {MIN_N} <= --min-n <= --max-n <= {MAX_N}")
        try:
            report = verify_pipeline(lo, args.max_n, args.jobs)
        except PipelineFailure as exc:
            report = exc.report
    else:
        if not 2 <= args.max_n <= MAX_N:
            raise UsageError(f"--max-n must lie in 2..{MAX_N}")
        report = verify_conjecture(args.max_n, args.jobs)
    if args.json:
        print(json.dumps(report.to_dict()))
    else:
        for line in report.summary_lines():
            print(line)
    if report.violations:
        _print_violations(report)
        return VIOLATION
    return OK


def _write_records(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def cmd_transform(args) -> int:
    if args.replay:
        try:
            with open(args.replay, encoding="utf-8") as fh:
                trace = read_trace(fh)
        except OSError as exc:
            raise UsageError(f"cannot read {args.replay}: {exc.strerror}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"{args.replay}: malformed trace: {exc}") from None
        try:
            rep, tree = replay_trace(trace, verify=args.verify is True)
        except ProperViolation as exc:
            print(f"violation during replay: {exc}", file=sys.stderr)
            return VIOLATION
        except (AssertionError, TransformRejected) as exc:
            print(f"replay failed: {exc}", file=sys.stderr)
            return VIOLATION
        code = canonical_code(tree).decode()
        _emit(args, {"final": rep.render(), "canonical": code, "steps": len(trace.steps)},
              f"replayed {len(trace.steps)} steps: {rep.render()}\ncanonical {code}")
        return OK
    if args.tree is None:
        raise UsageError("transform needs a tree file or --replay")
    tree = _read_tree(args.tree)
    if tree.n < MIN_N:
        raise UsageError(f"transform needs n >= {MIN_N}, got {tree.n}")
    try:
        trace = transform(tree, verify=args.verify)
    except ProperViolation as exc:
        print(f"proper-transformation violation: {exc}", file=sys.stderr)
        if args.trace:
            _write_records(args.trace, [{"kind": "violation", "edges": [list(e) for e in tree.edges],
                                         "message": str(exc)}] +
                           [step_to_record(i, s) for i, s in enumerate(exc.steps)])
        print(format_edge_list(tree), file=sys.stderr, end="")
        return VIOLATION
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            write_trace(trace, fh)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(rep_to_dot(trace.final, "final"))
    _print_trace(args, trace)
    return OK


def _print_trace(args, trace: Trace) -> None:
    if args.json:
        for rec in trace_to_records(trace):
            print(json.dumps(rec))
        return
    print(f"initial: {trace.initial_rep.render()}")
    for i, s in enumerate(trace.steps):
        sig = "" if s.sigma_before is None else f"  sigma {s.sigma_before} -> {s.sigma_after}"
        tag = "  [macro]" if s.macro else ""
        print(f"{i:4d} {s.kind:<16} @{s.vertex}: {s.before} -> {s.after}{sig}{tag}")
    print(f"final: {trace.final.render()}")


def cmd_prototype(args) -> int:
    if args.n < MIN_N:
        raise UsageError(f"prototypes exist for n >= {MIN_N}")
    rep = prototype(args.n)
    tree = expand(rep)
    below, sig = sigma_split(tree)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(rep_to_dot(rep, f"T{args.n % 4}"))
    if args.edges:
        print(format_edge_list(tree), end="")
        return OK
    _emit(args, {"n": args.n, "alpha": args.n % 4, "r": args.n // 4, "rep": rep.render(),
                 "m_below": below, "sigma": sig},
          f"T_{args.n % 4} (r={args.n // 4}): {rep.render()}  m_below={below} sigma={sig}")
    return OK


def cmd_bench(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    seed = _seed(args)
    t0 = time.perf_counter()
    tree = random_tree(args.n, seed)
    t1 = time.perf_counter()
    inr = inertia(tree, average_degree(args.n), mode=args.mode)
    t2 = time.perf_counter()
    total = inr.negative + inr.zero + inr.positive
    label = "ambiguous" if args.mode == FLOAT else "zero"
    payload = {"n": args.n, "seed": seed, "mode": args.mode, "negative": inr.negative, label: inr.zero,
               "positive": inr.positive, "build_s": round(t1 - t0, 4), "diag_s": round(t2 - t1, 4)}
    _emit(args, payload,
          f"n={args.n} seed={seed} mode={args.mode} negative={inr.negative} positive={inr.positive} "
          f"{label}={inr.zero} build={t1 - t0:.3f}s diagonalize={t2 - t1:.3f}s")
    if total != args.n:
        print(f"count mismatch: {total} != {args.n}", file=sys.stderr)
        return VIOLATION
    return OK


def _count_n(n: int) -> tuple[int, int]:
    return n, sum(1 for _ in free_trees(n))


def cmd_enumerate(args) -> int:
    lo = args.min_n if args.min_n is not None else args.n
    if not 1 <= lo <= args.n <= MAX_N:
        raise UsageError(f"need 1 <= --min-n <= --n <= {MAX_N}")
    ns = range(lo, args.n + 1)
    if args.count:
        if args.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                counts = dict(pool.map(_count_n, ns))
        else:
            counts = dict(map(_count_n, ns))
        for n in ns:
            _emit(args, {"n": n, "trees": counts[n]}, f"{counts[n]} trees at n={n}")
        return OK
    for n in ns:
        for t in free_trees(n):
            if args.json:
                print(json.dumps({"n": n, "edges": [list(e) for e in t.edges]}))
            elif args.dot:
                print(tree_to_dot(t), end="")
            else:
                print(format_edge_list(t))
    return OK


# -- parser ----------------------------------------------------------------------------

def _mode_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="mode", action="store_const", const=EXACT, help="rational arithmetic (default)")
    g.add_argument("--float", dest="mode", action="store_const", const=FLOAT, help="vectorised binary64 pass")
    p.set_defaults(mode=EXACT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapdist", description="Laplacian eigenvalue distribution of trees")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = verb("sigma", "eigenvalues below and above the average degree")
    p.add_argument("tree", help="edge-list file, or - for stdin")
    _mode_flags(p)
    p.set_defaults(func=cmd_sigma)

    p = verb("count", "eigenvalues in an interval")
    p.add_argument("tree")
    p.add_argument("--lo", type=_rational, required=True)
    p.add_argument("--hi", type=_rational, required=True)
    p.add_argument("--lo-open", action="store_true", help="exclude the lower end")
    p.add_argument("--hi-closed", action="store_true", help="include the upper end")
    _mode_flags(p)
    p.set_defaults(func=cmd_count)

    p = verb("verify", "exhaustive check of the lower bound on small eigenvalues")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--min-n", type=int, help="lower end of the range (with --pipeline)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--pipeline", action="store_true", help="run the transformation pipeline on every tree instead")
    p.set_defaults(func=cmd_verify)

    p = verb("transform", "rewrite a tree into its prototype and print the trace")
    p.add_argument("tree", nargs="?")
    p.add_argument("--trace", help="write the line-delimited JSON trace here")
    p.add_argument("--replay", metavar="TRACE", help="replay a recorded trace instead")
    p.add_argument("--dot", help="write the final tree as DOT")
    vg = p.add_mutually_exclusive_group()
    vg.add_argument("--verify", dest="verify", action="store_const", const=True,
                    help="recompute sigma at every step (default for n <= 200)")
    vg.add_argument("--no-verify", dest="verify", action="store_const", const=False)
    p.set_defaults(func=cmd_transform, verify=None)

    p = verb("prototype", "the extremal tree T_alpha for a given n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dot", help="write DOT here")
    p.add_argument("--edges", action="store_true", help="print the expanded edge list")
    p.set_defaults(func=cmd_prototype)

    p = verb("bench", "time one diagonalization of a seeded random tree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=[EXACT, FLOAT], default=FLOAT)
    p.add_argument("--seed", type=int, help=f"defaults to ${SEED_ENV} or 0")
    p.set_defaults(func=cmd_bench)

    p = verb("enumerate", "list all free trees on n vertices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--min-n", type=int)
    p.add_argument("--count", action="store_true", help="print counts only")
    p.add_argument("--dot", action="store_true", help="emit DOT instead of edge lists")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_enumerate)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("lapdist: --jobs must be at least 1", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lapdist: {exc}", file=sys.stderr)
        return USAGE
    except BrokenPipeError:
        return OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
