"""Exhaustive free-tree generation and the verification harnesses.

Free trees come from the Wright-Richmond-Odlyzko-McKay level-sequence
algorithm: each tree is produced once, as the canonical level sequence of
a rooted tree whose root is a centre, in constant amortised time.

Both harnesses shard the tree stream into batches, run the batches on a
process pool and merge per-batch reports.  The merge is associative and
commutative, so the report does not depend on scheduling.
"""
from __future__ import annotations

import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .diagonalize import inertia
from .tree import Tree, average_degree, from_edge_list

MAX_N = 20
BATCH = 512


# -- level sequences -----------------------------------------------------------

def _successor(levels: list[int], p: int | None = None) -> list[int] | None:
    """Next rooted level sequence in reverse lexicographic order.

    p is the last position whose level exceeds 1 (found if not given).  The
    subtree ending there is replaced by copies of the block that starts at
    its parent's last sibling-level predecessor.
    """
    if p is None:
        p = len(levels) - 1
        while levels[p] == 1:
            p -= 1
    if p == 0:
        return None
    q = p - 1
    while levels[q] != levels[p] - 1:
        q -= 1
    out = list(levels)
    for i in range(p, len(out)):
        out[i] = out[i - p + q]
    return out


def _split(levels: Sequence[int]) -> tuple[list[int], list[int]]:
    """Cut at the second level-1 entry: the first root subtree and the rest."""
    m = len(levels)
    seen = False
    for i, lv in enumerate(levels):
        if lv == 1:
            if seen:
                m = i
                break
            seen = True
    left = [lv - 1 for lv in levels[1:m]]
    rest = [0] + list(levels[m:])
    return left, rest


def _admissible(levels: list[int]) -> list[int] | None:
    """Skip ahead to the first sequence whose root is a centre (and unique if bicentral)."""
    left, rest = _split(levels)
    hl, hr = max(left), max(rest)
    ok = hr >= hl
    if ok and hr == hl:
        if len(left) > len(rest) or (len(left) == len(rest) and left > rest):
            ok = False
    if ok:
        return levels
    p = len(left)
    nxt = _successor(levels, p)
    if levels[p] > 2:
        new_left, _ = _split(nxt)
        tail = list(range(1, max(new_left) + 2))
        nxt[-len(tail):] = tail
    return nxt


def _levels_to_edges(levels: Sequence[int]) -> list[tuple[int, int]]:
    edges = []
    stack: list[int] = []
    for i, lv in enumerate(levels):
        while stack and levels[stack[-1]] >= lv:
            stack.pop()
        if stack:
            edges.append((stack[-1], i))
        stack.append(i)
    return edges


def level_sequences(n: int) -> Iterator[list[int]]:
    """Canonical level sequences, one per free tree on n >= 2 vertices."""
    levels: list[int] | None = list(range(n // 2 + 1)) + list(range(1, (n + 1) // 2))
    while levels is not None:
        levels = _admissible(levels)
        if levels is None:
            return
        yield levels
        levels = _successor(levels)


def free_trees(n: int) -> Iterator[Tree]:
    """One tree per isomorphism class on n vertices (1 <= n <= 20)."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"free_trees supports 1 <= n <= {MAX_N}, got {n}")
    if n == 1:
        yield from_edge_list(1, [])
        return
    for levels in level_sequences(n):
        yield from_edge_list(n, _levels_to_edges(levels))


# -- reports -----------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    n: int
    edges: tuple[tuple[int, int], ...]
    counts: dict  # which bound failed and the observed counts
    message: str = ""


def _violation_key(v: Violation) -> tuple:
    return (v.n, v.edges, v.message, repr(sorted(v.counts.items())))


@dataclass
class VerifyReport:
    n_range: tuple[int, int]
    trees_checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    min_margin: int | None = None
    wall_time: float = 0.0
    per_n: dict[int, int] = field(default_factory=dict)
    per_n_margin: dict[int, int] = field(default_factory=dict)
    steps: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "VerifyReport") -> "VerifyReport":
        lo = min(self.n_range[0], other.n_range[0])
        hi = max(self.n_range[1], other.n_range[1])
        margins = [m for m in (self.min_margin, other.min_margin) if m is not None]
        per_n = dict(self.per_n)
        for k, v in other.per_n.items():
            per_n[k] = per_n.get(k, 0) + v
        per_margin = dict(self.per_n_margin)
        for k, v in other.per_n_margin.items():
            per_margin[k] = min(per_margin.get(k, v), v)
        return VerifyReport(
            (lo, hi),
            self.trees_checked + other.trees_checked,
            sorted(self.violations + other.violations, key=_violation_key),
            min(margins) if margins else None,
            self.wall_time + other.wall_time,
            per_n,
            per_margin,
            self.steps + other.steps,
        )

    def violations_at(self, n: int) -> int:
        return sum(1 for v in self.violations if v.n == n)

    def summary_lines(self) -> list[str]:
        lines = []
        for n in sorted(self.per_n):
            m = self.per_n_margin.get(n)
            part = f", min margin {m}" if m is not None else ""
            lines.append(f"{self.per_n[n]} trees at n={n}{part}, {self.violations_at(n)} violations")
        margin = "n/a" if self.min_margin is None else str(self.min_margin)
        lines.append(
            f"{self.trees_checked} trees for n={self.n_range[0]}..{self.n_range[1]}, "
            f"min margin {margin}, {len(self.violations)} violations, {self.wall_time:.2f}s"
        )
        return lines

    def to_dict(self) -> dict:
        return {
            "n_range": list(self.n_range),
            "trees_checked": self.trees_checked,
            "violations": [
                {"n": v.n, "edges": [list(e) for e in v.edges], "counts": v.counts, "message": v.message}
                for v in self.violations
            ],
            "min_margin": self.min_margin,
            "wall_time": self.wall_time,
            "per_n": {str(k): v for k, v in sorted(self.per_n.items())},
            "per_n_margin": {str(k): v for k, v in sorted(self.per_n_margin.items())},
            "steps": self.steps,
        }


def ceil_half(n: int) -> int:
    return (n + 1) // 2


def tree_margins(tree: Tree) -> tuple[int, int]:
    """(m[0, d_n), m[0, 2)) for one tree, both exact."""
    below_dn = inertia(tree, average_degree(tree.n)).negative
    below_2 = inertia(tree, Fraction(2)).negative
    return below_dn, below_2


# -- batch workers (top level so they pickle) ----------------------------------------

Batch = tuple[int, list[tuple[tuple[int, int], ...]]]


def _check_conjecture_batch(batch: Batch) -> VerifyReport:
    n, edge_lists = batch
    t0 = time.perf_counter()
    need = ceil_half(n)
    rep = VerifyReport((n, n), per_n={n: len(edge_lists)})
    margin = None
    for edges in edge_lists:
        tree = from_edge_list(n, edges)
        below_dn, below_2 = tree_margins(tree)
        m = below_dn - need
        margin = m if margin is None else min(margin, m)
        if below_dn < need or below_2 < need:
            counts = {"m_below_dn": below_dn, "m_below_2": below_2, "ceil_half": need}
            rep.violations.append(Violation(n, edges, counts))
    rep.trees_checked = len(edge_lists)
    rep.min_margin = margin
    if margin is not None:
        rep.per_n_margin[n] = margin
    rep.wall_time = time.perf_counter() - t0
    return rep


def _check_pipeline_batch(batch: Batch) -> VerifyReport:
    from .transforms import ProperViolation, transform

    n, edge_lists = batch
    t0 = time.perf_counter()
    rep = VerifyReport((n, n), per_n={n: len(edge_lists)})
    for edges in edge_lists:
        tree = from_edge_list(n, edges)
        try:
            trace = transform(tree, verify=True)
        except ProperViolation as exc:
            rep.violations.append(Violation(n, edges, {"steps": _records_of(exc.steps)}, str(exc)))
            continue
        except (AssertionError, ValueError) as exc:
            rep.violations.append(Violation(n, edges, {}, f"{type(exc).__name__}: {exc}"))
            continue
        rep.steps += len(trace.steps)
    rep.trees_checked = len(edge_lists)
    rep.wall_time = time.perf_counter() - t0
    return rep


def _records_of(steps) -> list[dict]:
    from .trace_io import step_to_record

    return [step_to_record(i, s) for i, s in enumerate(steps)]


def _batches(ns: Iterable[int], size: int = BATCH) -> Iterator[Batch]:
    for n in ns:
        buf: list[tuple[tuple[int, int], ...]] = []
        for t in free_trees(n):
            buf.append(t.edges)
            if len(buf) == size:
                yield n, buf
                buf = []
        if buf:
            yield n, buf


def _run(fn: Callable[[Batch], VerifyReport], ns: Sequence[int], workers: int,
         stop_early: bool = False) -> VerifyReport:
    t0 = time.perf_counter()
    total = VerifyReport((min(ns), max(ns)), per_n={n: 0 for n in ns})
    if workers <= 1:
        for b in _batches(ns):
            total = total.merge(fn(b))
            if stop_early and total.violations:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = set()
            source = _batches(ns)
            exhausted = False
            while pending or not exhausted:
                while not exhausted and len(pending) < 2 * workers:
                    b = next(source, None)
                    if b is None:
                        exhausted = True
                    else:
                        pending.add(pool.submit(fn, b))
                if not pending:
                    break
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for f in done:
                    total = total.merge(f.result())
                if stop_early and total.violations:
                    for f in pending:
                        f.cancel()
                    break
    total.wall_time = time.perf_counter() - t0
    return total


def verify_conjecture(n_max: int, workers: int = 1) -> VerifyReport:
    """Check m[0, d_n) >= ceil(n/2) and m[0, 2) >= ceil(n/2) on every free tree, 2 <= n <= n_max."""
    if not 2 <= n_max <= MAX_N:
        raise ValueError(f"n_max must lie in 2..{MAX_N}")
    return _run(_check_conjecture_batch, list(range(2, n_max + 1)), workers)


class PipelineFailure(AssertionError):
    """A transform failed; carries the report with the serialised witness."""

    def __init__(self, report: VerifyReport):
        v = report.violations[0]
        super().__init__(f"transform failed on n={v.n} tree {list(v.edges)}: {v.message}")
        self.report = report


def verify_pipeline(n_lo: int, n_hi: int, workers: int = 1, raise_on_failure: bool = True) -> VerifyReport:
    """Run transform with sigma checks on every free tree with n_lo <= n <= n_hi."""
    if not 8 <= n_lo <= n_hi <= MAX_N:
        raise ValueError(f"need 8 <= n_lo <= n_hi <= {MAX_N}")
    report = _run(_check_pipeline_batch, list(range(n_lo, n_hi + 1)), workers, stop_early=raise_on_failure)
    if report.violations and raise_on_failure:
        raise PipelineFailure(report)
    return report


def free_tree_count(n: int) -> int:
    return sum(1 for _ in free_trees(n))


def default_workers() -> int:
    import os

    return max(1, min(4, os.cpu_count() or 1))


__all__ = [
    "PipelineFailure",
    "VerifyReport",
    "Violation",
    "ceil_half",
    "default_workers",
    "free_tree_count",
    "free_trees",
    "level_sequences",
    "tree_margins",
    "verify_conjecture",
    "verify_pipeline",
]
