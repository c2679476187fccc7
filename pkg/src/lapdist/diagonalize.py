"""Bottom-up diagonalization of L + xI on a tree and the eigenvalue counts it yields.

One pass from the leaves to the root produces diagonal values d(v) with the same
inertia as L + xI.  Running it at -x therefore tells how many Laplacian
eigenvalues lie below, at and above x.

Exact mode works in rationals and is authoritative.  Float mode is a
vectorised binary64 pass for large benchmarks: values with |d| < 1e-9 are
counted as ambiguous and never resolved.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .numerics import to_rational
from .tree import RootedTree, Tree, average_degree

EXACT = "exact"
FLOAT = "float"
AMBIGUITY_TOL = 1e-9


class Inertia(NamedTuple):
    negative: int
    zero: int
    positive: int


@dataclass(frozen=True)
class DiagResult:
    values: Sequence  # Fractions in exact mode, a float ndarray in float mode
    detached_edges: tuple[tuple[int, int], ...]
    mode: str
    ambiguous: int = 0

    def signs(self) -> Inertia:
        if self.mode == FLOAT:
            v = np.asarray(self.values)
            neg = int(np.count_nonzero(v <= -AMBIGUITY_TOL))
            pos = int(np.count_nonzero(v >= AMBIGUITY_TOL))
            return Inertia(neg, len(v) - neg - pos, pos)
        neg = zero = 0
        for d in self.values:
            if d < 0:
                neg += 1
            elif d == 0:
                zero += 1
        return Inertia(neg, zero, len(self.values) - neg - zero)


def diagonalize(tree: RootedTree, x, mode: str = EXACT) -> DiagResult:
    """Diagonal values congruent to L + xI.

    When some children of v have value 0, the lowest-index one is set to 2,
    v is set to -1/2 and the edge from v to its parent is dropped, so v
    contributes nothing to its parent.
    """
    if mode == FLOAT:
        return _diagonalize_float(tree.base, float(x), tree.root)
    if mode != EXACT:
        raise ValueError(f"unknown mode {mode!r}")
    x = to_rational(x)
    base = tree.base
    parent = tree.parent
    adj = base.adjacency
    d: list[Fraction] = [x + len(adj[v]) for v in range(base.n)]
    detached = [False] * base.n
    removed: list[tuple[int, int]] = []
    half = Fraction(-1, 2)
    two = Fraction(2)
    for v in tree.order:
        kids = [c for c in adj[v] if parent[c] == v and not detached[c]]
        if not kids:
            continue
        zeros = [c for c in kids if d[c] == 0]
        if not zeros:
            acc = d[v]
            for c in kids:
                acc -= 1 / d[c]
            d[v] = acc
        else:
            c = min(zeros)
            d[v] = half
            d[c] = two
            p = parent[v]
            if p is not None:
                detached[v] = True
                removed.append((v, p))
    return DiagResult(tuple(d), tuple(removed), EXACT)


def _edge_array(tree: Tree) -> np.ndarray:
    flat = itertools.chain.from_iterable(tree.edges)
    return np.fromiter(flat, dtype=np.int64, count=2 * len(tree.edges)).reshape(-1, 2)


def _bfs_levels(n: int, e: np.ndarray, root: int):
    """BFS order, parent array and level boundaries, all as numpy arrays."""
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    # the matrix is already symmetric, so a directed search avoids a transpose
    order, pred = breadth_first_order(graph, root, directed=True, return_predecessors=True)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    # parent position of each BFS slot is non-decreasing, so levels split by searchsorted
    ppos = np.full(n, -1, dtype=np.int64)
    ppos[1:] = pos[pred[order[1:]]]
    bounds = [0, 1]
    while bounds[-1] < n:
        bounds.append(int(np.searchsorted(ppos, bounds[-1], side="left")))
    return order, pred, ppos, bounds


def _diagonalize_float(tree: Tree, x: float, root: int) -> DiagResult:
    n = tree.n
    if n == 1:
        return DiagResult(np.array([x]), (), FLOAT, int(abs(x) < AMBIGUITY_TOL))
    e = _edge_array(tree)
    deg = np.bincount(e.ravel(), minlength=n).astype(np.float64)
    order, _, ppos, bounds = _bfs_levels(n, e, root)
    # work in BFS-slot space: slot i holds vertex order[i]
    d = deg[order] + x
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(len(bounds) - 2, 0, -1):
            lo, hi = bounds[k], bounds[k + 1]
            inv = 1.0 / d[lo:hi]
            par = ppos[lo:hi]
            starts = np.flatnonzero(np.r_[True, par[1:] != par[:-1]])
            d[par[starts]] -= np.add.reduceat(inv, starts)
    values = np.empty(n, dtype=np.float64)
    values[order] = d
    ambiguous = int(np.count_nonzero(~(np.abs(values) >= AMBIGUITY_TOL)))
    return DiagResult(values, (), FLOAT, ambiguous)


def inertia(tree: Tree, x, root: int = 0, mode: str = EXACT) -> Inertia:
    """Eigenvalue counts (below x, equal to x, above x).

    Runs the diagonalization at -x: a negative value of L - xI is an
    eigenvalue below x.  In float mode the middle count is the ambiguous count.
    """
    if mode == FLOAT:
        return _diagonalize_float(tree, -float(x), root).signs()
    return diagonalize(RootedTree.build(tree, root), -to_rational(x), mode).signs()


def count_interval(tree: Tree, lo, hi, lo_closed: bool = True, hi_closed: bool = False, root: int = 0) -> int:
    """Number of eigenvalues (with multiplicity) in the interval between lo and hi."""
    lo, hi = to_rational(lo), to_rational(hi)
    if lo > hi:
        raise ValueError(f"inverted interval: lo={lo} > hi={hi}")
    at_lo = inertia(tree, lo, root)
    at_hi = inertia(tree, hi, root) if hi != lo else at_lo
    upper = at_hi.negative + (at_hi.zero if hi_closed else 0)
    lower = at_lo.negative + (0 if lo_closed else at_lo.zero)
    return max(upper - lower, 0)


class SigmaSplit(NamedTuple):
    below: int  # eigenvalues in [0, d_n)
    sigma: int  # eigenvalues above d_n


def sigma_split(tree: Tree, root: int = 0) -> SigmaSplit:
    """Eigenvalues below and above the average degree d_n."""
    inr = inertia(tree, average_degree(tree.n), root)
    return SigmaSplit(inr.negative, inr.positive)


def sigma(tree: Tree, root: int = 0) -> int:
    """Number of Laplacian eigenvalues above d_n."""
    return sigma_split(tree, root).sigma
