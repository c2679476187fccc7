"""Proper transformations on the (P_q, S_r) representation.

A transformation is proper when it keeps the vertex count and does not lower
sigma, the number of Laplacian eigenvalues above the average degree.  The
pipeline in :func:`transform` rewrites any tree with n >= 8 into the prototype
T_alpha for alpha = n mod 4, recording every primitive rewrite.  With
``verify`` on, sigma is recomputed on both sides of every primitive step and
a decrease raises :class:`ProperViolation`.

Primitive kinds: StarUp, StarDown, StarStarRegroup, StarStar11, StarStar10,
Collapse, Rebase and PathCase.  Reduce and OneStarCase are macro records that
summarise a run of primitives and are skipped on replay.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .diagonalize import sigma as _sigma_of_tree
from .gpp import (
    Gpp,
    GppTree,
    expand,
    initiate_representation,
    render_gpps,
    single_vertex,
    starlike_vertices,
)
from .tree import Tree, canonical_code

STAR_UP = "StarUp"
STAR_DOWN = "StarDown"
REGROUP = "StarStarRegroup"
STAR_STAR_11 = "StarStar11"
STAR_STAR_10 = "StarStar10"
REDUCE = "Reduce"
COLLAPSE = "Collapse"
REBASE = "Rebase"
PATH_CASE = "PathCase"
ONE_STAR_CASE = "OneStarCase"
MACRO_KINDS = frozenset({REDUCE, ONE_STAR_CASE})

MIN_N = 8


class TransformRejected(ValueError):
    """A rewrite was asked for outside its precondition."""


class ProperViolation(AssertionError):
    """sigma decreased across a step.  Carries the steps recorded so far."""

    def __init__(self, message: str, steps: Sequence["TransformStep"] = (), initial: Tree | None = None):
        super().__init__(message)
        self.steps = list(steps)
        self.initial = initial


@dataclass(frozen=True)
class TransformStep:
    kind: str
    vertex: int
    before: str
    after: str
    sigma_before: int | None
    sigma_after: int | None
    args: dict = field(default_factory=dict)
    note: str = ""

    @property
    def macro(self) -> bool:
        return self.kind in MACRO_KINDS


@dataclass
class Trace:
    initial: Tree
    initial_rep: GppTree
    steps: list[TransformStep]
    final: GppTree

    def primitive_steps(self) -> list[TransformStep]:
        return [s for s in self.steps if not s.macro]


SigmaFn = Callable[[GppTree], int]


def rep_key(rep: GppTree) -> tuple:
    return (
        tuple(sorted((v, tuple(sorted(nb))) for v, nb in rep.skeleton.items())),
        tuple(sorted((v, tuple(gs)) for v, gs in rep.pendants.items())),
    )


def sigma_of_rep(rep: GppTree) -> int:
    return _sigma_of_tree(expand(rep))


def _bound(rep: GppTree) -> int:
    if rep.n_total < MIN_N:
        raise TransformRejected(f"transformations need n >= {MIN_N}, got {rep.n_total}")
    return rep.n_total // 4


def _gpp_at(rep: GppTree, v: int, idx: int) -> Gpp:
    gs = rep.gpps(v)
    if not 0 <= idx < len(gs):
        raise TransformRejected(f"vertex {v} has no gpp #{idx}")
    return gs[idx]


def _finish(kind, rep, new, v, args, verify, sigma_fn, note="", before=None, after=None):
    new.validate() if __debug__ else None
    if new.n_total != rep.n_total or new.size() != rep.size():
        raise AssertionError("vertex count changed")
    sb = sa = None
    if verify:
        fn = sigma_fn or sigma_of_rep
        sb, sa = fn(rep), fn(new)
    step = TransformStep(
        kind,
        v,
        before if before is not None else render_gpps(rep.gpps(v)),
        after if after is not None else render_gpps(new.gpps(v)),
        sb,
        sa,
        args,
        note,
    )
    if verify and sa < sb:
        raise ProperViolation(f"{kind} at {v} lowered sigma {sb} -> {sa}", [step])
    return new, step


def _real_degree(rep: GppTree, v: int) -> int:
    return rep.skeleton_degree(v) + sum(1 if g.q else g.r for g in rep.gpps(v))


# -- primitives ---------------------------------------------------------------

def star_up(rep: GppTree, vertex: int, gpp_index: int, *, verify: bool = True, sigma_fn: SigmaFn | None = None):
    """P_q*S_r -> P_{q-2}*S_{r+1}: move the sun two steps toward the anchor."""
    R = _bound(rep)
    g = _gpp_at(rep, vertex, gpp_index)
    if g.q < 2:
        raise TransformRejected(f"star-up needs q >= 2, got {g}")
    if g.r > R - 1:
        raise TransformRejected(f"star-up needs r <= {R - 1}, got {g}")
    if _real_degree(rep, vertex) < 2:
        raise TransformRejected(f"star-up anchor {vertex} is a leaf")
    gs = list(rep.gpps(vertex))
    gs[gpp_index] = Gpp(g.q - 2, g.r + 1)
    return _finish(STAR_UP, rep, rep.with_gpps(vertex, gs), vertex, {"index": gpp_index}, verify, sigma_fn)


def star_down(rep: GppTree, vertex: int, s_index: int, p2_index: int, *, verify: bool = True,
              sigma_fn: SigmaFn | None = None):
    """P_1*S_r (+) P_2 -> P_1*S_{r+1}.

    The P_2 is one ray of a sun sitting at the anchor, i.e. taken from a
    P_0*S_b gpp (b >= 1); that gpp disappears once its last ray is gone.
    """
    R = _bound(rep)
    s = _gpp_at(rep, vertex, s_index)
    p2 = _gpp_at(rep, vertex, p2_index)
    if s_index == p2_index:
        raise TransformRejected("star-down needs two distinct gpps")
    if s.q != 1:
        raise TransformRejected(f"star-down target must be P_1*S_r, got {s}")
    if s.r > R - 1:
        raise TransformRejected(f"star-down needs r <= {R - 1}, got {s}")
    if p2.q != 0:
        raise TransformRejected(f"star-down source must be P_0*S_b, got {p2}")
    gs = list(rep.gpps(vertex))
    gs[s_index] = Gpp(1, s.r + 1)
    if p2.r == 1:
        del gs[p2_index]
    else:
        gs[p2_index] = Gpp(0, p2.r - 1)
    args = {"s_index": s_index, "p2_index": p2_index}
    return _finish(STAR_DOWN, rep, rep.with_gpps(vertex, gs), vertex, args, verify, sigma_fn)


def star_star(rep: GppTree, vertex: int, i: int, j: int, regroup: tuple[int, int] | None = None, *,
              verify: bool = True, sigma_fn: SigmaFn | None = None):
    """Combine two gpps with q in {0, 1} at one anchor.

    (0, 0): redistribute the rays as ``regroup`` = (r1', r2'); r2' = 0 merges.
    (1, 1): -> P_2*S_{r1+r2}, or P_0*S_{r1+r2-R} (+) P_2*S_R on overflow.
    (1, 0): -> P_1*S_{r1+r2}, or P_0*S_{r1+r2-R} (+) P_1*S_R on overflow.
    The result takes position i; position j is reused for a second gpp or
    dropped.
    """
    R = _bound(rep)
    a, b = _gpp_at(rep, vertex, i), _gpp_at(rep, vertex, j)
    if i == j:
        raise TransformRejected("star-star needs two distinct gpps")
    if a.q > 1 or b.q > 1:
        raise TransformRejected(f"star-star needs q in {{0, 1}}, got {a} and {b}")
    total = a.r + b.r
    if a.q == 0 and b.q == 0:
        if regroup is None:
            raise TransformRejected("a (0, 0) star-star needs a regroup split")
        r1, r2 = regroup
        if r1 + r2 != total or r1 < 1 or r2 < 0:
            raise TransformRejected(f"regroup {regroup} does not split {total} rays")
        out = [Gpp(0, r1)] + ([Gpp(0, r2)] if r2 else [])
        kind = REGROUP
    else:
        if regroup is not None:
            raise TransformRejected("regroup only applies to two P_0 gpps")
        if a.r > R or b.r > R:
            raise TransformRejected(f"star-star needs r <= {R}, got {a} and {b}")
        q = 2 if a.q == b.q == 1 else 1
        kind = STAR_STAR_11 if q == 2 else STAR_STAR_10
        out = [Gpp(q, total)] if total <= R else [Gpp(q, R), Gpp(0, total - R)]
    gs = list(rep.gpps(vertex))
    gs[i] = out[0]
    if len(out) == 2:
        gs[j] = out[1]
    else:
        del gs[j]
    args = {"i": i, "j": j, "regroup": list(regroup) if regroup else None}
    return _finish(kind, rep, rep.with_gpps(vertex, gs), vertex, args, verify, sigma_fn)


def collapse(rep: GppTree, vertex: int, *, verify: bool = True, sigma_fn: SigmaFn | None = None):
    """Fold a skeleton leaf carrying one gpp into the nearest branching vertex."""
    gs = rep.gpps(vertex)
    if rep.skeleton_degree(vertex) != 1 or len(gs) != 1:
        raise TransformRejected(f"collapse needs a skeleton leaf with one gpp at {vertex}")
    (g,) = gs
    removed = [vertex]
    prev, cur, length = vertex, rep.skeleton[vertex][0], 1
    while rep.rep_degree(cur) <= 2:
        if rep.gpps(cur) or rep.skeleton_degree(cur) != 2:
            raise AssertionError(f"unexpected degree-2 vertex {cur} while collapsing")
        removed.append(cur)
        prev, cur = cur, next(w for w in rep.skeleton[cur] if w != prev)
        length += 1
    skeleton = {v: nb for v, nb in rep.skeleton.items() if v not in removed}
    skeleton[cur] = tuple(w for w in rep.skeleton[cur] if w != prev)
    pend = {v: p for v, p in rep.pendants.items() if v not in removed}
    pend[cur] = rep.gpps(cur) + (Gpp(g.q + length, g.r),)
    new = GppTree(skeleton, pend, rep.n_total)
    before = f"{vertex}: {g} at distance {length} from {cur}"
    after = f"{cur}: {render_gpps(pend[cur])}"
    return _finish(COLLAPSE, rep, new, cur, {"from": vertex}, verify, sigma_fn, before=before, after=after)


def rebase(rep: GppTree, q: tuple[int, int], *, verify: bool = True, sigma_fn: SigmaFn | None = None):
    """Move the anchor along the path joining the two suns of a two-gpp tree."""
    u = rep.anchor()
    gs = rep.gpps(u)
    if len(gs) != 2:
        raise TransformRejected("rebase needs exactly two gpps at a single anchor")
    q1, q2 = q
    if q1 + q2 != gs[0].q + gs[1].q or q1 < 0 or q2 < 0:
        raise TransformRejected(f"rebase {q} does not preserve the path length")
    try:
        new_gs = (Gpp(q1, gs[0].r), Gpp(q2, gs[1].r))
    except ValueError as exc:
        raise TransformRejected(str(exc)) from None
    return _finish(REBASE, rep, rep.with_gpps(u, new_gs), u, {"q": [q1, q2]}, verify, sigma_fn)


def t_star_to_t3(rep: GppTree, *, verify: bool = True, sigma_fn: SigmaFn | None = None):
    """u + P_0*S_R (+) P_0*S_{R+1} -> u + P_1*S_R (+) P_1*S_R for n = 4R + 3."""
    R = _bound(rep)
    u = rep.anchor()
    if rep.n_total % 4 != 3 or sorted(rep.gpps(u)) != [Gpp(0, R), Gpp(0, R + 1)]:
        raise TransformRejected("not the tree P_0*S_R (+) P_0*S_{R+1} with n = 4R + 3")
    new = rep.with_gpps(u, (Gpp(1, R), Gpp(1, R)))
    return _finish(PATH_CASE, rep, new, u, {}, verify, sigma_fn)


# -- recording -----------------------------------------------------------------

class _Run:
    """Applies rewrites to a current representation and keeps the step log."""

    def __init__(self, rep: GppTree, verify: bool, sigma_fn: SigmaFn | None = None):
        self.rep = rep
        self.verify = verify
        self.steps: list[TransformStep] = []
        self._cache: dict[tuple, int] = {}
        self._outer = sigma_fn

    def sigma(self, rep: GppTree) -> int:
        if self._outer is not None:
            return self._outer(rep)
        key = rep_key(rep)
        if key not in self._cache:
            self._cache[key] = sigma_of_rep(rep)
        return self._cache[key]

    def apply(self, fn, *args, **kwargs) -> TransformStep:
        try:
            self.rep, step = fn(self.rep, *args, verify=self.verify, sigma_fn=self.sigma, **kwargs)
        except ProperViolation as exc:
            exc.steps = self.steps + exc.steps
            raise
        self.steps.append(step)
        return step

    def macro(self, kind: str, vertex: int, before_rep: GppTree, before: str, after: str, note: str = ""):
        sb = sa = None
        if self.verify:
            sb, sa = self.sigma(before_rep), self.sigma(self.rep)
        self.steps.append(TransformStep(kind, vertex, before, after, sb, sa, {}, note))

    # conveniences on the single anchor
    @property
    def u(self) -> int:
        return self.rep.anchor()

    def gpps(self) -> tuple[Gpp, ...]:
        return self.rep.gpps(self.u)


# -- ReduceStarVertex --------------------------------------------------------------

def _saturate(run: _Run, v: int, idx: int) -> None:
    """Star-up while allowed: stops at q < 2 or at a full sun (r = R)."""
    R = run.rep.n_total // 4
    while run.rep.gpps(v)[idx].q >= 2 and run.rep.gpps(v)[idx].r <= R - 1:
        run.apply(star_up, v, idx)


def _combine_into(run: _Run, v: int, positions: list[int]) -> int:
    """Merge the gpps at ``positions`` (ascending) into one; returns its position."""
    positions = sorted(positions)
    acc = positions[0]
    _saturate(run, v, acc)
    removed = 0
    for p in positions[1:]:
        j = p - removed
        _saturate(run, v, j)
        a, b = run.rep.gpps(v)[acc], run.rep.gpps(v)[j]
        if a.q == 0 and b.q == 0:
            run.apply(star_star, v, acc, j, (a.r + b.r, 0))
        else:
            run.apply(star_star, v, acc, j)
            if run.rep.gpps(v)[acc].q == 2:
                run.apply(star_up, v, acc)
        removed += 1
    return acc


def reduce_star_vertex(rep: GppTree, vertex: int, *, verify: bool = True, positions: Iterable[int] | None = None,
                       collapse_leaf: bool = True, sigma_fn: SigmaFn | None = None):
    """Replace the gpps at ``vertex`` by the single gpp P_{q'}*S_{r'}.

    q' = (sum of q) mod 2 and r' = (w - q') / 2, where w is their total weight.
    The rewrite is carried out as star-ups and pairwise star-stars so every
    piece is checked on its own.  If the vertex is then a skeleton leaf it is
    collapsed into the nearest branching vertex.  ``positions`` restricts the
    reduction to some of the gpps (without the collapse).
    """
    run = _Run(rep, verify, sigma_fn)
    _reduce_into(run, vertex, positions, collapse_leaf)
    return run.rep, run.steps


def _reduce_into(run: _Run, v: int, positions: Iterable[int] | None = None, collapse_leaf: bool = True) -> int:
    R = _bound(run.rep)
    start = run.rep
    gs = start.gpps(v)
    if positions is None:
        positions = list(range(len(gs)))
        if not start.is_starlike(v):
            raise TransformRejected(f"vertex {v} is not starlike")
    else:
        positions = sorted(set(positions))
        collapse_leaf = False
    chosen = [gs[p] for p in positions]
    w = sum(g.weight for g in chosen)
    if w > 2 * R:
        raise TransformRejected(f"weight {w} at {v} exceeds 2*floor(n/4) = {2 * R}")
    q_expected = sum(g.q for g in chosen) % 2
    r_expected = (w - q_expected) // 2
    before = render_gpps(chosen)
    if len(positions) < 2:
        return positions[0]
    pos = _combine_into(run, v, positions)
    got = run.rep.gpps(v)[pos]
    if (got.q, got.r) != (q_expected, r_expected):
        raise AssertionError(f"reduction produced {got}, expected P_{q_expected}*S_{r_expected}")
    run.macro(REDUCE, v, start, before, str(got))
    if collapse_leaf and run.rep.skeleton_degree(v) == 1 and len(run.rep.gpps(v)) == 1:
        run.apply(collapse, v)
    return pos


# -- helpers for the single-anchor case machines ---------------------------------------

def _fill(run: _Run, target: int, source: int, down: bool = False) -> None:
    """Move rays from the P_0 gpp at ``source`` onto the P_1 gpp at ``target`` until it has R.

    One star-star when the source sun is small enough, else (or when
    ``down`` is set) one star-down per ray.
    """
    R = run.rep.n_total // 4
    u = run.u
    t, s = run.gpps()[target], run.gpps()[source]
    if t.q != 1 or s.q != 0:
        raise AssertionError(f"fill needs P_1 target and P_0 source, got {t}, {s}")
    if t.r >= R:
        return
    if s.r <= R and not down:
        run.apply(star_star, u, target, source)
        return
    for _ in range(min(R - t.r, s.r)):
        run.apply(star_down, u, target, source)


def _find(run: _Run, gpp: Gpp, exclude: Iterable[int] = ()) -> int:
    ex = set(exclude)
    return next(i for i, g in enumerate(run.gpps()) if g == gpp and i not in ex)


def _fill_all(run: _Run, down: bool = False) -> None:
    """Fill every P_1 gpp with r < R from the P_0 gpps, in position order."""
    R = run.rep.n_total // 4
    while True:
        gs = run.gpps()
        targets = [i for i, g in enumerate(gs) if g.q == 1 and g.r < R]
        sources = [i for i, g in enumerate(gs) if g.q == 0]
        if not targets or not sources:
            return
        _fill(run, targets[0], sources[0], down)


def _regroup_zeros(run: _Run, sizes: Sequence[int] | None = None) -> None:
    """Merge all P_0 gpps, then split into two of the given sizes (if any)."""
    u = run.u
    zeros = [i for i, g in enumerate(run.gpps()) if g.q == 0]
    while len(zeros) > 2 or (len(zeros) == 2 and sizes is None):
        a, b = zeros[-2], zeros[-1]
        total = run.gpps()[a].r + run.gpps()[b].r
        run.apply(star_star, u, a, b, (total, 0))
        zeros = [i for i, g in enumerate(run.gpps()) if g.q == 0]
    if sizes is None:
        return
    if len(zeros) != 2:
        raise AssertionError("need two P_0 gpps to split")
    a, b = zeros
    gs = run.gpps()
    if sorted((gs[a].r, gs[b].r)) != sorted(sizes):
        run.apply(star_star, u, a, b, tuple(sizes))


def _regroup_all_zero_to(run: _Run, sizes: tuple[int, int]) -> None:
    """All gpps are P_0: rearrange them into exactly two suns of the given sizes."""
    u = run.u
    if any(g.q for g in run.gpps()):
        raise AssertionError("regroup_all_zero_to needs only P_0 gpps")
    while len(run.gpps()) > 2:
        gs = run.gpps()
        run.apply(star_star, u, len(gs) - 2, len(gs) - 1, (gs[-2].r + gs[-1].r, 0))
    gs = run.gpps()
    if len(gs) == 1:
        raise AssertionError("cannot split a single gpp")
    if (gs[0].r, gs[1].r) != tuple(sizes):
        run.apply(star_star, u, 0, 1, tuple(sizes))


# -- no starlike vertex --------------------------------------------------------------

def _is_prototype(rep: GppTree) -> bool:
    return len(rep.skeleton) == 1 and sorted(rep.gpps(rep.anchor())) == sorted(prototype_gpps(rep.n_total))


def _zero_starlike(run: _Run) -> None:
    n = run.rep.n_total
    R, alpha = n // 4, n % 4
    for _ in range(8 * n + 16):
        if _is_prototype(run.rep):
            return
        g1, g2 = run.gpps()
        if g1.r >= R and g2.r >= R:
            # both suns full: only alpha = 3 leaves anything to do
            if alpha != 3:
                raise AssertionError(f"unexpected terminal shape {run.rep.render()}")
            if g1.q + g2.q == 2:
                run.apply(rebase, (1, 1))
            else:
                run.apply(t_star_to_t3)
            continue
        qs = g1.q + g2.q
        if qs >= 2:
            # anchor at the far sun so the whole path hangs on the smaller one
            gs = (g1, g2)
            for target in sorted((i for i in (0, 1) if gs[i].r < R), key=lambda i: (gs[i].r, i)):
                q_other = 0 if gs[1 - target].r >= 1 else 1
                if qs - q_other >= 2:
                    break
            else:
                raise AssertionError(f"no star-up available at {run.rep.render()}")
            want = [0, 0]
            want[target], want[1 - target] = qs - q_other, q_other
            if [g1.q, g2.q] != want:
                run.apply(rebase, tuple(want))
            run.apply(star_up, run.u, target)
            continue
        if qs == 0:
            if alpha == 1:
                _regroup_all_zero_to(run, (R, R))
            elif alpha == 3:
                _regroup_all_zero_to(run, (R, R + 1))
            else:
                raise AssertionError(f"parity: two P_0 gpps with n = {n}")
            continue
        # one P_1 and one P_0: put the P_1 on the smaller sun, then fill it
        one = 0 if g1.q == 1 else 1
        if (g1, g2)[one].r > (g1, g2)[1 - one].r:
            run.apply(rebase, (g2.q, g1.q))
            one = 1 - one
        before = len(run.steps)
        _fill(run, one, 1 - one)
        if len(run.steps) == before:
            raise AssertionError(f"no progress at {run.rep.render()}")
    raise AssertionError(f"path case did not terminate: {run.rep.render()}")


def reduce_zero_starlike(rep: GppTree, *, verify: bool = True):
    """Two gpps at a single anchor -> prototype(n)."""
    _bound(rep)
    if starlike_vertices(rep).vertices:
        raise TransformRejected("representation still has starlike vertices")
    run = _Run(rep, verify)
    _zero_starlike(run)
    return run.rep, run.steps


# -- one starlike vertex ---------------------------------------------------------------

def _one_starlike(run: _Run) -> None:
    n = run.rep.n_total
    R, alpha = n // 4, n % 4
    u = run.u
    for _ in range(8 * n + 16):
        gs = run.gpps()
        if len(gs) <= 2:
            _zero_starlike(run)
            return
        # shorten every path that still can be
        for i, g in enumerate(gs):
            if g.q >= 2 and g.r <= R - 1:
                _saturate(run, u, i)
        gs = run.gpps()
        L = len(gs)
        order = sorted(range(L), key=lambda i: (gs[i].r, i))
        small = [i for i in order if gs[i].r <= R - 1]
        big = [i for i in order if gs[i].r >= R]
        l0 = len(small)
        if l0 < L - 2:
            raise AssertionError(f"three suns of size >= R at {run.rep.render()}")
        if any(gs[i].q > 1 for i in small):
            raise AssertionError("unsaturated small gpp")
        if l0 == L - 2:
            _one_star_case1(run, alpha, R, small, big)
        elif l0 == L - 1:
            _one_star_case2(run, alpha, R, small, big[0])
        else:
            _one_star_case3(run, alpha, R, order)
    raise AssertionError(f"one-starlike case did not terminate: {run.rep.render()}")


def _w(run: _Run, idx: Iterable[int]) -> int:
    gs = run.gpps()
    return sum(gs[i].weight for i in idx)


def _reduce_set(run: _Run, idx: Iterable[int]) -> int:
    return _reduce_into(run, run.u, list(idx), collapse_leaf=False)


def _one_star_case1(run, alpha, R, small, big):
    gs = run.gpps()
    if alpha not in (2, 3):
        raise AssertionError(f"two full suns impossible for alpha = {alpha}")
    if alpha == 3 and all(g.q == 0 for g in gs):
        # u + P_0*S_1 (+) P_0*S_R (+) P_0*S_R: regroup into P_0*S_R (+) P_0*S_{R+1}
        _regroup_all_zero_to(run, (R, R + 1))
        return
    # star-downs peel rays off the full suns one at a time
    _fill_all(run, down=True)


def _one_star_case2(run, alpha, R, small, big):
    gs = run.gpps()
    ws = _w(run, small)
    if alpha in (0, 1) or (alpha == 2 and ws <= 2 * R):
        _reduce_set(run, small)
        return
    if alpha == 2:
        # weight 2R + 1: keep one P_1 aside, merge the rest, then fill it
        i = next(k for k in small if gs[k].q == 1)
        kept = gs[i]
        rest = [k for k in small if k != i]
        pos = _reduce_set(run, rest)
        _fill(run, _find(run, kept, exclude=[pos]), pos)
        return
    # alpha == 3
    if all(gs[k] == Gpp(1, 0) for k in small):
        _reduce_set(run, small[:2])
        return
    j = next(k for k in small if gs[k].r >= 1)
    xj, xl = gs[j], gs[big]
    x = _reduce_set(run, [k for k in small if k != j])
    j = _find(run, xj, exclude=[x])
    last = _find(run, xl, exclude=[x, j])
    gs = run.gpps()
    if xl.q >= 2 or (xl.q == 1 and gs[j].weight + gs[x].weight <= 2 * R):
        _reduce_set(run, [j, x])
        return
    if xl.q == 1:
        a, b = (j, x) if gs[j].q == 1 else (x, j)
        _fill(run, a, b)
        return
    # q_L = 0: bring X_j up to R rays out of X_L
    if gs[j].q == 0:
        run.apply(star_star, run.u, j, last, (R, gs[j].r + gs[last].r - R))
    else:
        _fill(run, j, last)
    if all(g.q == 0 for g in run.gpps()):
        _regroup_all_zero_to(run, (R, R + 1))
    else:
        _fill_all(run)


def _fill_pair(run: _Run, a: int, b: int) -> None:
    gs = run.gpps()
    t, src = (a, b) if gs[a].q == 1 else (b, a)
    _fill(run, t, src)


def _one_star_case3(run, alpha, R, order):
    gs = run.gpps()
    L = len(gs)
    # first merge any pair that fits under the weight bound
    w, a, b = min((gs[a].weight + gs[b].weight, a, b) for a in range(L) for b in range(a + 1, L))
    if w <= 2 * R:
        _reduce_set(run, [a, b])
        return
    x1, x2, rest = order[0], order[1], order[2:]
    if alpha == 3 and L == 3:
        if all(g.q == 0 for g in gs):
            _regroup_all_zero_to(run, (R, R + 1))
        else:
            _fill_all(run)
        return
    if alpha == 3:
        # pairs (X1, X2) and (X3, X') each weigh 2R + 1: fill within each pair
        keep = [gs[x1], gs[x2], gs[rest[0]]]
        ix = _reduce_set(run, rest[1:])
        i1 = _find(run, keep[0], exclude=[ix])
        i2 = _find(run, keep[1], exclude=[ix, i1])
        i3 = _find(run, keep[2], exclude=[ix, i1, i2])
        gs = run.gpps()
        if gs[i3].weight + gs[ix].weight <= 2 * R:
            _reduce_set(run, [i3, ix])
            return
        second = (gs[i3], gs[ix])
        _fill_pair(run, i1, i2)
        i3 = _find(run, second[0])
        _fill_pair(run, i3, _find(run, second[1], exclude=[i3]))
        return
    keep = [gs[x1], gs[x2]]
    ix = _reduce_set(run, rest)
    i1 = _find(run, keep[0], exclude=[ix])
    i2 = _find(run, keep[1], exclude=[ix, i1])
    gs = run.gpps()
    ones = [k for k, g in enumerate(gs) if g.q == 1]
    if alpha == 1 and not ones:
        _regroup_all_zero_to(run, (R, R))
        return
    if len(ones) == 3:
        # 1-1 star-star on the two smallest, spill any overflow into the third
        run.apply(star_star, run.u, i1, i2)
        zero = [k for k, g in enumerate(run.gpps()) if g.q == 0]
        if zero:
            third = next(k for k, g in enumerate(run.gpps()) if g.q == 1)
            _fill(run, third, zero[0])
        return
    _fill_all(run)
    if sum(1 for g in run.gpps() if g.q == 0) > 1:
        _regroup_zeros(run)


def reduce_one_starlike(rep: GppTree, *, verify: bool = True):
    """A single anchor with at least three gpps -> prototype(n)."""
    _bound(rep)
    report = starlike_vertices(rep)
    if len(report) != 1 or len(rep.skeleton) != 1:
        raise TransformRejected("need exactly one starlike vertex on a one-vertex skeleton")
    run = _Run(rep, verify)
    _one_starlike(run)
    return run.rep, run.steps


# -- prototypes and closed forms ---------------------------------------------------------

def prototype_gpps(n: int) -> tuple[Gpp, Gpp]:
    R, alpha = n // 4, n % 4
    return {
        0: (Gpp(0, R - 1), Gpp(1, R)),
        1: (Gpp(0, R), Gpp(0, R)),
        2: (Gpp(0, R), Gpp(1, R)),
        3: (Gpp(1, R), Gpp(1, R)),
    }[alpha]


def prototype(n: int) -> GppTree:
    """T_alpha for n = 4R + alpha: a single anchor carrying two gpps."""
    if n < MIN_N:
        raise TransformRejected(f"prototypes are defined for n >= {MIN_N}")
    return single_vertex(0, prototype_gpps(n), n)


def closed_form_f(alpha: int, r: int) -> Fraction:
    """Diagonal value at the anchor of T_alpha (alpha in {0, 2, 3}) at x = -d_n."""
    if r < 2:
        raise ValueError("r must be at least 2")
    if alpha == 0:
        num = 64 * r**6 + 64 * r**5 - 36 * r**4 + 36 * r**3 - 32 * r**2 + 10 * r - 1
        return Fraction(num, 2 * r * (4 * r**2 + 2 * r - 1) * (2 * r**2 - 4 * r + 1))
    if alpha == 2:
        num = 64 * r**6 + 256 * r**5 + 348 * r**4 + 260 * r**3 + 95 * r**2 + 16 * r + 1
        return Fraction(num, (2 * r + 1) * (4 * r**2 + 6 * r + 1) * r * (6 * r + 1))
    if alpha == 3:
        num = 4 * (128 * r**4 + 448 * r**3 + 576 * r**2 + 302 * r + 55)
        return Fraction(num, (4 * r + 3) * (64 * r**2 + 52 * r + 11))
    raise ValueError("closed form exists for alpha in {0, 2, 3}")


def t_star_f(r: int) -> Fraction:
    """Diagonal value at the centre of u + P_0*S_r (+) P_0*S_{r+1} at x = -d_n."""
    return Fraction(-4 * (24 * r * r + 22 * r + 5), (4 * r + 3) * (16 * r * r + 32 * r + 11))


# -- the pipeline -----------------------------------------------------------------------

def transform(tree: Tree | GppTree, verify: bool | None = None, sigma_fn: SigmaFn | None = None) -> Trace:
    """Rewrite a tree with n >= 8 into prototype(n) by proper steps.

    Accepts a concrete tree or a representation.  verify defaults to on for
    n <= 200.  ``sigma_fn`` replaces the sigma computation used by verify.
    """
    if isinstance(tree, GppTree):
        rep0 = tree
        initial = expand(rep0)
    else:
        initial = tree
        if tree.n < MIN_N:
            raise TransformRejected(f"transform needs n >= {MIN_N}, got {tree.n}")
        rep0 = initiate_representation(tree)
    n = rep0.n_total
    R = _bound(rep0)
    if verify is None:
        verify = n <= 200
    run = _Run(rep0, verify, sigma_fn)
    try:
        while True:
            report = starlike_vertices(run.rep)
            k = len(report)
            if k < 2:
                break
            v, w = report.vertices[0]
            if w > 2 * R:
                raise AssertionError(f"lightest starlike vertex has weight {w} > {2 * R}")
            total_before = sum(report.weights)
            _reduce_into(run, v)
            after = starlike_vertices(run.rep)
            if len(after) > k:
                raise AssertionError("starlike count increased")
            if len(after) == k and sum(after.weights) <= total_before:
                raise AssertionError("starlike weight did not grow")
            if sum(after.weights) > n:
                raise AssertionError("starlike weight exceeds n")
        if len(run.rep.skeleton) != 1:
            raise AssertionError(f"skeleton did not shrink to one vertex: {run.rep.render()}")
        if k == 1:
            before_rep = run.rep
            before = run.rep.render()
            _one_starlike(run)
            run.macro(ONE_STAR_CASE, run.u, before_rep, before, run.rep.render())
        else:
            _zero_starlike(run)
    except ProperViolation as exc:
        exc.initial = initial
        raise
    final = run.rep
    if not _is_prototype(final):
        raise AssertionError(f"pipeline ended at {final.render()}, not the prototype")
    if canonical_code(expand(final)) != canonical_code(expand(prototype(n))):
        raise AssertionError("final tree is not isomorphic to the prototype")
    return Trace(initial, rep0, run.steps, final)


_PRIMITIVES = {
    STAR_UP: lambda rep, s, **kw: star_up(rep, s.vertex, s.args["index"], **kw),
    STAR_DOWN: lambda rep, s, **kw: star_down(rep, s.vertex, s.args["s_index"], s.args["p2_index"], **kw),
    REGROUP: lambda rep, s, **kw: star_star(rep, s.vertex, s.args["i"], s.args["j"], tuple(s.args["regroup"]), **kw),
    STAR_STAR_11: lambda rep, s, **kw: star_star(rep, s.vertex, s.args["i"], s.args["j"], **kw),
    STAR_STAR_10: lambda rep, s, **kw: star_star(rep, s.vertex, s.args["i"], s.args["j"], **kw),
    COLLAPSE: lambda rep, s, **kw: collapse(rep, s.args["from"], **kw),
    REBASE: lambda rep, s, **kw: rebase(rep, tuple(s.args["q"]), **kw),
    PATH_CASE: lambda rep, s, **kw: t_star_to_t3(rep, **kw),
}


def replay(initial_rep: GppTree, steps: Iterable[TransformStep], verify: bool = False) -> GppTree:
    """Re-apply recorded primitive steps; each result must match the record."""
    rep = initial_rep
    for s in steps:
        if s.kind in MACRO_KINDS:
            continue
        rep, again = _PRIMITIVES[s.kind](rep, s, verify=verify)
        if (again.vertex, again.after) != (s.vertex, s.after):
            raise AssertionError(f"replay diverged at {s.kind}: {again.after} != {s.after}")
    return rep
