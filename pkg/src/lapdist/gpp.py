"""The (P_q, S_r) representation of a tree.

A sun S_r is a vertex with r pendant paths of length 2 ("rays").  A generalized
pendant path P_q*S_r hangs from an anchor vertex: a path of length q whose far
end is the centre of a sun S_r.  It accounts for q + 2r vertices besides the
anchor, its weight.

A ``GppTree`` keeps a skeleton of retained vertices and, per vertex, the gpps
hanging from it.  A vertex is starlike when it carries at least two gpps and
its degree in the representation (skeleton edges plus one per gpp) is >= 3.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

from .tree import Tree, from_edge_list

OPLUS = " ⊕ "


@dataclass(frozen=True, order=True)
class Gpp:
    q: int
    r: int

    def __post_init__(self):
        if self.q < 0 or self.r < 0:
            raise ValueError(f"negative gpp parameters ({self.q}, {self.r})")
        if self.q == 0 and self.r == 0:
            raise ValueError("P_0*S_0 is not a gpp")

    @property
    def weight(self) -> int:
        return self.q + 2 * self.r

    def __str__(self) -> str:
        return f"P_{self.q}*S_{self.r}"


def pendant_gpp(length: int) -> Gpp:
    """A bare pendant path written as a gpp: P_1, P_2 = P_0*S_1, P_q = P_{q-2}*S_1."""
    if length < 1:
        raise ValueError("pendant path needs length >= 1")
    if length == 1:
        return Gpp(1, 0)
    return Gpp(length - 2, 1)


def render_gpps(gpps: Iterable[Gpp]) -> str:
    return OPLUS.join(str(g) for g in gpps)


@dataclass(frozen=True)
class GppTree:
    skeleton: Mapping[int, tuple[int, ...]]
    pendants: Mapping[int, tuple[Gpp, ...]]
    n_total: int

    # -- queries
    def vertices(self) -> list[int]:
        return sorted(self.skeleton)

    def gpps(self, v: int) -> tuple[Gpp, ...]:
        return self.pendants.get(v, ())

    def skeleton_degree(self, v: int) -> int:
        return len(self.skeleton[v])

    def rep_degree(self, v: int) -> int:
        return len(self.skeleton[v]) + len(self.gpps(v))

    def weight(self, v: int) -> int:
        return sum(g.weight for g in self.gpps(v))

    def is_starlike(self, v: int) -> bool:
        return len(self.gpps(v)) >= 2 and self.rep_degree(v) >= 3

    def anchor(self) -> int:
        """The single skeleton vertex (only meaningful once the skeleton has shrunk to one)."""
        if len(self.skeleton) != 1:
            raise ValueError(f"skeleton has {len(self.skeleton)} vertices, not 1")
        return next(iter(self.skeleton))

    def size(self) -> int:
        return len(self.skeleton) + sum(g.weight for gs in self.pendants.values() for g in gs)

    def validate(self) -> None:
        if self.size() != self.n_total:
            raise AssertionError(f"vertex count drifted: {self.size()} != {self.n_total}")
        edges = {(min(u, v), max(u, v)) for u, nb in self.skeleton.items() for v in nb}
        if len(edges) != len(self.skeleton) - 1:
            raise AssertionError("skeleton is not a tree")
        for u, nb in self.skeleton.items():
            for v in nb:
                if u not in self.skeleton.get(v, ()):
                    raise AssertionError("asymmetric skeleton adjacency")
            if len(self.skeleton) > 1 and len(nb) == 1 and not self.gpps(u):
                raise AssertionError(f"skeleton leaf {u} carries no gpp")
        for v in self.pendants:
            if v not in self.skeleton:
                raise AssertionError(f"gpps attached to non-skeleton vertex {v}")

    # -- rewriting (returns new values)
    def with_gpps(self, v: int, gpps: Iterable[Gpp]) -> "GppTree":
        pend = dict(self.pendants)
        gpps = tuple(gpps)
        if gpps:
            pend[v] = gpps
        else:
            pend.pop(v, None)
        return GppTree(self.skeleton, pend, self.n_total)

    def render(self) -> str:
        if len(self.skeleton) == 1:
            u = self.anchor()
            return f"{u} + {render_gpps(self.gpps(u))}"
        parts = [f"{v}: {render_gpps(self.gpps(v))}" for v in self.vertices() if self.gpps(v)]
        return "; ".join(parts)

    def multiset(self) -> list[Gpp]:
        return sorted(g for gs in self.pendants.values() for g in gs)


def single_vertex(u: int, gpps: Iterable[Gpp], n: int | None = None) -> GppTree:
    gpps = tuple(gpps)
    size = 1 + sum(g.weight for g in gpps)
    if n is not None and n != size:
        raise ValueError(f"gpps account for {size} vertices, expected {n}")
    return GppTree({u: ()}, {u: gpps} if gpps else {}, size)


def initiate_representation(tree: Tree) -> GppTree:
    """Replace every pendant path by its gpp.

    Paths have no vertex of degree >= 3.  Their anchor is the middle vertex
    and the two sides become the gpps.
    """
    n = tree.n
    if n < 2:
        raise ValueError("representation needs n >= 2")
    adj = tree.adjacency
    if tree.is_path():
        start = min(tree.leaves())
        walk = [start]
        prev = None
        while len(walk) < n:
            nxt = next(w for w in adj[walk[-1]] if w != prev)
            prev = walk[-1]
            walk.append(nxt)
        m = (n - 1) // 2
        sides = [m, n - 1 - m]
        return single_vertex(walk[m], [pendant_gpp(q) for q in sides if q > 0], n)

    removed: set[int] = set()
    pend: dict[int, list[Gpp]] = {}
    for leaf in tree.leaves():
        prev, cur, length = None, leaf, 0
        while len(adj[cur]) <= 2 and (prev is None or len(adj[cur]) == 2):
            removed.add(cur)
            nxt = next(w for w in adj[cur] if w != prev)
            prev, cur = cur, nxt
            length += 1
        pend.setdefault(cur, []).append(pendant_gpp(length))
    skeleton = {
        v: tuple(w for w in adj[v] if w not in removed) for v in range(n) if v not in removed
    }
    rep = GppTree(skeleton, {v: tuple(g) for v, g in pend.items()}, n)
    rep.validate()
    return rep


class Expansion(NamedTuple):
    tree: Tree
    index: dict[int, int]  # skeleton vertex -> id in the expanded tree
    sun_centers: list[int]  # expanded ids of sun centres with r >= 1


def expand_with_index(rep: GppTree) -> Expansion:
    verts = rep.vertices()
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[u], index[v]) for u in verts for v in rep.skeleton[u] if u < v]
    nxt = len(verts)
    suns = []
    for v in verts:
        for g in rep.gpps(v):
            end = index[v]
            for _ in range(g.q):
                edges.append((end, nxt))
                end = nxt
                nxt += 1
            if g.r:
                suns.append(end)
            for _ in range(g.r):
                edges.append((end, nxt))
                edges.append((nxt, nxt + 1))
                nxt += 2
    return Expansion(from_edge_list(nxt, edges), index, suns)


def expand(rep: GppTree) -> Tree:
    """The concrete tree described by a representation."""
    return expand_with_index(rep).tree


class StarlikeReport(NamedTuple):
    vertices: list[tuple[int, int]]  # (vertex, weight), ascending weight then id

    @property
    def weights(self) -> list[int]:
        return [w for _, w in self.vertices]

    def __len__(self) -> int:
        return len(self.vertices)


def starlike_vertices(rep: GppTree) -> StarlikeReport:
    found = [(v, rep.weight(v)) for v in rep.vertices() if rep.is_starlike(v)]
    found.sort(key=lambda vw: (vw[1], vw[0]))
    return StarlikeReport(found)


# -- the rational recurrences at x = -d_n along pendant paths and suns

def pendant_recurrence(n: int, r: int, j: int) -> tuple[Fraction, Fraction]:
    """(x_j, b_j(r)) for a tree on n vertices.

    x_j is the diagonal value at the j-th vertex of a pendant path counted
    from the leaf; b_j(r) the value j - 1 steps above the centre of a sun with
    r rays sitting at the end of a path.
    """
    if n < 3 or j < 1 or r < 0:
        raise ValueError("need n >= 3, j >= 1, r >= 0")
    two_n = Fraction(2, n)

    def step(value: Fraction) -> Fraction:
        if value == 0:
            raise ArithmeticError(f"zero value in recurrence (n={n}, r={r})")
        return two_n - 1 / value

    x1 = -1 + two_n
    x2 = step(x1)
    x = x1
    for _ in range(j - 1):
        x = step(x)
    b = x1 + r * (1 - 1 / x2)
    for _ in range(j - 1):
        b = step(b)
    return x, b


def r0(n: int) -> Fraction:
    """Ray count at which b_1 changes sign."""
    if n < 3:
        raise ValueError("need n >= 3")
    return Fraction((n - 2) * (n * n + 2 * n - 4), 4 * n * (n - 1))
