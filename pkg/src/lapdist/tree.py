"""Free trees: validated construction, rooting, random generation, canonical codes."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .numerics import Rational, normalize


class TreeError(ValueError):
    """Invalid tree input.  ``code`` distinguishes the failure."""

    OUT_OF_RANGE = "id_out_of_range"
    SELF_LOOP = "self_loop"
    DUPLICATE_EDGE = "duplicate_edge"
    EDGE_COUNT = "wrong_edge_count"
    DISCONNECTED = "disconnected"
    EMPTY = "empty_tree"
    PARSE = "parse_error"

    def __init__(self, code: str, message: str, line: int | None = None):
        super().__init__(message)
        self.code = code
        self.line = line


@dataclass(frozen=True)
class Tree:
    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def leaves(self) -> list[int]:
        return [v for v in range(self.n) if len(self.adjacency[v]) == 1]

    def is_path(self) -> bool:
        return all(len(a) <= 2 for a in self.adjacency)

    def rooted(self, root: int = 0) -> "RootedTree":
        return RootedTree.build(self, root)


def from_edge_list(n: int, edges: Iterable[Sequence[int]]) -> Tree:
    """Validate and build a tree on vertices 0..n-1."""
    if n < 1:
        raise TreeError(TreeError.EMPTY, "a tree needs at least one vertex")
    norm: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise TreeError(TreeError.OUT_OF_RANGE, f"edge ({u},{v}) has an id outside 0..{n - 1}")
        if u == v:
            raise TreeError(TreeError.SELF_LOOP, f"self-loop at vertex {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise TreeError(TreeError.DUPLICATE_EDGE, f"duplicate edge ({u},{v})")
        seen.add(key)
        norm.append(key)
    if len(norm) != n - 1:
        raise TreeError(TreeError.EDGE_COUNT, f"expected {n - 1} edges, got {len(norm)}")
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in norm:
        adj[u].append(v)
        adj[v].append(u)
    # n-1 edges + connected => acyclic
    seen_v = [False] * n
    seen_v[0] = True
    stack = [0]
    reached = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen_v[w]:
                seen_v[w] = True
                reached += 1
                stack.append(w)
    if reached != n:
        raise TreeError(TreeError.DISCONNECTED, f"graph is disconnected ({reached} of {n} vertices reachable from 0)")
    return Tree(n, tuple(norm), tuple(tuple(a) for a in adj))


@dataclass(frozen=True)
class RootedTree:
    base: Tree
    root: int
    parent: tuple[int | None, ...]
    order: tuple[int, ...]  # children before parents, root last

    @classmethod
    def build(cls, tree: Tree, root: int = 0) -> "RootedTree":
        if not 0 <= root < tree.n:
            raise TreeError(TreeError.OUT_OF_RANGE, f"root {root} outside 0..{tree.n - 1}")
        parent: list[int | None] = [None] * tree.n
        bfs = [root]
        visited = [False] * tree.n
        visited[root] = True
        adj = tree.adjacency
        i = 0
        while i < len(bfs):
            u = bfs[i]
            i += 1
            for w in adj[u]:
                if not visited[w]:
                    visited[w] = True
                    parent[w] = u
                    bfs.append(w)
        bfs.reverse()
        return cls(tree, root, tuple(parent), tuple(bfs))

    def children(self, v: int) -> list[int]:
        return [w for w in self.base.adjacency[v] if self.parent[w] == v]


def average_degree(n: int) -> Rational:
    """Average vertex degree 2 - 2/n of a tree on n vertices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return normalize(2 * n - 2, n)


def from_prufer(seq: Sequence[int], n: int | None = None) -> Tree:
    """Decode a Prüfer sequence (linear time)."""
    if n is None:
        n = len(seq) + 2
    if n == 1:
        return from_edge_list(1, [])
    if len(seq) != n - 2:
        raise ValueError(f"Prüfer sequence for n={n} must have length {n - 2}")
    degree = [1] * n
    for a in seq:
        if not 0 <= a < n:
            raise ValueError(f"Prüfer entry {a} outside 0..{n - 1}")
        degree[a] += 1
    edges = []
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for a in seq:
        edges.append((leaf, a))
        degree[a] -= 1
        if a < ptr and degree[a] == 1:
            leaf = a
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    # the last edge joins the remaining leaf to n-1
    edges.append((leaf, n - 1))
    return from_edge_list(n, edges)


def random_tree(n: int, seed: int) -> Tree:
    """Uniform labeled tree on n vertices, deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    return from_prufer([rng.randrange(n) for _ in range(n - 2)], n)


def relabel(tree: Tree, perm: Sequence[int]) -> Tree:
    """Apply the vertex permutation v -> perm[v]."""
    return from_edge_list(tree.n, [(perm[u], perm[v]) for u, v in tree.edges])


def centers(tree: Tree) -> list[int]:
    """The one or two central vertices, found by peeling leaves."""
    n = tree.n
    if n <= 2:
        return list(range(n))
    deg = tree.degrees()
    layer = [v for v in range(n) if deg[v] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in tree.adjacency[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def _ahu(tree: Tree, root: int) -> bytes:
    rt = RootedTree.build(tree, root)
    code: list[bytes | None] = [None] * tree.n
    kids: list[list[bytes]] = [[] for _ in range(tree.n)]
    for v in rt.order:
        c = b"(" + b"".join(sorted(kids[v])) + b")"
        code[v] = c
        p = rt.parent[v]
        if p is not None:
            kids[p].append(c)
    return code[root]  # type: ignore[return-value]


def canonical_code(tree: Tree) -> bytes:
    """Isomorphism-invariant code: AHU string rooted at the center."""
    return min(_ahu(tree, c) for c in centers(tree))


def parse_edge_list(text: str) -> Tree:
    """Parse the text format: a vertex count line, then 'u v' lines; '#' comments."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise TreeError(TreeError.PARSE, f"line {lineno}: expected integers, got {line!r}", lineno) from None
        if n is None:
            if len(nums) != 1 or nums[0] < 1:
                raise TreeError(TreeError.PARSE, f"line {lineno}: first line must be a positive vertex count", lineno)
            n = nums[0]
            continue
        if len(nums) != 2:
            raise TreeError(TreeError.PARSE, f"line {lineno}: expected 'u v', got {line!r}", lineno)
        edges.append((nums[0], nums[1]))
    if n is None:
        raise TreeError(TreeError.PARSE, "empty input: missing vertex count", 1)
    return from_edge_list(n, edges)


def format_edge_list(tree: Tree) -> str:
    lines = [str(tree.n)] + [f"{u} {v}" for u, v in tree.edges]
    return "\n".join(lines) + "\n"


def path_tree(n: int) -> Tree:
    return from_edge_list(n, [(i, i + 1) for i in range(n - 1)])


def star_tree(n: int) -> Tree:
    return from_edge_list(n, [(0, i) for i in range(1, n)])


def bfs_distances(tree: Tree, source: int) -> list[int]:
    dist = [-1] * tree.n
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for w in tree.adjacency[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist
