"""Independent eigenvalue-count oracles for Laplacians of trees.

None of these exploit the tree structure; each works on the dense integer
Laplacian.  They exist to cross-check the bottom-up diagonalization.

* ``dense_inertia``: exact symmetric elimination on L - xI with 1x1 and 2x2 pivots.
* ``sturm_count``: integer characteristic polynomial plus Sturm sequences.
* ``float_spectrum``: cyclic Jacobi rotations.
* ``t1_spectrum``: closed-form spectrum of the spider with 2r legs of length 2.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .diagonalize import Inertia
from .numerics import to_rational
from .tree import Tree


def laplacian_matrix(tree: Tree) -> list[list[int]]:
    n = tree.n
    L = [[0] * n for _ in range(n)]
    for u, v in tree.edges:
        L[u][v] -= 1
        L[v][u] -= 1
        L[u][u] += 1
        L[v][v] += 1
    return L


# -- dense exact inertia ----------------------------------------------------

def symmetric_inertia(M: Sequence[Sequence]) -> Inertia:
    """Inertia of a symmetric rational matrix by congruence elimination."""
    A = [[Fraction(v) for v in row] for row in M]
    neg = zero = pos = 0
    active = list(range(len(A)))
    while active:
        piv = next((i for i in active if A[i][i] != 0), None)
        if piv is not None:
            p = A[piv][piv]
            if p > 0:
                pos += 1
            else:
                neg += 1
            active.remove(piv)
            row = A[piv]
            for i in active:
                f = A[i][piv] / p
                if f:
                    Ai = A[i]
                    for j in active:
                        Ai[j] -= f * row[j]
            continue
        pair = next(((i, j) for i in active for j in active if i < j and A[i][j] != 0), None)
        if pair is None:
            zero += len(active)
            break
        # all remaining diagonal entries vanish: the block [[0, a], [a, 0]] has one sign of each
        i, j = pair
        a = A[i][j]
        neg += 1
        pos += 1
        active.remove(i)
        active.remove(j)
        # inverse of [[0, a], [a, 0]] is [[0, 1/a], [1/a, 0]]
        for k in active:
            ci, cj = A[k][i], A[k][j]
            if not (ci or cj):
                continue
            for m in active:
                A[k][m] -= (ci * A[j][m] + cj * A[i][m]) / a
    return Inertia(neg, zero, pos)


def dense_inertia(tree: Tree, x) -> Inertia:
    """Counts of Laplacian eigenvalues below, at and above x."""
    x = to_rational(x)
    L = laplacian_matrix(tree)
    M = [[Fraction(v) for v in row] for row in L]
    for i in range(tree.n):
        M[i][i] -= x
    return symmetric_inertia(M)


# -- polynomials -------------------------------------------------------------
# coefficient lists, lowest degree first

def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _add(a: list, b: list) -> list:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _neg(a: list) -> list:
    return [-c for c in a]


def _mul(a: list, b: list) -> list:
    if a == [0] or b == [0]:
        return [0]
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _divmod(a: list, b: list) -> tuple[list, list]:
    """Polynomial long division over the rationals (exact over Z for monic b)."""
    a = list(a)
    if len(a) < len(b):
        return [0], _trim(a)
    lead = b[-1]
    q = [0] * (len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1]
        if c:
            c = c // lead if isinstance(c, int) and isinstance(lead, int) and c % lead == 0 else Fraction(c) / lead
            q[k] = c
            for i, bc in enumerate(b):
                a[k + i] -= c * bc
    return _trim(q), _trim(a[: len(b) - 1] or [0])


def _deriv(a: list) -> list:
    return _trim([i * a[i] for i in range(1, len(a))] or [0])


def _eval(a: list, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _gcd(a: list, b: list) -> list:
    while b != [0]:
        a, b = b, _divmod(a, b)[1]
    lead = Fraction(a[-1])
    return [Fraction(c) / lead for c in a]


def characteristic_polynomial(tree: Tree) -> list[int]:
    """Integer coefficients of det(tI - L), lowest degree first.

    Fraction-free (Bareiss) elimination over Z[t].  Every leading principal
    minor of tI - L is monic, so each division is exact and needs no pivoting.
    """
    n = tree.n
    L = laplacian_matrix(tree)
    M = [[[-L[i][j]] if i != j else [-L[i][i], 1] for j in range(n)] for i in range(n)]
    prev = [1]
    for k in range(n - 1):
        pk = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = _add(_mul(pk, M[i][j]), _neg(_mul(M[i][k], M[k][j])))
                q, rem = _divmod(num, prev)
                if rem != [0]:
                    raise ArithmeticError("inexact Bareiss step")
                M[i][j] = q
        prev = pk
    return [int(c) for c in M[n - 1][n - 1]]


def _squarefree_parts(p: list) -> list[tuple[list, int]]:
    """Yun's algorithm: p = c * prod f_i^i with each f_i squarefree."""
    parts = []
    a = [Fraction(c) for c in p]
    b = _deriv(a)
    c = _gcd(a, b)
    w = _divmod(a, c)[0]
    y = _divmod(b, c)[0]
    i = 1
    while len(w) > 1:
        z = _add(y, _neg(_deriv(w)))
        g = _gcd(w, z) if z != [0] else [Fraction(c) / w[-1] for c in w]
        if len(g) > 1:
            parts.append((g, i))
        w = _divmod(w, g)[0]
        y = _divmod(z, g)[0]
        i += 1
    return parts


def _sturm_chain(p: list) -> list[list]:
    chain = [p, _deriv(p)]
    while chain[-1] != [0] and len(chain[-1]) > 1:
        rem = _divmod(chain[-2], chain[-1])[1]
        if rem == [0]:
            break
        chain.append(_neg(rem))
    return [c for c in chain if c != [0]]


def _variations(chain: list[list], x) -> int:
    signs = [s for s in (_eval(c, x) for c in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


class SturmCounter:
    """Eigenvalue counts in half-open intervals from one characteristic polynomial."""

    def __init__(self, tree: Tree):
        self.n = tree.n
        self.charpoly = characteristic_polynomial(tree)
        self.parts = [(_sturm_chain(f), f, m) for f, m in _squarefree_parts(self.charpoly)]

    def count(self, lo, hi) -> int:
        """Eigenvalues in (lo, hi], with multiplicity."""
        lo, hi = to_rational(lo), to_rational(hi)
        if not lo < hi:
            raise ValueError("need lo < hi")
        return sum(m * (_variations(ch, lo) - _variations(ch, hi)) for ch, _, m in self.parts)

    def multiplicity(self, x) -> int:
        x = to_rational(x)
        return sum(m for _, f, m in self.parts if _eval(f, x) == 0)

    def inertia(self, x) -> Inertia:
        """Laplacian eigenvalues are >= 0, so everything below x lies in (-1, x)."""
        x = to_rational(x)
        at = self.multiplicity(x)
        below = self.count(-1, x) - at if x > -1 else 0
        return Inertia(below, at, self.n - below - at)


def sturm_count(tree: Tree, lo, hi) -> int:
    """Number of Laplacian eigenvalues in (lo, hi]."""
    return SturmCounter(tree).count(lo, hi)


# -- floating point -----------------------------------------------------------

def jacobi_eigenvalues(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    scale = max(np.abs(A).max(), 1.0)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.diag(A))


def float_spectrum(tree: Tree) -> list[float]:
    """All Laplacian eigenvalues in ascending order."""
    if tree.n > 2000:
        raise ValueError("dense eigensolver limited to n <= 2000")
    return [float(v) for v in jacobi_eigenvalues(np.array(laplacian_matrix(tree)))]


def t1_spectrum(r: int) -> list[float]:
    """Spectrum of the centre with 2r pendant paths of length 2 (n = 4r + 1)."""
    if r < 2:
        raise ValueError("r must be at least 2")
    s5 = math.sqrt(5.0)
    theta, theta_bar = (3 - s5) / 2, (3 + s5) / 2
    b, c = 2 * r + 3, 4 * r + 1
    disc = math.sqrt(b * b - 4 * c)
    lam1, lam2 = (b - disc) / 2, (b + disc) / 2
    values = [0.0] + [theta] * (2 * r - 1) + [lam1] + [theta_bar] * (2 * r - 1) + [lam2]
    return sorted(values)
