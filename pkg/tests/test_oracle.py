import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lapdist.diagonalize import Inertia, inertia
from lapdist.gpp import expand
from lapdist.oracle import (
    SturmCounter,
    characteristic_polynomial,
    dense_inertia,
    float_spectrum,
    jacobi_eigenvalues,
    laplacian_matrix,
    sturm_count,
    symmetric_inertia,
    t1_spectrum,
)
from lapdist.transforms import prototype
from lapdist.tree import average_degree, path_tree, random_tree, star_tree

K14 = star_tree(5)
P3 = path_tree(3)


def test_laplacian_rows():
    L = laplacian_matrix(random_tree(15, 2))
    for i, row in enumerate(L):
        assert sum(row) == 0
        assert all(L[i][j] == L[j][i] for j in range(15))


def test_dense_inertia_examples():
    assert dense_inertia(K14, Fraction(8, 5)) == Inertia(4, 0, 1)
    for seed in range(10):
        t = random_tree(11, seed)
        assert dense_inertia(t, 0) == Inertia(0, 1, 10)


def test_two_by_two_pivot():
    # all-zero diagonal forces the 2x2 block path
    assert symmetric_inertia([[0, 1], [1, 0]]) == Inertia(1, 0, 1)
    assert symmetric_inertia([[0, 2, 0], [2, 0, 0], [0, 0, 0]]) == Inertia(1, 1, 1)
    assert symmetric_inertia([[0, 1, 1], [1, 0, 1], [1, 1, 0]]) == Inertia(2, 0, 1)


@given(st.lists(st.integers(-3, 3), min_size=10, max_size=10))
def test_symmetric_inertia_matches_numpy(vals):
    A = np.zeros((4, 4))
    k = 0
    for i in range(4):
        for j in range(i, 4):
            A[i, j] = A[j, i] = vals[k]
            k += 1
    ev = np.linalg.eigvalsh(A)
    expected = Inertia(int((ev < -1e-9).sum()), int((abs(ev) <= 1e-9).sum()), int((ev > 1e-9).sum()))
    assert symmetric_inertia(A.astype(int).tolist()) == expected


def test_star_charpoly():
    # t (t - 1)^3 (t - 5)
    assert characteristic_polynomial(K14) == [0, 5, -16, 18, -8, 1]


def test_sturm_examples():
    assert sturm_count(P3, 0, Fraction(4, 3)) == 1
    sc = SturmCounter(K14)
    assert sc.multiplicity(1) == 3
    assert sc.count(-1, 5) == 5
    assert sc.inertia(1) == Inertia(1, 3, 1)


def test_sturm_requires_ordered_interval():
    with pytest.raises(ValueError):
        sturm_count(P3, 2, 1)


@given(st.integers(2, 10), st.integers(0, 10**6))
def test_sturm_agrees_with_dense(n, seed):
    t = random_tree(n, seed)
    sc = SturmCounter(t)
    for x in (average_degree(n), Fraction(1), Fraction(2), Fraction(1, 2)):
        d = dense_inertia(t, x)
        assert sc.inertia(x) == d
        assert inertia(t, x) == d


def test_float_spectrum_examples():
    assert np.allclose(float_spectrum(P3), [0, 1, 3], atol=1e-9)
    assert np.allclose(float_spectrum(K14), [0, 1, 1, 1, 5], atol=1e-9)


@given(st.integers(2, 30), st.integers(0, 10**6))
def test_float_spectrum_trace_and_numpy(n, seed):
    t = random_tree(n, seed)
    ev = float_spectrum(t)
    assert abs(sum(ev) - 2 * (n - 1)) <= 1e-9 * n
    ref = np.linalg.eigvalsh(np.array(laplacian_matrix(t), dtype=float))
    assert np.allclose(ev, ref, atol=1e-9)


def test_jacobi_on_diagonal_input():
    assert list(jacobi_eigenvalues(np.diag([3.0, -1.0, 2.0]))) == [-1.0, 2.0, 3.0]


def test_float_spectrum_size_limit():
    with pytest.raises(ValueError):
        float_spectrum(path_tree(2001))


def test_t1_spectrum_r2():
    ev = t1_spectrum(2)
    assert len(ev) == 9
    theta, theta_bar = (3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2
    assert sum(1 for v in ev if abs(v - theta) < 1e-12) == 3
    assert sum(1 for v in ev if abs(v - theta_bar) < 1e-12) == 3
    for lam in ((7 - math.sqrt(13)) / 2, (7 + math.sqrt(13)) / 2):
        assert any(abs(v - lam) < 1e-12 for v in ev)
    assert abs(theta - 0.381966) < 1e-6


@pytest.mark.parametrize("r", range(2, 21))
def test_t1_spectrum_counts_and_solver(r):
    n = 4 * r + 1
    ev = t1_spectrum(r)
    assert len(ev) == n
    assert sum(1 for v in ev if v < float(average_degree(n))) == 2 * r + 1
    if r <= 8:
        assert np.allclose(float_spectrum(expand(prototype(n))), ev, atol=1e-9)


def test_t1_spectrum_rejects_small_r():
    with pytest.raises(ValueError):
        t1_spectrum(1)
