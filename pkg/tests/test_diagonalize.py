import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lapdist.diagonalize import (
    EXACT,
    FLOAT,
    Inertia,
    count_interval,
    diagonalize,
    inertia,
    sigma,
    sigma_split,
)
from lapdist.gpp import expand
from lapdist.oracle import dense_inertia
from lapdist.transforms import prototype
from lapdist.tree import RootedTree, average_degree, from_edge_list, path_tree, random_tree, star_tree

K14 = star_tree(5)
P3 = path_tree(3)


def test_star_example_values():
    res = diagonalize(RootedTree.build(K14, 0), Fraction(-8, 5))
    leaves = [res.values[v] for v in range(1, 5)]
    assert leaves == [Fraction(-3, 5)] * 4
    # 4 - 8/5 - 4 / (-3/5)
    assert res.values[0] == Fraction(136, 15)
    assert res.signs() == Inertia(4, 0, 1)
    assert res.detached_edges == ()


def test_single_edge_zero_branch():
    res = diagonalize(RootedTree.build(path_tree(2), 0), -1)
    assert sorted(res.values) == [Fraction(-1, 2), Fraction(2)]
    assert res.signs() == Inertia(1, 0, 1)


def test_zero_branch_detaches_edge_to_parent():
    # leaf pair at x = -1 under a longer path: the zero appears below the root
    t = path_tree(4)
    res = diagonalize(RootedTree.build(t, 0), -1)
    assert res.detached_edges == ((2, 1),)
    assert res.signs() == dense_inertia(t, 1)


def test_inertia_examples():
    assert inertia(K14, Fraction(8, 5)) == Inertia(4, 0, 1)
    assert inertia(P3, 1) == Inertia(1, 1, 1)


@given(st.integers(1, 40), st.integers(0, 10**6))
def test_zero_is_simple_eigenvalue(n, seed):
    t = random_tree(n, seed)
    assert inertia(t, 0) == Inertia(0, 1, n - 1)


def test_count_interval_examples():
    assert count_interval(P3, 0, 2) == 2
    assert count_interval(P3, 0, Fraction(4, 3)) == 2
    assert count_interval(P3, 1, 3, lo_closed=False, hi_closed=True) == 1
    for seed in range(20):
        t = random_tree(9, seed)
        assert count_interval(t, 0, t.n, True, True) == t.n


def test_count_interval_rejects_inverted():
    with pytest.raises(ValueError):
        count_interval(P3, 2, 1)


def test_sigma_examples():
    assert sigma(K14) == 1
    assert sigma(expand(prototype(8))) == 4
    assert sigma(path_tree(2)) == 1
    assert sigma_split(P3) == (2, 1)


@pytest.mark.parametrize("n", range(2, 11))
def test_root_invariance(n):
    from lapdist.enumerate import free_trees

    xs = [average_degree(n), Fraction(1), Fraction(2), Fraction(1, 3)]
    for t in free_trees(n):
        for x in xs:
            ref = inertia(t, x, root=0)
            for root in range(1, n):
                assert inertia(t, x, root=root) == ref


@given(st.integers(3, 60), st.integers(0, 10**6))
def test_no_zero_at_average_degree(n, seed):
    inr = inertia(random_tree(n, seed), average_degree(n))
    assert inr.zero == 0
    assert sum(inr) == n


@given(st.integers(1, 14), st.integers(0, 10**6), st.fractions(-2, 7, max_denominator=12))
def test_matches_dense_oracle(n, seed, x):
    t = random_tree(n, seed)
    assert inertia(t, x) == dense_inertia(t, x)


@given(st.integers(2, 12), st.integers(0, 10**6), st.sampled_from([0, 1, 2, 3]))
def test_zero_branch_on_integer_points(n, seed, x):
    # integer x makes the zero branch fire often; inertia must not depend on it
    t = random_tree(n, seed)
    for root in (0, n - 1):
        assert inertia(t, x, root=root) == dense_inertia(t, x)


def test_exact_values_reduced():
    res = diagonalize(RootedTree.build(random_tree(40, 1), 0), Fraction(-7, 4))
    assert len(res.values) == 40
    assert all(isinstance(v, Fraction) for v in res.values)


def test_unknown_mode():
    with pytest.raises(ValueError):
        diagonalize(RootedTree.build(P3, 0), 1, mode="fast")


@given(st.integers(2, 300), st.integers(0, 10**6))
def test_float_matches_exact_when_unambiguous(n, seed):
    t = random_tree(n, seed)
    x = average_degree(n)
    f = inertia(t, x, mode=FLOAT)
    e = inertia(t, x, mode=EXACT)
    assert sum(f) == n
    if f.zero == 0:
        assert f == e


def test_float_flags_exact_zeros():
    # P_3 has eigenvalue 1: the float pass cannot decide it and must say so
    f = inertia(P3, 1, mode=FLOAT)
    assert f.zero >= 1
    assert sum(f) == 3


def test_float_values_agree_with_exact_values():
    t = random_tree(200, 5)
    rt = RootedTree.build(t, 0)
    ex = diagonalize(rt, Fraction(-3, 2))
    fl = diagonalize(rt, Fraction(-3, 2), mode=FLOAT)
    assert np.allclose(np.asarray(fl.values), [float(v) for v in ex.values], rtol=1e-9, atol=1e-9)


def test_float_single_vertex():
    assert inertia(from_edge_list(1, []), 1, mode=FLOAT) == Inertia(1, 0, 0)


@pytest.mark.slow
def test_float_million_under_a_second():
    t = random_tree(10**6, 2024)
    t0 = time.perf_counter()
    inr = inertia(t, average_degree(t.n), mode=FLOAT)
    dt = time.perf_counter() - t0
    assert sum(inr) == t.n
    assert dt < 1.0
