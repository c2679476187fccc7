import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import lapdist.transforms as transforms_mod
from lapdist.diagonalize import count_interval
from lapdist.enumerate import (
    PipelineFailure,
    VerifyReport,
    Violation,
    ceil_half,
    free_tree_count,
    free_trees,
    level_sequences,
    tree_margins,
    verify_conjecture,
    verify_pipeline,
)
from lapdist.gpp import expand
from lapdist.transforms import ProperViolation, prototype
from lapdist.tree import average_degree, canonical_code, from_edge_list, from_prufer, path_tree

# non-isomorphic free trees, n = 1..16
KNOWN = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551, 1301, 3159, 7741, 19320]


@pytest.mark.parametrize("n", range(1, 15))
def test_counts(n):
    assert free_tree_count(n) == KNOWN[n - 1]


def test_spec_count_examples():
    assert free_tree_count(4) == 2
    assert free_tree_count(7) == 11
    assert free_tree_count(10) == 106


def _prufer_codes(n):
    return {canonical_code(from_prufer(list(s), n)) for s in itertools.product(range(n), repeat=n - 2)}


@pytest.mark.parametrize("n", range(3, 8))
def test_matches_prufer_oracle(n):
    assert {canonical_code(t) for t in free_trees(n)} == _prufer_codes(n)


@pytest.mark.slow
def test_matches_prufer_oracle_n8():
    assert {canonical_code(t) for t in free_trees(8)} == _prufer_codes(8)


def test_matches_leaf_growth_oracle():
    # every tree on n vertices is a tree on n - 1 vertices plus a leaf
    layer = {canonical_code(path_tree(2)): path_tree(2)}
    for n in range(3, 13):
        grown = {}
        for t in layer.values():
            for v in range(t.n):
                child = from_edge_list(n, list(t.edges) + [(v, n - 1)])
                grown.setdefault(canonical_code(child), child)
        layer = grown
        assert set(layer) == {canonical_code(t) for t in free_trees(n)}


@pytest.mark.parametrize("n", [9, 12, 14])
def test_emitted_trees_valid_and_distinct(n):
    codes = []
    for t in free_trees(n):
        assert t.n == n and len(t.edges) == n - 1
        codes.append(canonical_code(t))
    assert len(codes) == len(set(codes))


def test_level_sequences_start_at_root():
    for seq in level_sequences(9):
        assert seq[0] == 0 and all(l >= 1 for l in seq[1:])
        assert all(b <= a + 1 for a, b in zip(seq, seq[1:]))


def test_range_checks():
    with pytest.raises(ValueError):
        list(free_trees(0))
    with pytest.raises(ValueError):
        list(free_trees(21))
    with pytest.raises(ValueError):
        verify_conjecture(1)
    with pytest.raises(ValueError):
        verify_pipeline(7, 9)


def test_path_five_margin():
    t = path_tree(5)
    below, below2 = tree_margins(t)
    assert below == 3 == ceil_half(5)
    assert count_interval(t, 0, average_degree(5)) == 3
    assert below2 >= 3


def test_verify_small_range():
    rep = verify_conjecture(10)
    assert rep.ok and rep.trees_checked == sum(KNOWN[1:10])
    assert rep.per_n[10] == 106
    assert rep.min_margin == 0
    assert "106 trees at n=10, min margin 0, 0 violations" in rep.summary_lines()


def test_parallel_matches_serial():
    a = verify_conjecture(10, workers=1)
    b = verify_conjecture(10, workers=3)
    assert (a.trees_checked, a.violations, a.min_margin, a.per_n, a.per_n_margin) == (
        b.trees_checked, b.violations, b.min_margin, b.per_n, b.per_n_margin)


@pytest.mark.parametrize("n", range(8, 41))
def test_prototypes_are_tight(n):
    below, _ = tree_margins(expand(prototype(n)))
    assert below - ceil_half(n) == 0


def test_tightness_witness_in_range():
    # once a prototype is in range the minimum margin is exactly zero
    for n_max in (8, 9, 11):
        rep = verify_conjecture(n_max)
        assert rep.min_margin == 0
        assert rep.per_n_margin[8] == 0


def _report(n, count, margin, nviol):
    viol = [Violation(n, ((0, 1),), {"k": i}) for i in range(nviol)]
    return VerifyReport((n, n), count, viol, margin, 0.5, {n: count}, {n: margin} if margin is not None else {}, count)


reports = st.builds(_report, st.integers(2, 16), st.integers(0, 50), st.none() | st.integers(0, 5), st.integers(0, 2))


def _key(r):
    return (r.n_range, r.trees_checked, r.violations, r.min_margin, r.per_n, r.per_n_margin, r.steps, r.wall_time)


@given(reports, reports, reports)
def test_merge_is_a_commutative_monoid(a, b, c):
    assert _key(a.merge(b).merge(c)) == _key(a.merge(b.merge(c)))
    assert _key(a.merge(b)) == _key(b.merge(a))


def test_pipeline_small():
    rep = verify_pipeline(8, 9)
    assert rep.ok and rep.per_n == {8: 23, 9: 47}
    assert rep.steps > 0


def test_pipeline_failure_is_reported(monkeypatch):
    def broken(tree, verify=True):
        raise ProperViolation("sigma fell 5 -> 4", [])

    monkeypatch.setattr(transforms_mod, "transform", broken)
    with pytest.raises(PipelineFailure) as info:
        verify_pipeline(8, 8)
    v = info.value.report.violations[0]
    assert v.n == 8 and len(v.edges) == 7 and "sigma fell" in v.message
    rep = verify_pipeline(8, 8, raise_on_failure=False)
    assert len(rep.violations) == 23


def test_report_to_dict():
    d = verify_conjecture(6).to_dict()
    assert d["trees_checked"] == 1 + 1 + 2 + 3 + 6
    assert d["violations"] == []
