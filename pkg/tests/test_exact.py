"""Exact terminal law: both routes against the brute-force enumerator."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spacings.exact import (
    CapExceededError,
    chi_square_gof,
    empirical_counter,
    moments_from_pmf,
    pmf_direct,
    pmf_split,
    total_variation_empirical,
)
from spacings.model import GapCounts, ProcessParams


def plain(pmf):
    return {(g.counts, g.hats): p for g, p in pmf.probs.items()}


def test_oracle_matches_hand_enumeration_n4_k2():
    # Row of 4, blocks of 2, starts 1..3 each w.p. 1/3:
    #   start 1 -> hooks 3,4 stay a run of 2 -> forced second block -> full
    #   start 2 -> vacant {1} and {4}, both too short -> two length-1 spacings
    #   start 3 -> mirror of start 1 -> full
    assert oracles.law(4, 2) == {
        ((0,), 2): Fraction(2, 3),
        ((2,), 1): Fraction(1, 3),
    }


def test_oracle_matches_hand_enumeration_n5_k2():
    # Every first placement leaves exactly one more block and one spacing.
    assert oracles.law(5, 2) == {((1,), 2): Fraction(1)}


@pytest.mark.parametrize("k", [2, 3, 4])
def test_split_route_equals_enumerator(k):
    for n in range(0, 13):
        got = plain(pmf_split(ProcessParams(n, k)))
        assert got == oracles.law(n, k), (n, k)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_direct_route_equals_enumerator(k):
    for n in range(0, 13):
        got = plain(pmf_direct(ProcessParams(n, k)))
        assert got == oracles.law(n, k), (n, k)


def test_pmf_is_an_exact_distribution():
    pmf = pmf_split(ProcessParams(12, 3))
    assert pmf.total() == Fraction(1)
    assert all(p > 0 for p in pmf.probs.values())
    pmf.validate()


def test_known_table_n6_k2():
    # frozen from tests/oracles.py
    assert plain(pmf_split(ProcessParams(6, 2))) == {
        ((0,), 3): Fraction(7, 15),
        ((2,), 2): Fraction(8, 15),
    }


def test_known_table_n7_k3():
    # frozen from tests/oracles.py
    assert plain(pmf_split(ProcessParams(7, 3))) == {
        ((0, 2), 1): Fraction(1, 5),
        ((1, 0), 2): Fraction(4, 5),
    }


def test_caps_guard_both_routes():
    with pytest.raises(CapExceededError):
        pmf_split(ProcessParams(60, 2))
    with pytest.raises(CapExceededError):
        pmf_direct(ProcessParams(30, 2))
    # explicit override lifts the cap
    pmf_direct(ProcessParams(22, 2), cap=22).validate()


def test_moments_match_enumerator_means():
    m = moments_from_pmf(pmf_split(ProcessParams(7, 3)))
    assert list(m.mean) == oracles.mean_counts(7, 3) == [Fraction(4, 5), Fraction(2, 5)]
    assert [list(r) for r in m.second_raw] == oracles.second_moments(7, 3)


def test_moments_covariance_n4_k2():
    m = moments_from_pmf(pmf_split(ProcessParams(4, 2)))
    # E X = 2/3, E X^2 = 4/3  =>  var = 4/3 - 4/9
    assert m.mean[0] == Fraction(2, 3)
    assert m.covariance()[0][0] == Fraction(8, 9)


def test_projected_moments_match_enumerator():
    m = moments_from_pmf(pmf_split(ProcessParams(7, 3)), order=3, projection=(1, 2))
    assert m.projected_raw[3] == oracles.projected_moment(7, 3, (1, 2), 3) == Fraction(68, 5)
    m2 = moments_from_pmf(pmf_split(ProcessParams(8, 2)), order=4, projection=(1,))
    assert m2.projected_raw[4] == Fraction(1136, 105)


def test_total_variation_zero_on_itself():
    pmf = pmf_split(ProcessParams(10, 3))
    assert pmf.total_variation(pmf) == 0


def test_total_variation_against_counter():
    pmf = pmf_split(ProcessParams(4, 2))
    # all mass on the full state: TV = 1 - P(full) = 1/3
    full = GapCounts((0,), 2)
    assert total_variation_empirical(pmf, {full: 50}) == pytest.approx(1 / 3)


def test_chi_square_accepts_its_own_law():
    pmf = pmf_split(ProcessParams(6, 2))
    # counts proportional to the law itself: statistic exactly 0
    counter = {g: int(p * 1500) for g, p in pmf.probs.items()}
    stat, dof, pval = chi_square_gof(pmf, counter)
    assert stat == pytest.approx(0, abs=1e-12)
    assert dof == 1
    assert pval == pytest.approx(1.0)


def test_chi_square_rejects_stray_states():
    pmf = pmf_split(ProcessParams(6, 2))
    with pytest.raises(ValueError):
        chi_square_gof(pmf, {GapCounts((1,), 2): 10})


def test_chi_square_pools_rare_cells():
    pmf = pmf_split(ProcessParams(12, 2))
    counter = {g: max(1, int(p * 60)) for g, p in pmf.probs.items()}
    stat, dof, _ = chi_square_gof(pmf, counter, min_expected=5.0)
    assert dof >= 1
    # pooling can only reduce the cell count
    assert dof < len(pmf.probs)


def test_empirical_counter_groups_rows():
    counts = np.array([[1, 0], [0, 2], [1, 0]], dtype=np.int64)
    hats = np.array([2, 1, 2], dtype=np.int64)
    got = empirical_counter(counts, hats)
    assert got == {GapCounts((1, 0), 2): 2, GapCounts((0, 2), 1): 1}


@settings(max_examples=30)
@given(
    n=st.integers(min_value=0, max_value=14),
    k=st.sampled_from([2, 3, 4, 5]),
)
def test_split_route_always_valid(n, k):
    pmf = pmf_split(ProcessParams(n, k))
    pmf.validate()
    assert pmf.total() == 1
