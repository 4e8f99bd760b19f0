"""Finite-n moment recursions against the enumerator and closed constants."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from spacings.moments import (
    averaging_recursion_limit,
    cov_rates_by_extrapolation,
    cross_moment_recursion,
    cross_moment_recursion_exact,
    mean_drift_bound,
    mean_recursion,
    mean_recursion_cumulative,
    mean_recursion_exact,
    projected_moment_recursion,
    projected_moment_recursion_exact,
    rates_by_extrapolation,
)

# frozen from tests/oracles.py: E X_n for k=2, n = 0..8
GAMMA_K2 = [
    Fraction(0),
    Fraction(1),
    Fraction(0),
    Fraction(1),
    Fraction(2, 3),
    Fraction(1),
    Fraction(16, 15),
    Fraction(11, 9),
    Fraction(142, 105),
]


def test_exact_mean_sequence_k2():
    table = mean_recursion_exact(2, 8)
    assert [row[0] for row in table] == GAMMA_K2


@pytest.mark.parametrize("k", [3, 4])
def test_exact_means_match_enumerator(k):
    table = mean_recursion_exact(k, 10)
    for n in range(0, 11):
        assert table[n] == oracles.mean_counts(n, k), n


def test_float_mean_tracks_exact():
    exact = mean_recursion_exact(3, 200)
    table = mean_recursion(3, 200)
    worst = max(
        abs(float(exact[n][i]) - table.values[n][i])
        for n in range(201)
        for i in range(2)
    )
    assert worst < 1e-12


def test_one_step_and_cumulative_forms_agree():
    a = mean_recursion(2, 3000).values
    b = mean_recursion_cumulative(2, 3000).values
    rel = np.abs(a - b) / np.maximum(np.abs(a), 1.0)
    assert rel.max() < 1e-12


def test_mean_rate_reaches_limit_k2():
    table = mean_recursion(2, 4000)
    assert table.rate(4000) == pytest.approx(math.exp(-2), abs=1e-9)


def test_rates_by_extrapolation_reports_stability():
    res = rates_by_extrapolation(2, 400)
    assert res.stabilized
    assert res.n_used == 400
    assert res.value[0] == pytest.approx(math.exp(-2), abs=1e-10)
    assert res.gap < 1e-10


def test_cross_moments_match_enumerator():
    second = cross_moment_recursion_exact(3, 9)
    for n in (7, 8, 9):
        assert second[n] == oracles.second_moments(n, 3), n


def test_cross_moment_covariance_n4_k2():
    table = cross_moment_recursion(2, 4)
    assert table.cov[4][0][0] == pytest.approx(8 / 9, abs=1e-14)


def test_float_cross_moments_track_exact():
    ex = cross_moment_recursion_exact(2, 120)
    fl = cross_moment_recursion(2, 120)
    worst = max(abs(float(ex[n][0][0]) - fl.second[n][0][0]) for n in range(121))
    assert worst < 1e-11


def test_cov_rate_reaches_limit_k2():
    res = cov_rates_by_extrapolation(2, 300)
    assert res.value[0][0] == pytest.approx(4 * math.exp(-4), abs=1e-10)
    assert res.stabilized


def test_projected_raw_matches_enumerator():
    t = projected_moment_recursion([1.0, 2.0], 3, 10, order=4)
    for n in range(0, 11):
        for m in range(5):
            want = float(oracles.projected_moment(n, 3, (1, 2), m))
            assert t.raw[n, m] == pytest.approx(want, rel=1e-12, abs=1e-12), (n, m)


def test_projected_raw_frozen_value():
    t = projected_moment_recursion([1.0], 2, 8, order=4)
    assert t.raw[8, 4] == pytest.approx(float(Fraction(1136, 105)), rel=1e-14)


def test_projected_exact_twin_agrees():
    ex = projected_moment_recursion_exact((1, 2), 3, 9, order=3)
    fl = projected_moment_recursion([1.0, 2.0], 3, 9, order=3)
    for n in range(10):
        for m in range(4):
            assert fl.raw[n, m] == pytest.approx(float(ex[n][m]), rel=1e-12, abs=1e-12)


def test_standardized_moments_shape_and_centering():
    t = projected_moment_recursion([1.0], 2, 300, order=6)
    assert t.standardized.shape == (301, 7)
    assert t.standardized[:, 0] == pytest.approx(1.0)
    # centered first moment vanishes up to rounding
    assert np.max(np.abs(t.standardized[1:, 1])) < 1e-12
    # second standardized moment approaches the covariance rate
    cov = cross_moment_recursion(2, 300).cov[300][0][0]
    assert t.standardized[300, 2] == pytest.approx(cov / 300, rel=1e-10)


def test_projected_rejects_bad_input():
    with pytest.raises(ValueError):
        projected_moment_recursion([1.0, 2.0], 2, 10)  # wrong length
    with pytest.raises(ValueError):
        projected_moment_recursion([1.0], 2, 10, order=1)
    with pytest.raises(OverflowError):
        projected_moment_recursion([1e40], 2, 400, order=8)


def test_averaging_limit_k2():
    res = averaging_recursion_limit(alpha=2.0, beta=3.0, k=2, n_max=50_000)
    assert res.predicted_limit == 4.0
    assert res.gap < 1e-3


def test_averaging_zero_forcing_stays_zero():
    res = averaging_recursion_limit(alpha=0.0, beta=2.0, k=3, n_max=2_000)
    assert res.a_final == 0.0
    assert res.gap == 0.0


def test_averaging_requires_beta_above_one():
    with pytest.raises(ValueError):
        averaging_recursion_limit(alpha=1.0, beta=1.0, k=2, n_max=100)


def test_averaging_matches_literal_sum():
    # O(N^2) restatement of the same recursion
    alpha, beta, k, N = 1.0, 2.0, 2, 800
    a = [0.0] * (N + 1)
    for n in range(k + 1, N + 1):
        s = sum((j / n) ** beta * a[j] for j in range(0, n - k + 1))
        a[n] = alpha + 2.0 * s / (n - k + 1)
    res = averaging_recursion_limit(alpha, beta, k, N)
    assert res.a_final == pytest.approx(a[N], rel=1e-13)


def test_drift_bound_small_values_k2():
    res = mean_drift_bound(2, 200)
    # max over j of |g_j + g_{2-j} - g_4|: j=1 gives |1 + 1 - 2/3| = 4/3
    assert res.per_n[4] == pytest.approx(4 / 3, rel=1e-12)
    assert res.sup == pytest.approx(4 / 3, rel=1e-12)


def test_drift_bound_tail_settles():
    res = mean_drift_bound(3, 400)
    tail = res.per_n[100:]
    assert np.all(np.diff(tail) <= 1e-12)
