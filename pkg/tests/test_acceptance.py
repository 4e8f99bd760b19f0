"""Acceptance gate: every numbered check at full scale, one line each.

Run with `pytest tests/test_acceptance.py -v` (or `spacings verify`) to see
the per-check measurements.  Check 07 is a known failure; the recursion it
exercises converges like log(N)/N and sits at 1.35e-3 against the 1e-3
budget at N=1e5.  The implementation is kept faithful to the stated
recursion rather than tuned to pass; see README.
"""
from __future__ import annotations

from spacings import verify


def _run(check):
    result = check()
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_mean_rate_k2():
    _run(verify.check_mean_rate_k2)


def test_criterion_02_cov_rate_k2():
    _run(verify.check_cov_rate_k2)


def test_criterion_03_split_equals_direct():
    _run(verify.check_split_vs_direct)


def test_criterion_04_simulator_matches_exact_law():
    _run(verify.check_simulator_against_exact)


def test_criterion_05_mean_rates_settle_k3():
    _run(verify.check_mean_ratio_stabilizes_k3)


def test_criterion_06_clt_standardized_moments():
    _run(verify.check_clt_standardized_moments)


def test_criterion_07_averaging_recursion_limit():
    _run(verify.check_averaging_recursion)


def test_criterion_08_closed_forms_k2():
    _run(verify.check_closed_forms_k2)


def test_criterion_09_vacancy_identity():
    _run(verify.check_vacancy_identity)


def test_criterion_10_cf_fixed_point():
    _run(verify.check_cf_fixed_point)


def test_criterion_11_drift_bound_tail():
    _run(verify.check_drift_bound_tail)


def test_criterion_12_conservation_at_scale():
    _run(verify.check_conservation_at_scale)
