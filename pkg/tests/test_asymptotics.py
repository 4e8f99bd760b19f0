"""Limiting constants: quadrature route, kernel structure, fixed point."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacings.asymptotics import (
    GaussLegendreRule,
    cf_fixed_point_residual,
    cf_residual,
    constants_by_extrapolation,
    constants_by_quadrature,
    cov_kernel,
    cov_rates_by_quadrature,
    exp_weight,
    mean_gf,
    rates_by_quadrature,
    vacancy_rate_by_quadrature,
)


@given(
    nodes=st.integers(min_value=2, max_value=12),
    coeffs=st.lists(
        st.floats(min_value=-4, max_value=4, allow_nan=False),
        min_size=1,
        max_size=8,
    ),
)
def test_rule_integrates_polynomials_exactly(nodes, coeffs):
    # degree cap 2*nodes - 1
    coeffs = coeffs[: 2 * nodes]
    rule = GaussLegendreRule.make(nodes)
    got = rule.integrate(lambda y: sum(c * y**m for m, c in enumerate(coeffs)))
    want = sum(c / (m + 1) for m, c in enumerate(coeffs))
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_rule_affine_remap():
    rule = GaussLegendreRule.make(8)
    assert rule.integrate(lambda y: y, 2.0, 5.0) == pytest.approx((25 - 4) / 2, rel=1e-13)
    x, w = rule.on(2.0, 5.0)
    assert x.min() > 2.0 and x.max() < 5.0
    assert w.sum() == pytest.approx(3.0, rel=1e-13)


def test_exp_weight_closed_form_k2():
    y = np.linspace(0.0, 1.0, 7)
    assert exp_weight(y, 2) == pytest.approx(np.exp(2 * y), rel=1e-14)
    assert float(exp_weight(0.0, 5)) == 1.0


def test_spacing_rate_k2_is_exp_minus_two():
    rates = rates_by_quadrature(2)
    assert rates.shape == (1,)
    assert rates[0] == pytest.approx(math.exp(-2), abs=1e-12)


def test_vacancy_rate_k2_equals_spacing_rate():
    # only length-1 spacings exist at k=2, so both constants coincide
    assert vacancy_rate_by_quadrature(2) == pytest.approx(math.exp(-2), abs=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_vacancy_identity_all_k(k):
    c = constants_by_quadrature(k)
    assert c.identity_gap() < 1e-12


def test_mean_gf_domain():
    assert mean_gf(0.0, 1, 3) == 0.0
    with pytest.raises(ValueError):
        mean_gf(1.0, 1, 3)
    with pytest.raises(ValueError):
        mean_gf(-0.1, 1, 3)
    with pytest.raises(ValueError):
        mean_gf(0.5, 3, 3)  # spacing length out of range


def test_mean_gf_closed_form_k2():
    for z in (0.2, 0.5, 0.8):
        want = math.exp(-2 * z) / (1 - z) ** 2 - 1
        assert mean_gf(z, 1, 2) == pytest.approx(want, rel=1e-11)


def test_cov_kernel_symmetric_in_indices():
    rates = rates_by_quadrature(3)
    for y in (0.1, 0.4, 0.7, 0.95):
        a, _ = cov_kernel(y, 1, 2, 3, rates)
        b, _ = cov_kernel(y, 2, 1, 3, rates)
        assert a == pytest.approx(b, rel=1e-14, abs=1e-14)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_cov_matrix_symmetric_psd(k):
    res = cov_rates_by_quadrature(k)
    m = res.matrix
    assert np.allclose(m, m.T, rtol=0, atol=1e-14)
    eigs = np.linalg.eigvalsh(m)
    assert eigs.min() > -1e-12


def test_cov_diagnostics_report_cancellation():
    res = cov_rates_by_quadrature(2)
    d = res.diagnostics
    # the kernel vanishes at y=1 while its terms do not: the per-node ratio
    # is expected to flag, the propagated error bound must still be tiny
    assert d.any_flagged()
    assert np.max(d.est_abs_error) < 1e-10


def test_quadrature_and_extrapolation_agree():
    for k in (2, 3):
        q = constants_by_quadrature(k)
        e = constants_by_extrapolation(k, n_max=400)
        assert q.rates == pytest.approx(e.rates, abs=1e-8)
        assert q.cov_rates == pytest.approx(e.cov_rates, abs=1e-7)
        assert q.vacancy_rate == pytest.approx(e.vacancy_rate, abs=1e-8)
        assert q.provenance == "quadrature"
        assert e.provenance == "extrapolation"


T_GRID = np.linspace(-5, 5, 41)


def test_normal_cf_solves_fixed_point():
    assert cf_fixed_point_residual(1.0, T_GRID) < 1e-12
    assert cf_fixed_point_residual(0.25, T_GRID) < 1e-12
    assert cf_fixed_point_residual(0.0, T_GRID) < 1e-12


def test_heavy_tailed_cf_fails_fixed_point():
    res = cf_residual(lambda s: np.exp(-np.abs(s)), T_GRID)
    assert res > 1e-3


@settings(max_examples=20)
@given(sigma2=st.floats(min_value=0.0, max_value=9.0, allow_nan=False))
def test_fixed_point_holds_for_every_variance(sigma2):
    assert cf_fixed_point_residual(sigma2, T_GRID) < 1e-11
