"""Limiting constants of the block-placement process by quadrature.

The expected number of length-j spacings on a row of n hooks grows like
rate_j * (n + k), and the covariances like cov_rate_ij * (n + k).  Both
limits have closed integral forms against the weight

    exp_weight(y, k) = exp(2 * (y + y^2/2 + ... + y^(k-1)/(k-1))),

which this module evaluates with Gauss-Legendre rules.  The covariance
kernel is assembled from large mutually cancelling pieces near y = 1, so
every evaluation carries a cancellation monitor; the integrals themselves
stay accurate because the outer quadrature weights vanish at the endpoints
faster than the pieces blow up.

An independent route to the same constants is finite-n recursion plus
extrapolation (:mod:`spacings.moments`); ``constants_by_extrapolation`` and
``constants_by_quadrature`` package the two for side-by-side comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .moments import (
    cov_rates_by_extrapolation,
    mean_recursion,
    rates_by_extrapolation,
)

__all__ = [
    "GaussLegendreRule",
    "exp_weight",
    "rates_by_quadrature",
    "mean_gf",
    "cov_kernel",
    "cov_rates_by_quadrature",
    "vacancy_rate_by_quadrature",
    "cf_fixed_point_residual",
    "cf_residual",
    "AsymptoticConstants",
    "CovQuadratureDiagnostics",
    "constants_by_quadrature",
    "constants_by_extrapolation",
    "DEFAULT_OUTER_NODES",
    "DEFAULT_INNER_NODES",
    "CANCELLATION_FLAG_RATIO",
]

DEFAULT_OUTER_NODES = 128
DEFAULT_INNER_NODES = 64
CANCELLATION_FLAG_RATIO = 1e8


@dataclass(frozen=True, eq=False)
class GaussLegendreRule:
    """Gauss-Legendre nodes and weights mapped onto [0, 1].

    Nodes are strictly interior and weights are positive and sum to the
    interval length, so integrands may blow up at the endpoints without
    ever being evaluated there.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def make(cls, n: int) -> "GaussLegendreRule":
        if n < 2:
            raise ValueError("need at least 2 nodes")
        x, w = np.polynomial.legendre.leggauss(n)
        return cls((x + 1.0) / 2.0, w / 2.0)

    def on(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Affine image of the rule on [a, b]."""
        span = b - a
        return a + span * self.nodes, span * self.weights

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], a: float = 0.0, b: float = 1.0) -> float:
        x, w = self.on(a, b)
        return float(w @ f(x))


def exp_weight(y, k: int):
    """exp(2 * sum_{m=1}^{k-1} y^m / m), the weight behind every limit here."""
    y = np.asarray(y, dtype=float)
    acc = np.zeros_like(y)
    term = np.ones_like(y)
    for m in range(1, k):
        term = term * y
        acc += term / m
    out = np.exp(2.0 * acc)
    return out if out.ndim else float(out)


def _exp_weight_at_one(k: int) -> float:
    return math.exp(2.0 * sum(1.0 / m for m in range(1, k)))


def rates_by_quadrature(k: int, rule: GaussLegendreRule | None = None) -> np.ndarray:
    """Limiting per-hook rates of length-j spacings, j = 1..k-1.

    rate_j = 2/exp_weight(1) * integral_0^1 (1-y) y^j exp_weight(y) dy.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    rule = rule or GaussLegendreRule.make(DEFAULT_OUTER_NODES)
    y, w = rule.nodes, rule.weights
    base = w * (1.0 - y) * exp_weight(y, k)
    scale = 2.0 / _exp_weight_at_one(k)
    return np.array([scale * float(base @ y**j) for j in range(1, k)])


def mean_gf(z: float, i: int, k: int, inner: GaussLegendreRule | None = None) -> float:
    """Generating function of the expected length-i spacing counts.

    Equals 2 (1-z)^-2 exp_weight(z)^-1 * integral_0^z t^i (1-t) exp_weight(t) dt
    for 0 <= z < 1; the coefficient of z^(n-k+1) in its series is the
    expected number of length-i spacings on a row of n hooks.
    """
    if not 0.0 <= z < 1.0:
        raise ValueError(f"mean_gf needs 0 <= z < 1, got z={z}")
    if not 1 <= i <= k - 1:
        raise ValueError(f"spacing length i must lie in 1..{k - 1}")
    if z == 0.0:
        return 0.0
    inner = inner or GaussLegendreRule.make(DEFAULT_INNER_NODES)
    t, w = inner.on(0.0, z)
    integral = float(w @ (t**i * (1.0 - t) * exp_weight(t, k)))
    return 2.0 * integral / ((1.0 - z) ** 2 * exp_weight(z, k))


def _cov_poly(w: float, k: int, zk: float) -> float:
    # polynomial part of the covariance kernel, written in w = 1 - y
    lead = 3.0 + (4 * k - 5) * w + 2.0 * (k - 1) ** 2 * w * w - 2.0 * k * k * w**4
    trail = 2.0 + (4 * k - 3) * w + (2 * k - 1) ** 2 * w * w - 4.0 * k * k * w**3
    return lead - trail * zk


def _cov_kernel_terms(
    y: float, i: int, j: int, k: int, gfi: float, gfj: float, rates: Sequence[float]
) -> tuple[float, float]:
    # gfi/gfj are mean_gf(y, i/j, k); split out so quadrature can cache them
    w = 1.0 - y
    diag = w * y**i if i == j else 0.0
    bi = y**i + y ** (k - 1) * gfi
    bj = y**j + y ** (k - 1) * gfj
    prod = w * w * bi * bj
    corr = rates[i - 1] * rates[j - 1] * _cov_poly(w, k, y**k) / (w * w)
    value = diag + prod - corr
    return value, max(abs(diag), abs(prod), abs(corr))


def cov_kernel(
    y: float,
    i: int,
    j: int,
    k: int,
    rates: Sequence[float],
    inner: GaussLegendreRule | None = None,
) -> tuple[float, float]:
    """Covariance kernel at y plus the largest intermediate magnitude.

    The kernel combines a diagonal piece, a product of mean generating
    functions, and a rate-correction polynomial divided by (1-y)^2; the last
    two diverge separately as y -> 1 while their difference stays bounded.
    Returns (value, max_abs_term) so callers can monitor the cancellation;
    a ratio max_abs_term/|value| above ``CANCELLATION_FLAG_RATIO`` marks the
    evaluation as cancellation-dominated.
    """
    if not 0.0 <= y < 1.0:
        raise ValueError(f"cov_kernel needs 0 <= y < 1, got y={y}")
    if not (1 <= i <= k - 1 and 1 <= j <= k - 1):
        raise ValueError(f"spacing lengths must lie in 1..{k - 1}")
    inner = inner or GaussLegendreRule.make(DEFAULT_INNER_NODES)
    gfi = mean_gf(y, i, k, inner)
    gfj = gfi if j == i else mean_gf(y, j, k, inner)
    return _cov_kernel_terms(y, i, j, k, gfi, gfj, rates)


@dataclass(frozen=True)
class CovQuadratureDiagnostics:
    """Cancellation diagnostics for one covariance-rate quadrature."""

    max_term_ratio: np.ndarray  # per (i, j): max over nodes of max_term/|kernel|
    flagged: np.ndarray  # per (i, j): ratio exceeded CANCELLATION_FLAG_RATIO
    est_abs_error: np.ndarray  # per (i, j): rounding bound for the integral

    def any_flagged(self) -> bool:
        return bool(self.flagged.any())


@dataclass(frozen=True)
class _CovQuadResult:
    matrix: np.ndarray
    diagnostics: CovQuadratureDiagnostics


def cov_rates_by_quadrature(
    k: int,
    rule: GaussLegendreRule | None = None,
    inner: GaussLegendreRule | None = None,
    rates: np.ndarray | None = None,
) -> _CovQuadResult:
    """Limiting covariance rates cov_rate_ij by outer quadrature of the kernel.

    cov_rate_ij = 2/exp_weight(1) * integral_0^1 kernel_ij(y) exp_weight(y) dy.

    Diagnostics: per entry, the worst node-level cancellation ratio (large
    values are expected from nodes near y = 1 where the kernel itself tends
    to zero) and a bound on the rounding error actually transmitted to the
    integral, which stays tiny because endpoint weights are small.
    """
    rule = rule or GaussLegendreRule.make(DEFAULT_OUTER_NODES)
    inner = inner or GaussLegendreRule.make(DEFAULT_INNER_NODES)
    if rates is None:
        rates = rates_by_quadrature(k, rule)
    d = k - 1
    y_nodes, w_nodes = rule.nodes, rule.weights
    ek = exp_weight(y_nodes, k)
    scale = 2.0 / _exp_weight_at_one(k)
    matrix = np.zeros((d, d))
    ratio = np.zeros((d, d))
    err = np.zeros((d, d))
    eps = np.finfo(float).eps
    # mean generating function shared across (i, j) pairs at each node
    gf = np.array(
        [[mean_gf(float(y), i, k, inner) for i in range(1, k)] for y in y_nodes]
    )
    for a in range(1, k):
        for b in range(a, k):
            total = 0.0
            worst = 0.0
            rnd = 0.0
            for t, y in enumerate(y_nodes):
                value, max_term = _cov_kernel_terms(
                    float(y), a, b, k, gf[t, a - 1], gf[t, b - 1], rates
                )
                total += w_nodes[t] * value * ek[t]
                worst = max(worst, max_term / max(abs(value), np.finfo(float).tiny))
                rnd += w_nodes[t] * max_term * ek[t] * eps
            entry = scale * total
            matrix[a - 1, b - 1] = matrix[b - 1, a - 1] = entry
            ratio[a - 1, b - 1] = ratio[b - 1, a - 1] = worst
            err[a - 1, b - 1] = err[b - 1, a - 1] = scale * rnd
    diags = CovQuadratureDiagnostics(
        max_term_ratio=ratio,
        flagged=ratio > CANCELLATION_FLAG_RATIO,
        est_abs_error=err,
    )
    return _CovQuadResult(matrix, diags)


def vacancy_rate_by_quadrature(k: int, rule: GaussLegendreRule | None = None) -> float:
    """Limiting fraction of hooks left free, relative to n + k.

    Equals 1 - k/exp_weight(1) * integral_0^1 exp_weight(y) dy, and also
    sum_j j * rate_j; agreement of the two is a standing identity check.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    rule = rule or GaussLegendreRule.make(DEFAULT_OUTER_NODES)
    integral = rule.integrate(lambda y: exp_weight(y, k))
    return 1.0 - k * integral / _exp_weight_at_one(k)


def cf_residual(
    psi: Callable[[np.ndarray], np.ndarray],
    t_grid: Sequence[float],
    rule: GaussLegendreRule | None = None,
) -> float:
    """Max gap between psi and its split-average over the given t grid.

    The split identity forces any limiting characteristic function to solve
    psi(t) = integral_0^1 psi(sqrt(u) t) psi(sqrt(1-u) t) du; the residual is
    zero exactly for centered normal characteristic functions.
    """
    rule = rule or GaussLegendreRule.make(DEFAULT_OUTER_NODES)
    u, w = rule.nodes, rule.weights
    t = np.asarray(t_grid, dtype=float)
    left = psi(np.sqrt(u)[:, None] * t[None, :])
    right = psi(np.sqrt(1.0 - u)[:, None] * t[None, :])
    averaged = w @ (left * right)
    return float(np.abs(averaged - psi(t)).max())


def cf_fixed_point_residual(
    variance: float,
    t_grid: Sequence[float],
    rule: GaussLegendreRule | None = None,
) -> float:
    """Split-average residual of the centered normal cf exp(-variance t^2 / 2)."""
    if variance < 0:
        raise ValueError("variance must be >= 0")
    return cf_residual(lambda t: np.exp(-0.5 * variance * t * t), t_grid, rule)


@dataclass(frozen=True)
class AsymptoticConstants:
    """Limiting constants for one k, tagged with how they were obtained."""

    k: int
    rates: np.ndarray
    cov_rates: np.ndarray
    vacancy_rate: float
    provenance: str  # "quadrature" or "extrapolation"
    diagnostics: dict = field(default_factory=dict)

    def identity_gap(self) -> float:
        """|sum_j j*rate_j - vacancy_rate|; zero in exact arithmetic."""
        j = np.arange(1, self.k)
        return float(abs(j @ self.rates - self.vacancy_rate))


def constants_by_quadrature(
    k: int,
    outer_nodes: int = DEFAULT_OUTER_NODES,
    inner_nodes: int = DEFAULT_INNER_NODES,
) -> AsymptoticConstants:
    rule = GaussLegendreRule.make(outer_nodes)
    inner = GaussLegendreRule.make(inner_nodes)
    rates = rates_by_quadrature(k, rule)
    cov = cov_rates_by_quadrature(k, rule, inner, rates)
    vac = vacancy_rate_by_quadrature(k, rule)
    return AsymptoticConstants(
        k=k,
        rates=rates,
        cov_rates=cov.matrix,
        vacancy_rate=vac,
        provenance="quadrature",
        diagnostics={
            "outer_nodes": outer_nodes,
            "inner_nodes": inner_nodes,
            "cancellation_max_ratio": float(cov.diagnostics.max_term_ratio.max()),
            "cancellation_flagged": cov.diagnostics.any_flagged(),
            "cov_est_abs_error": float(cov.diagnostics.est_abs_error.max()),
        },
    )


def constants_by_extrapolation(k: int, n_max: int = 300) -> AsymptoticConstants:
    means = mean_recursion(k, n_max)
    r = rates_by_extrapolation(k, n_max, means)
    c = cov_rates_by_extrapolation(k, n_max)
    j = np.arange(1, k)
    return AsymptoticConstants(
        k=k,
        rates=r.value,
        cov_rates=c.value,
        vacancy_rate=float(j @ r.value),
        provenance="extrapolation",
        diagnostics={
            "n_max": n_max,
            "rate_gap": r.gap,
            "cov_gap": c.gap,
            "stabilized": bool(r.stabilized and c.stabilized),
        },
    )
