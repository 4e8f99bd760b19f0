"""Finite-n moment recursions for the terminal spacing counts.

Everything here flows from one structural fact: the first block lands
uniformly among the n-k+1 feasible starts and splits the row into two
independent shorter rows.  Averaging over the split point turns each moment
of the terminal counts into an average of products of lower-n moments,
which we evaluate exactly, either in float64 or in rational arithmetic.

Expected counts grow linearly; dividing row-n tables by (n+k) and reading
off the value at large n ("extrapolation") recovers the limiting constants
to near machine precision because the finite-n correction dies off faster
than any geometric rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "MeanTable",
    "CrossMomentTable",
    "ProjectedMomentTable",
    "ExtrapolationResult",
    "AveragingLimitResult",
    "DriftBoundResult",
    "mean_recursion",
    "mean_recursion_cumulative",
    "mean_recursion_exact",
    "cross_moment_recursion",
    "cross_moment_recursion_exact",
    "projected_moment_recursion",
    "projected_moment_recursion_exact",
    "rates_by_extrapolation",
    "cov_rates_by_extrapolation",
    "averaging_recursion_limit",
    "mean_drift_bound",
    "STABILIZATION_LOOKBACK",
    "STABILIZATION_TOL",
]

STABILIZATION_LOOKBACK = 10
STABILIZATION_TOL = 1e-8


def _check_kn(k: int, n_max: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")


@dataclass
class MeanTable:
    """Expected spacing counts; ``values[n, j-1] = E(count of length-j runs)``."""

    k: int
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def rate(self, n: int) -> np.ndarray:
        """Expected counts per (n+k) hooks; converges to the limiting rates."""
        return self.values[n] / (n + self.k)


@dataclass
class CrossMomentTable:
    """Raw second moments and covariances of the count vector, per row length."""

    k: int
    second: np.ndarray  # (n_max+1, k-1, k-1)
    cov: np.ndarray  # same shape

    @property
    def n_max(self) -> int:
        return self.second.shape[0] - 1

    def cov_rate(self, n: int) -> np.ndarray:
        return self.cov[n] / (n + self.k)


@dataclass
class ProjectedMomentTable:
    """Raw and standardized moments of one linear read-out of the counts.

    ``raw[n, m]`` is the m-th raw moment of c . X_n.  ``standardized[n, m]``
    is the m-th moment of the centered sum scaled by n**(-1/2), the scaling
    under which the fluctuations stabilize.
    """

    k: int
    projection: tuple[float, ...]
    raw: np.ndarray
    standardized: np.ndarray

    @property
    def n_max(self) -> int:
        return self.raw.shape[0] - 1


@dataclass(frozen=True)
class ExtrapolationResult:
    """Large-n table read-out plus a stabilization diagnostic."""

    value: np.ndarray
    gap: float
    stabilized: bool
    n_used: int


@dataclass(frozen=True)
class AveragingLimitResult:
    """Terminal value of the weighted-averaging recursion vs its predicted limit."""

    a_final: float
    predicted_limit: float
    gap: float


@dataclass(frozen=True)
class DriftBoundResult:
    """Empirical bound on the centering drift of the split identity."""

    k: int
    sup: float
    per_n: np.ndarray  # per_n[n] = max_j || mean[j] + mean[n-k-j] - mean[n] ||_2


def _seed_mean_rows(k: int, n_max: int, out) -> None:
    # rows n < k are deterministic: a single run of length n
    for n in range(1, min(k, n_max + 1)):
        out[n][n - 1] = 1


def mean_recursion(k: int, n_max: int) -> MeanTable:
    """Expected counts via the one-step recursion.

    (n-k+1) * mean[n] = (n-k) * mean[n-1] + 2 * mean[n-k]   for n > k,
    with deterministic rows below k and a zero row at n = k.
    """
    _check_kn(k, n_max)
    g = np.zeros((n_max + 1, k - 1))
    _seed_mean_rows(k, n_max, g)
    for n in range(k + 1, n_max + 1):
        L = n - k + 1
        g[n] = ((L - 1) * g[n - 1] + 2.0 * g[n - k]) / L
    return MeanTable(k, g)


def mean_recursion_cumulative(k: int, n_max: int) -> MeanTable:
    """Expected counts via the averaged form, kept as an independent check.

    mean[n] = 2/(n-k+1) * sum_{j<=n-k} mean[j].  The running sum is
    compensated so the two forms agree to ~1e-12 relative even at n ~ 1e4.
    """
    _check_kn(k, n_max)
    g = np.zeros((n_max + 1, k - 1))
    _seed_mean_rows(k, n_max, g)
    total = np.zeros(k - 1)
    comp = np.zeros(k - 1)
    for n in range(k, n_max + 1):
        # Kahan update with row n-k entering the window
        y = g[n - k] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        g[n] = 2.0 * total / (n - k + 1)
    return MeanTable(k, g)


def mean_recursion_exact(k: int, n_max: int) -> list[list[Fraction]]:
    """Rational-arithmetic twin of :func:`mean_recursion` for small n."""
    _check_kn(k, n_max)
    g = [[Fraction(0)] * (k - 1) for _ in range(n_max + 1)]
    _seed_mean_rows(k, n_max, g)
    for n in range(k + 1, n_max + 1):
        L = n - k + 1
        g[n] = [
            (Fraction(L - 1) * a + 2 * b) / L for a, b in zip(g[n - 1], g[n - k])
        ]
    return g


def cross_moment_recursion(
    k: int, n_max: int, means: MeanTable | None = None
) -> CrossMomentTable:
    """Raw second moments of the count vector by split averaging.

    second[n] = 2/(n-k+1) * sum_h second[h]
              + 1/(n-k+1) * sum_h (outer(mean[h], mean[n-k-h]) + transpose).
    """
    _check_kn(k, n_max)
    if means is None or means.n_max < n_max:
        means = mean_recursion(k, n_max)
    g = means.values
    d = k - 1
    second = np.zeros((n_max + 1, d, d))
    for n in range(1, min(k, n_max + 1)):
        second[n, n - 1, n - 1] = 1.0
    total = np.zeros((d, d))
    comp = np.zeros((d, d))
    for n in range(k, n_max + 1):
        L = n - k + 1
        y = second[n - k] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        a = g[:L]
        cross = a.T @ a[::-1]
        second[n] = (2.0 * total + cross + cross.T) / L
    cov = second - g[:, :, None] * g[:, None, :]
    return CrossMomentTable(k, second, cov)


def cross_moment_recursion_exact(
    k: int, n_max: int, means: list[list[Fraction]] | None = None
) -> list[list[list[Fraction]]]:
    """Rational twin of :func:`cross_moment_recursion` (raw second moments)."""
    _check_kn(k, n_max)
    if means is None:
        means = mean_recursion_exact(k, n_max)
    d = k - 1
    second = [[[Fraction(0)] * d for _ in range(d)] for _ in range(n_max + 1)]
    for n in range(1, min(k, n_max + 1)):
        second[n][n - 1][n - 1] = Fraction(1)
    for n in range(k, n_max + 1):
        L = n - k + 1
        out = [[Fraction(0)] * d for _ in range(d)]
        for h in range(L):
            gh, go = means[h], means[n - k - h]
            sh = second[h]
            for i in range(d):
                for j in range(d):
                    out[i][j] += 2 * sh[i][j] + gh[i] * go[j] + gh[j] * go[i]
        second[n] = [[v / L for v in row] for row in out]
    return second


def _binomial_triangle(m_max: int) -> np.ndarray:
    binom = np.zeros((m_max + 1, m_max + 1))
    for m in range(m_max + 1):
        binom[m, 0] = 1.0
        for i in range(1, m + 1):
            binom[m, i] = binom[m - 1, i - 1] + (binom[m - 1, i] if i <= m - 1 else 0.0)
    return binom


def projected_moment_recursion(
    projection: Sequence[float], k: int, n_max: int, order: int = 8
) -> ProjectedMomentTable:
    """Raw moments of c . X_n up to ``order`` by binomial split averaging.

    raw[n, m] = 1/(n-k+1) * sum_j sum_i C(m, i) raw[j, i] raw[n-k-j, m-i],
    seeded with the deterministic rows below k.  Standardized moments follow
    by re-centering at the mean and scaling by n**(-m/2).
    """
    _check_kn(k, n_max)
    c = tuple(float(v) for v in projection)
    if len(c) != k - 1:
        raise ValueError(f"projection must have length {k - 1}")
    if order < 2:
        raise ValueError("order must be >= 2")
    M = order
    binom = _binomial_triangle(M)
    raw = np.zeros((n_max + 1, M + 1))
    raw[0] = 0.0
    raw[0, 0] = 1.0
    with np.errstate(over="ignore"):
        for n in range(1, min(k, n_max + 1)):
            raw[n] = float(c[n - 1]) ** np.arange(M + 1)
    if n_max >= k:
        raw[k, 0] = 1.0
    for n in range(k + 1, n_max + 1):
        L = n - k + 1
        a = raw[:L]
        # pair[i, l] = sum_j raw[j, i] * raw[n-k-j, l]; only the anti-diagonals
        # i + l = m <= M are read, entries above them may overflow harmlessly.
        # Non-finite values that reach a read entry trip the guard below.
        with np.errstate(over="ignore", invalid="ignore"):
            pair = a.T @ a[::-1]
        for m in range(M + 1):
            raw[n, m] = binom[m, : m + 1] @ pair[np.arange(m + 1), m - np.arange(m + 1)] / L
    if not np.isfinite(raw).all():
        raise OverflowError(
            "projected moment recursion left double range; lower order or n_max"
        )
    std = np.zeros_like(raw)
    std[:, 0] = 1.0
    mu = raw[:, 1]
    for n in range(1, n_max + 1):
        scale = float(n) ** -0.5
        for m in range(1, M + 1):
            i = np.arange(m + 1)
            central = binom[m, : m + 1] @ (raw[n, : m + 1] * (-mu[n]) ** (m - i))
            std[n, m] = central * scale**m
    return ProjectedMomentTable(k, c, raw, std)


def projected_moment_recursion_exact(
    projection: Sequence[Fraction | int], k: int, n_max: int, order: int = 6
) -> list[list[Fraction]]:
    """Rational twin of the projected raw-moment recursion (no standardization)."""
    _check_kn(k, n_max)
    c = tuple(Fraction(v) for v in projection)
    if len(c) != k - 1:
        raise ValueError(f"projection must have length {k - 1}")
    M = order
    comb = math.comb
    raw = [[Fraction(0)] * (M + 1) for _ in range(n_max + 1)]
    raw[0][0] = Fraction(1)
    for n in range(1, min(k, n_max + 1)):
        raw[n] = [c[n - 1] ** m for m in range(M + 1)]
    if n_max >= k:
        raw[k][0] = Fraction(1)
    for n in range(k + 1, n_max + 1):
        L = n - k + 1
        for m in range(M + 1):
            acc = Fraction(0)
            for j in range(L):
                left, right = raw[j], raw[n - k - j]
                acc += sum(comb(m, i) * left[i] * right[m - i] for i in range(m + 1))
            raw[n][m] = acc / L
    return raw


def rates_by_extrapolation(
    k: int, n_max: int = 200, means: MeanTable | None = None
) -> ExtrapolationResult:
    """Limiting spacing rates read off a finite mean table.

    Returns mean[n_max]/(n_max+k) together with the change against the row
    ``STABILIZATION_LOOKBACK`` earlier; a gap above ``STABILIZATION_TOL``
    marks the read-out as not stabilized.
    """
    if n_max <= k + STABILIZATION_LOOKBACK:
        raise ValueError("n_max too small to diagnose stabilization")
    if means is None or means.n_max < n_max:
        means = mean_recursion(k, n_max)
    value = means.rate(n_max)
    prev = means.rate(n_max - STABILIZATION_LOOKBACK)
    gap = float(np.abs(value - prev).max())
    return ExtrapolationResult(value, gap, gap < STABILIZATION_TOL, n_max)


def cov_rates_by_extrapolation(
    k: int, n_max: int = 200, table: CrossMomentTable | None = None
) -> ExtrapolationResult:
    """Limiting covariance rates read off a finite covariance table."""
    if n_max <= k + STABILIZATION_LOOKBACK:
        raise ValueError("n_max too small to diagnose stabilization")
    if table is None or table.n_max < n_max:
        table = cross_moment_recursion(k, n_max)
    value = table.cov_rate(n_max)
    prev = table.cov_rate(n_max - STABILIZATION_LOOKBACK)
    gap = float(np.abs(value - prev).max())
    return ExtrapolationResult(value, gap, gap < STABILIZATION_TOL, n_max)


def averaging_recursion_limit(
    alpha: float, beta: float, k: int, n_max: int
) -> AveragingLimitResult:
    """Drive a_n = alpha + 2/(n-k+1) * sum_{j<=n-k} (j/n)**beta * a_j to large n.

    For beta > 1 the sequence converges to alpha*(beta+1)/(beta-1); the
    result reports the terminal value, the predicted limit, and their gap.
    Runs in O(n_max) by carrying sum j**beta * a_j.
    """
    if beta <= 1:
        raise ValueError(f"beta must exceed 1, got beta={beta}")
    _check_kn(k, n_max)
    if n_max <= k:
        raise ValueError("n_max must exceed k")
    a = [0.0] * (n_max + 1)  # rows 0..k stay at the zero seed
    weighted_sum = 0.0
    for n in range(k + 1, n_max + 1):
        t = n - k
        weighted_sum += t**beta * a[t]
        a[n] = alpha + 2.0 * weighted_sum / ((n - k + 1) * n**beta)
    predicted = alpha * (beta + 1.0) / (beta - 1.0)
    return AveragingLimitResult(a[n_max], predicted, abs(a[n_max] - predicted))


def mean_drift_bound(
    k: int, n_max: int, means: MeanTable | None = None
) -> DriftBoundResult:
    """Empirical supremum of the centering drift in the split identity.

    For each n the drift at split point j is mean[j] + mean[n-k-j] - mean[n];
    linear growth cancels exactly, so the norm stays bounded and its per-n
    maximum settles to a constant once the mean rates have converged.
    """
    _check_kn(k, n_max)
    if means is None or means.n_max < n_max:
        means = mean_recursion(k, n_max)
    g = means.values
    per_n = np.zeros(n_max + 1)
    for n in range(k, n_max + 1):
        L = n - k
        block = g[: L + 1] + g[L::-1] - g[n]
        per_n[n] = float(np.sqrt((block * block).sum(axis=1)).max())
    return DriftBoundResult(k, float(per_n.max()), per_n)
