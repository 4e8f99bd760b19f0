"""Exact terminal-state distributions, computed two independent ways.

Route one (``pmf_split``) exploits the fact that the first block lands
uniformly among the ``n-k+1`` starts of a fresh row and splits it into two
independent shorter rows; the law of the terminal counts is therefore a
uniform mixture of convolutions of lower-n laws.

Route two (``pmf_direct``) never uses that shortcut: it walks the process
state space directly.  A state is the multiset of currently open runs of
length >= k; every feasible block (gap, offset) is taken with probability
1/W where W is the total number of feasible blocks.  Agreement of the two
routes on their common range is a strong end-to-end check.

All probabilities are exact rationals.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .model import GapCounts, ProcessParams, single_spacing_state, validate_counts

__all__ = [
    "CapExceededError",
    "Pmf",
    "ExactMoments",
    "pmf_split",
    "pmf_direct",
    "moments_from_pmf",
    "total_variation_empirical",
    "chi_square_gof",
    "DEFAULT_SPLIT_CAP",
    "DEFAULT_DIRECT_CAP",
]

DEFAULT_SPLIT_CAP = 40
DEFAULT_DIRECT_CAP = 20


class CapExceededError(Exception):
    """Raised when a requested exact computation exceeds its size cap."""


@dataclass
class Pmf:
    """Exact probability mass function over terminal states."""

    params: ProcessParams
    probs: dict[GapCounts, Fraction] = field(repr=False)

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def support(self) -> list[GapCounts]:
        return sorted(self.probs, key=lambda g: (g.counts, g.hats))

    def prob(self, g: GapCounts) -> Fraction:
        return self.probs.get(g, Fraction(0))

    def validate(self) -> bool:
        """All support points structurally valid and mass sums to one."""
        return self.total() == 1 and all(
            validate_counts(self.params, g) for g in self.probs
        )

    def total_variation(self, other: "Pmf") -> Fraction:
        keys = set(self.probs) | set(other.probs)
        return sum((abs(self.prob(g) - other.prob(g)) for g in keys), Fraction(0)) / 2

    def to_rows(self) -> list[dict]:
        """Serialization-ready rows, canonically ordered."""
        return [
            {
                "counts": list(g.counts),
                "hats": g.hats,
                "prob_num": p.numerator,
                "prob_den": p.denominator,
                "prob": float(p),
            }
            for g, p in sorted(self.probs.items(), key=lambda kv: (kv[0].counts, kv[0].hats))
        ]


def _convolve_states(a: GapCounts, b: GapCounts) -> GapCounts:
    # one extra hat for the block whose placement produced the two sub-rows
    return GapCounts(
        tuple(x + y for x, y in zip(a.counts, b.counts)), a.hats + b.hats + 1
    )


def pmf_split(params: ProcessParams, cap: int = DEFAULT_SPLIT_CAP) -> Pmf:
    """Exact law of the terminal state via the split-and-convolve recursion.

    Rows shorter than k are deterministic.  For n >= k the first block start
    is uniform on {0..n-k}, leaving independent sub-rows of lengths j and
    n-k-j whose laws convolve.
    """
    n, k = params.n, params.k
    if n > cap:
        raise CapExceededError(f"pmf_split asked for n={n} above cap={cap}")
    tables: list[dict[GapCounts, Fraction]] = []
    for m in range(n + 1):
        if m < k:
            tables.append({single_spacing_state(m, k): Fraction(1)})
            continue
        share = Fraction(1, m - k + 1)
        acc: dict[GapCounts, Fraction] = {}
        for j in range(m - k + 1):
            for s1, p1 in tables[j].items():
                for s2, p2 in tables[m - k - j].items():
                    key = _convolve_states(s1, s2)
                    acc[key] = acc.get(key, Fraction(0)) + p1 * p2
        tables.append({s: p * share for s, p in acc.items()})
    return Pmf(params, tables[n])


def pmf_direct(params: ProcessParams, cap: int = DEFAULT_DIRECT_CAP) -> Pmf:
    """Exact law by direct recursion over the multiset of open runs.

    From a state with feasible-block count W, each (run, offset) pair is
    taken with probability 1/W; children shorter than k become terminal
    spacings on the spot.  Memoized on the sorted multiset of open runs.
    """
    n, k = params.n, params.k
    if n > cap:
        raise CapExceededError(f"pmf_direct asked for n={n} above cap={cap}")
    if n < k:
        return Pmf(params, {single_spacing_state(n, k): Fraction(1)})

    zero = GapCounts((0,) * (k - 1), 0)
    memo: dict[tuple[int, ...], dict[GapCounts, Fraction]] = {}

    def law(gaps: tuple[int, ...]) -> dict[GapCounts, Fraction]:
        if not gaps:
            return {zero: Fraction(1)}
        hit = memo.get(gaps)
        if hit is not None:
            return hit
        W = sum(g - k + 1 for g in gaps)
        out: dict[GapCounts, Fraction] = {}
        for g, mult in Counter(gaps).items():
            rest = list(gaps)
            rest.remove(g)
            for off in range(g - k + 1):
                extra = [0] * (k - 1)
                nxt = list(rest)
                for child in (off, g - k - off):
                    if child >= k:
                        nxt.append(child)
                    elif child >= 1:
                        extra[child - 1] += 1
                weight = Fraction(mult, W)
                for s, p in law(tuple(sorted(nxt))).items():
                    key = GapCounts(
                        tuple(c + e for c, e in zip(s.counts, extra)), s.hats + 1
                    )
                    out[key] = out.get(key, Fraction(0)) + weight * p
        memo[gaps] = out
        return out

    return Pmf(params, dict(law((n,))))


@dataclass(frozen=True)
class ExactMoments:
    """Exact rational moments of the terminal spacing-count vector."""

    mean: tuple[Fraction, ...]
    second_raw: tuple[tuple[Fraction, ...], ...]
    projection: tuple[Fraction, ...]
    projected_raw: tuple[Fraction, ...]

    def covariance(self) -> tuple[tuple[Fraction, ...], ...]:
        d = len(self.mean)
        return tuple(
            tuple(self.second_raw[i][j] - self.mean[i] * self.mean[j] for j in range(d))
            for i in range(d)
        )


def moments_from_pmf(
    pmf: Pmf,
    order: int = 2,
    projection: Sequence[Fraction | int] | None = None,
) -> ExactMoments:
    """Mean vector, raw second moments, and raw projected moments up to ``order``."""
    k = pmf.params.k
    if projection is None:
        proj = tuple(Fraction(1) for _ in range(k - 1))
    else:
        proj = tuple(Fraction(c) for c in projection)
    if len(proj) != k - 1:
        raise ValueError(f"projection must have length {k - 1}")
    mean = [Fraction(0)] * (k - 1)
    second = [[Fraction(0)] * (k - 1) for _ in range(k - 1)]
    raw = [Fraction(0)] * (order + 1)
    for g, p in pmf.probs.items():
        for i, ci in enumerate(g.counts):
            if ci:
                mean[i] += p * ci
                for j, cj in enumerate(g.counts):
                    second[i][j] += p * ci * cj
        y = sum((c * w for c, w in zip(g.counts, proj)), Fraction(0))
        acc = Fraction(1)
        for m in range(order + 1):
            raw[m] += p * acc
            acc *= y
    return ExactMoments(
        mean=tuple(mean),
        second_raw=tuple(tuple(row) for row in second),
        projection=proj,
        projected_raw=tuple(raw),
    )


def total_variation_empirical(pmf: Pmf, counter: Mapping[GapCounts, int]) -> float:
    """TV distance between an empirical state counter and the exact law."""
    m = sum(counter.values())
    if m == 0:
        raise ValueError("empty sample")
    keys = set(pmf.probs) | set(counter)
    return 0.5 * sum(abs(counter.get(g, 0) / m - float(pmf.prob(g))) for g in keys)


def chi_square_gof(
    pmf: Pmf, counter: Mapping[GapCounts, int], min_expected: float = 5.0
) -> tuple[float, int, float]:
    """Chi-square goodness of fit of a sample against the exact law.

    Support cells whose expected count falls below ``min_expected`` are
    pooled into one remainder cell.  Returns (statistic, dof, p-value).
    Observations outside the exact support are rejected outright.
    """
    m = sum(counter.values())
    if m == 0:
        raise ValueError("empty sample")
    stray = set(counter) - set(pmf.probs)
    if stray:
        raise ValueError(f"observed states outside exact support: {sorted_preview(stray)}")
    cells: list[tuple[float, int]] = []
    pooled_exp, pooled_obs = 0.0, 0
    for g, p in pmf.probs.items():
        expected = float(p) * m
        observed = counter.get(g, 0)
        if expected < min_expected:
            pooled_exp += expected
            pooled_obs += observed
        else:
            cells.append((expected, observed))
    if pooled_exp > 0:
        cells.append((pooled_exp, pooled_obs))
    if len(cells) < 2:
        # distribution effectively degenerate at this sample size
        return 0.0, 0, 1.0
    stat = sum((obs - exp) ** 2 / exp for exp, obs in cells)
    dof = len(cells) - 1
    pvalue = float(_scipy_stats.chi2.sf(stat, dof))
    return stat, dof, pvalue


def sorted_preview(states: Iterable[GapCounts], limit: int = 3) -> list[GapCounts]:
    return sorted(states, key=lambda g: (g.counts, g.hats))[:limit]


def empirical_counter(
    counts: np.ndarray, hats: np.ndarray
) -> dict[GapCounts, int]:
    """Collapse simulation output arrays into a state counter."""
    combined = np.column_stack([counts, hats])
    uniq, freq = np.unique(combined, axis=0, return_counts=True)
    return {
        GapCounts(tuple(int(v) for v in row[:-1]), int(row[-1])): int(f)
        for row, f in zip(uniq, freq)
    }
