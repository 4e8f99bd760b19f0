"""Print the limiting constants for a range of k, both routes side by side.

Usage: python scripts/constants_table.py [--k-max 8] [--n-max 400]
"""
from __future__ import annotations

import argparse

import numpy as np

from spacings.asymptotics import constants_by_extrapolation, constants_by_quadrature


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=8)
    ap.add_argument("--n-max", type=int, default=400)
    args = ap.parse_args()

    print(f"{'k':>2}  {'j':>2}  {'rate (quad)':>18}  {'rate (recur)':>18}  "
          f"{'var (quad)':>18}  {'gap':>9}")
    for k in range(2, args.k_max + 1):
        quad = constants_by_quadrature(k)
        ext = constants_by_extrapolation(k, args.n_max)
        gap = np.abs(quad.rates - ext.rates).max()
        for j in range(1, k):
            print(
                f"{k:>2}  {j:>2}  {quad.rates[j - 1]:>18.12f}  "
                f"{ext.rates[j - 1]:>18.12f}  "
                f"{quad.cov_rates[j - 1, j - 1]:>18.12f}  {gap:>9.1e}"
            )
        print(
            f"{k:>2}  {'V':>2}  {quad.vacancy_rate:>18.12f}  {ext.vacancy_rate:>18.12f}  "
            f"{'identity gap':>18}  {quad.identity_gap():>9.1e}"
        )
        print()


if __name__ == "__main__":
    main()
