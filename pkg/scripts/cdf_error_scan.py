"""Error scaling of the binomial-CDF expansion over a doubling n grid.

Runs the two study families (constant p = 1/2 and drifting
p_n = 1/2 + 0.1/sqrt(n), both with j = floor(0.55 n)) and reports
|exact - approximation| against the n^{-5/2} yardstick, plus the
degradation when the last two correction polynomials are dropped
(the older n^{-2} truncation).

Usage: python scripts/cdf_error_scan.py [--n-grid 200..6400-doubling]
"""

from __future__ import annotations

import argparse
import math

from lookback.binom_expansion import cdf_expansion
from lookback.cli import cmd_cdf_bench
from lookback.numerics import binom_cdf_exact

DEFAULT_GRID = (200, 400, 800, 1600, 3200, 6400)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-grid", default=",".join(map(str, DEFAULT_GRID)),
                        help="comma list of n values")
    args = parser.parse_args()
    grid = tuple(int(tok) for tok in args.n_grid.split(","))

    for label, drift in (("p = 0.5", 0.0), ("p = 0.5 + 0.1/sqrt(n)", 0.1)):
        print(f"\nfamily {label}, j = floor(0.55 n)")
        print(f"{'n':>6} {'err(4 terms)':>13} {'err*n^2.5':>10} "
              f"{'err(2 terms)':>13} {'degradation':>11}")
        rows = cmd_cdf_bench(grid, (0.5, drift), 0.55)
        err4_grid, err2_grid = [], []
        for n, exact, _approx, err, err_scaled in rows:
            p = 0.5 + drift / math.sqrt(n)
            truncated = cdf_expansion(n, p, int(0.55 * n)).truncated(2)
            err2 = abs(binom_cdf_exact(n, p, int(0.55 * n)) - truncated)
            err4_grid.append(err)
            err2_grid.append(err2)
            ratio = err2 / err if err > 0.0 else math.inf
            print(f"{n:>6} {err:>13.3e} {err_scaled:>10.4f} "
                  f"{err2:>13.3e} {ratio:>10.1f}x")
        grid_ratio = max(err2_grid) / max(err4_grid)
        print(f"max-over-grid degradation without P3, P4: {grid_ratio:.1f}x")


if __name__ == "__main__":
    main()
