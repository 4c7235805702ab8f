"""Fine-structure scan of the n-period call price toward its limit.

Prices the study call (spot 80, minimum 60, sigma 0.2, rate 0.08,
tau 1.27) for every n in [2, n_max] with the reduced closed form and
reports the oscillation structure: the price creeps up toward the
continuous value while the 1/n coefficient sweeps parabola-like arcs
in kappa_n = {j0}(1 - {j0}).

Usage: python scripts/figure5_scan.py [--n-max 400] [--out PATH]
"""

from __future__ import annotations

import argparse
import math

from lookback.asymptotics import expansion_coeffs, kappa_n
from lookback.cli import TABLE_MARKETS, _render_csv, cmd_figure5


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-max", type=int, default=400)
    parser.add_argument("--out", default=None, help="write the scan as CSV")
    args = parser.parse_args()

    market, side = TABLE_MARKETS["T1"]
    rows = cmd_figure5(args.n_max)
    exp = expansion_coeffs(market, side)

    print(f"n in [2, {args.n_max}]  continuous price {exp.c0:.6f}")
    print(f"{'n':>5} {'price_n':>12} {'gap':>11} {'scaled2':>9} {'kappa_n':>8}")
    step = max(1, len(rows) // 20)
    for n, price_n, price_bs in rows[::step]:
        gap = price_n - price_bs
        scaled2 = (gap - exp.c1 / math.sqrt(n)) * n
        print(f"{n:>5} {price_n:>12.8f} {gap:>11.2e} {scaled2:>9.4f} "
              f"{kappa_n(market, n, side):>8.4f}")
    worst = max(rows, key=lambda row: abs(row[1] - row[2]))
    print(f"widest gap at n={worst[0]}: {worst[1] - worst[2]:+.6f}")

    if args.out is not None:
        text = _render_csv("lookback.figure5.v1", ("n", "price_n", "price_bs"),
                           rows)
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
