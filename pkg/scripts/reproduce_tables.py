"""Reproduce the four convergence tables and report residual diagnostics.

For each table market the script prints, per n, the n-period price, the
continuous price, the two scaled residuals and their limit coefficients,
then the distance between each scaled residual and its coefficient.
Optionally dumps the same rows as CSV via --out-dir.

Usage: python scripts/reproduce_tables.py [--tables T1,T2,T3,T4] [--out-dir DIR]
"""

from __future__ import annotations

import argparse
import pathlib

from lookback.cli import TABLE_MARKETS, TableId, _render_csv, cmd_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tables", default="T1,T2,T3,T4",
                        help="comma list of table ids")
    parser.add_argument("--out-dir", default=None,
                        help="also write <table>.csv files here")
    args = parser.parse_args()

    for table_id in args.tables.split(","):
        if table_id not in TABLE_MARKETS:
            parser.error(f"unknown table id {table_id!r}")
        market, side = TABLE_MARKETS[table_id]
        rows = cmd_table(table_id)  # type: ignore[arg-type]
        print(f"\n{table_id}: side={side} spot={market.spot} "
              f"extremum={market.extremum} sigma={market.sigma} "
              f"rate={market.rate} tau={market.tau}")
        header = (f"{'n':>7} {'price_n':>12} {'price_bs':>10} "
                  f"{'scaled1':>9} {'coeff1':>9} {'scaled2':>9} {'coeff2':>9} "
                  f"{'|s1-c1|':>9} {'|s2-c2|':>9}")
        print(header)
        for r in rows:
            print(f"{r.n:>7} {r.price_n:>12.6f} {r.price_bs:>10.4f} "
                  f"{r.scaled1:>9.4f} {r.coeff1:>9.4f} "
                  f"{r.scaled2:>9.4f} {r.coeff2:>9.4f} "
                  f"{abs(r.scaled1 - r.coeff1):>9.2e} "
                  f"{abs(r.scaled2 - r.coeff2):>9.2e}")
        if args.out_dir is not None:
            out_dir = pathlib.Path(args.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            text = _render_csv(
                "lookback.table.v1",
                ("n", "price_n", "price_bs", "scaled1", "coeff1", "scaled2",
                 "coeff2"),
                [(r.n, r.price_n, r.price_bs, r.scaled1, r.coeff1, r.scaled2,
                  r.coeff2) for r in rows],
            )
            path = out_dir / f"{table_id}.csv"
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
