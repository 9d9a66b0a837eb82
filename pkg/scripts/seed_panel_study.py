"""Golden-seed panel: all three checkers on the published portfolio.

Audits the (0.1, 0.9) model across a panel of data seeds at n=1e6 and
tabulates verdicts and p-values; every cell should read VIOLATED.
"""

import csv
import sys
from pathlib import Path

from fairlens import (TestConfig, check_independence, check_separation,
                      check_sufficiency, make_example_model, simulate)


def main() -> int:
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("seed_panel.csv")

    model = make_example_model(0.1, 0.9)
    rows = []
    for seed in range(1, n_seeds + 1):
        ds = simulate(model, 10**6, seed=seed)
        ind = check_independence(
            ds.x1, ds.d, TestConfig(n_permutations=1999, seed=1000 + seed))
        sep = check_separation(
            ds.x1, ds.d, ds.y, TestConfig(n_permutations=199, seed=2000 + seed))
        suf = check_sufficiency(
            ds.y, ds.d, ds.x1, TestConfig(n_permutations=199, seed=3000 + seed))
        rows.append([seed, ind.verdict, ind.p_value, sep.verdict, sep.p_value,
                     suf.verdict, suf.p_value])
        print(f"seed {seed:3d}: ind {ind.verdict} p={ind.p_value:.2e} | "
              f"sep {sep.verdict} p={sep.p_value:.2e} | "
              f"suf {suf.verdict} p={suf.p_value:.2e}")

    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "independence", "p_independence",
                         "separation", "p_separation",
                         "sufficiency", "p_sufficiency"])
        writer.writerows(rows)
    print(f"panel written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
