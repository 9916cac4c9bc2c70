"""Residual R(x) = E0(x) - E(x)/x for zeta on geometric checkpoints.

Prints x, R(x), the running decay fit and the trend summary.

    python3 scripts/zeta_residual_trend.py [--xmax 1e8]
"""

import argparse
import math
import time

from assoc_totient.analysis import decay_fit, decay_trend, monotonicity_violations, residual_series
from assoc_totient.cli import parse_count
from assoc_totient.euler import c_constant, zeta_spec
from assoc_totient.sieve import geometric_checkpoints, scan


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--xmax", type=parse_count, default=10**7)
    args = ap.parse_args()

    spec = zeta_spec()
    C = c_constant(spec, 1e-12)
    t0 = time.perf_counter()
    rows = scan(spec, args.xmax, geometric_checkpoints(args.xmax), C)
    dt = time.perf_counter() - t0
    series = residual_series(rows)

    print(f"{'x':>12} {'R(x)':>24} {'sqrt(log x)':>12} {'log|R|':>10}")
    for x, r in series:
        print(f"{x:>12} {r.real:>24.16e} {math.sqrt(math.log(x)):>12.5f} {math.log(abs(r)):>10.4f}")
    fit = decay_fit(series)
    xmax_r, ups = decay_trend(series, xmin=1000)
    print(f"\nscan {dt:.2f}s")
    print(f"fit: log|R| = {fit.slope:.4f} sqrt(log x) + {fit.intercept:.4f} ({fit.used} points)")
    print(f"max|R| over x >= 1e3 at x = {xmax_r}; increases before it: {ups}; "
          f"all increases: {monotonicity_violations(series)}")


if __name__ == "__main__":
    main()
