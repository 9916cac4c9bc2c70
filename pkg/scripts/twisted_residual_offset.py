"""Residuals for non-zeta products against the constant -1/2 prod_p 1/F_p(1).

When sum alpha(n)/n does not vanish, the smoothed sum keeps a constant
term and R(x) tends to that constant rather than to 0. This script puts the
two side by side for chi mod 4 and for Delta twisted by chi mod 5.

    python3 scripts/twisted_residual_offset.py
"""

import math

from assoc_totient.analysis import residual_offset_estimate, residual_series
from assoc_totient.euler import c_constant, parse_product_spec
from assoc_totient.sieve import geometric_checkpoints, scan

RUNS = [
    ("dirichlet:q=4,index=1", 10**7),
    ("dirichlet:q=7,index=2", 10**6),
    ("gl2:source=delta,chi=q=5,index=1", 10**4),
]


def fmt(z):
    return f"{z.real:+.6f}{z.imag:+.6f}i"


def main():
    for text, X in RUNS:
        spec = parse_product_spec(text)
        C = c_constant(spec, 1e-12, allow_partial=True)
        bound = spec.coverage_bound() or X
        off = residual_offset_estimate(spec, min(X, bound))
        print(f"\n{text}  (C tail bound {C.tail_bound:.2g})")
        print(f"  offset estimate {fmt(off)}")
        for x, r in residual_series(scan(spec, X, geometric_checkpoints(X), C)):
            print(f"  x={x:>9}  R={fmt(r)}  |R - offset|={abs(r - off):.3e}")
    print(f"\n-2/pi = {-2 / math.pi:+.6f}")


if __name__ == "__main__":
    main()
