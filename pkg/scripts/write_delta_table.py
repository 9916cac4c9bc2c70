"""Write normalized Delta eigenvalues tau(p)/p^{11/2} as a '<prime>,<lambda>' table.

Useful as a template for user-supplied eigenvalue files and for exercising
the file-input path end to end:

    python3 scripts/write_delta_table.py --nmax 5000 --out delta.txt
    assoc-totient selftest --quick --eigenvalues delta.txt
"""

import argparse

from assoc_totient.arith import primes_up_to
from assoc_totient.cli import parse_count
from assoc_totient.sources import delta_source, normalized_lambda


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=parse_count, default=10**4)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    src = delta_source(args.nmax, cap=max(args.nmax, 2**16))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# Delta, tau(p)/p^(11/2), p <= {args.nmax}\n")
        for p in primes_up_to(args.nmax):
            fh.write(f"{p},{normalized_lambda(src, int(p))!r}\n")


if __name__ == "__main__":
    main()
