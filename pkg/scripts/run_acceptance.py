"""Run the acceptance criteria and print one line per criterion.

    python3 scripts/run_acceptance.py [--quick] [--eigenvalues FILE] [--threads N]
"""

import argparse
import sys

from assoc_totient.acceptance import format_results, run_all


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="skip the subprocess criteria (11, 12)")
    ap.add_argument("--eigenvalues", default=None)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    results = run_all(quick=args.quick, eigenvalue_file=args.eigenvalues, threads=args.threads)
    sys.stdout.write(format_results(results))
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
