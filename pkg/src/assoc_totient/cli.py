"""Command-line interface.

Exit codes: 0 success, 2 data gap, 3 spec/file parse error, 4 argument
domain error.
"""

from __future__ import annotations

import argparse
import os
import sys
from decimal import Decimal, InvalidOperation

from .errors import EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, AssocTotientError

_SUFFIX = {"": 1, "K": 1024, "M": 1024**2, "G": 1024**3}


def parse_count(text):
    """Integer argument that may be written in scientific notation (``1e6``)."""
    try:
        d = Decimal(str(text).strip())
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def parse_bytes(text):
    t = str(text).strip().upper().removesuffix("B").removesuffix("I")
    suffix = t[-1] if t and t[-1] in "KMG" else ""
    return parse_count(t[: len(t) - len(suffix)]) * _SUFFIX[suffix]


def parse_checkpoints(text):
    return [parse_count(s) for s in str(text).split(",") if s.strip()]


def _global_flags(default):
    # subcommand copies use SUPPRESS so they do not overwrite flags given
    # before the subcommand name
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--threads", type=int, default=default, help="worker threads (default: all cores); never changes output")
    g.add_argument("--memory-cap", type=parse_bytes, default=default, help="allocation cap, e.g. 2G (default 2G)")
    g.add_argument("--format", choices=["csv", "json", "plot-data"], default=default)
    g.add_argument("--out", default=default, help="output path (default: stdout)")
    g.add_argument("--allow-ramanujan-violations", action="store_true", default=default,
                   help="accept table eigenvalues with |lambda(p)| > 2 and report them")
    g.add_argument("--tau-n", type=parse_count, default=default, help="built-in Delta coverage (default 1e4)")
    g.add_argument("--config", default=default, help="key=value file mirroring the flags; flags win")
    return g


def build_parser():
    g = _global_flags(argparse.SUPPRESS)
    p = argparse.ArgumentParser(
        prog="assoc-totient",
        description="Associated Euler totient phi(n,F) and error-term residual checks.",
        parents=[_global_flags(None)],
        epilog="product specs: zeta | dirichlet:q=<Q>,index=<e1.e2..> | "
        "gl2:source=delta|file:<path>[,chi=q=<Q>,index=<..>]",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("const", parents=[g], help="print C(F) with its error bound")
    c.add_argument("spec")
    c.add_argument("--tol", type=float, default=None)
    c.add_argument("--partial", action="store_true", help="clip the cutoff at the eigenvalue coverage")

    ph = sub.add_parser("phi", parents=[g], help="phi(n,F) and the divisor-sum cross-check")
    ph.add_argument("spec")
    ph.add_argument("n", type=parse_count)

    s = sub.add_parser("scan", parents=[g], help="checkpointed partial sums, E, E0, residual report")
    s.add_argument("spec")
    s.add_argument("--xmax", type=parse_count, default=None)
    s.add_argument("--checkpoints", type=parse_checkpoints, default=None,
                   help="comma-separated list (default: geometric 10^{k/4})")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--report", default=None, help="also write the residual report JSON here")

    se = sub.add_parser("series", parents=[g], help="sum alpha(n)/n^2, h(n) table and boundedness")
    se.add_argument("spec")
    se.add_argument("--nmax", type=parse_count, default=None)
    se.add_argument("--tol", type=float, default=None)

    d = sub.add_parser("dump", parents=[g], help="materialise phi(n,F)/n for n <= xmax as CSV")
    d.add_argument("spec")
    d.add_argument("--xmax", type=parse_count, default=None)

    st = sub.add_parser("selftest", parents=[g], help="run the acceptance criteria")
    st.add_argument("--quick", action="store_true")
    st.add_argument("--eigenvalues", default=None, help="also run the Maass-input trend check from this file")
    return p


_CONFIG_KEYS = {
    "threads": int,
    "memory_cap": parse_bytes,
    "format": str,
    "out": str,
    "allow_ramanujan_violations": lambda v: v.strip().lower() in ("1", "true", "yes"),
    "tau_n": parse_count,
    "xmax": parse_count,
    "nmax": parse_count,
    "tol": float,
    "checkpoints": parse_checkpoints,
    "spec": str,
}


def read_config(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise argparse.ArgumentTypeError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise argparse.ArgumentTypeError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _CONFIG_KEYS[key](val.strip())
    return out


DEFAULTS = {
    "format": "csv",
    "tol": 1e-12,
    "xmax": None,
    "nmax": 1000,
    "allow_ramanujan_violations": False,
    "tau_n": 10_000,
}


def _resolve(args):
    conf = read_config(args.config) if args.config else {}
    for key, val in conf.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    for key, val in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def _write(args, data):
    if isinstance(data, str):
        data = data.encode()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _cfmt(z):
    return f"{z.real:.17g}{z.imag:+.17g}i" if z.imag else f"{z.real:.17g}"


def _spec(args):
    from .euler import parse_product_spec

    return parse_product_spec(
        args.spec,
        allow_violations=bool(args.allow_ramanujan_violations),
        tau_n=args.tau_n,
        tau_cap=max(args.tau_n, 2**16),
    )


def cmd_const(args):
    from .euler import c_constant

    spec = _spec(args)
    res = c_constant(spec, args.tol, allow_partial=args.partial)
    if args.format == "json":
        from .analysis import _json

        _write(args, _json({"schema": 1, "type": "constant", "spec": spec.describe(),
                            "C": res.value, "cutoff": res.cutoff,
                            "tail_bound": res.tail_bound, "method": res.method}) + "\n")
    else:
        _write(args, f"C = {_cfmt(res.value)}\ntail_bound = {res.tail_bound:.3g}\n"
                     f"cutoff = {res.cutoff}\nmethod = {res.method}\n")
    return EXIT_OK


def cmd_phi(args):
    from .euler import phi, phi_via_divisors

    spec = _spec(args)
    a = phi(spec, args.n)
    b = phi_via_divisors(spec, args.n)
    _write(args, f"phi = {_cfmt(a)}\ndivisor_sum = {_cfmt(b)}\nabs_diff = {abs(a - b):.3g}\n")
    return EXIT_OK


def cmd_scan(args):
    from .analysis import build_residual_report, emit_report, residual_offset_estimate
    from .euler import c_constant
    from .sieve import DEFAULT_MEMORY_CAP, checkpoints_csv, geometric_checkpoints, scan

    if args.xmax is None:
        raise argparse.ArgumentTypeError("scan needs --xmax")
    spec = _spec(args)
    cps = args.checkpoints if args.checkpoints else geometric_checkpoints(args.xmax)
    C = c_constant(spec, args.tol, allow_partial=True)
    rows = scan(spec, args.xmax, cps, C, threads=args.threads,
                memory_cap=args.memory_cap or DEFAULT_MEMORY_CAP)
    offset = None
    bound = spec.coverage_bound()
    if spec.kind != "zeta":
        offset = residual_offset_estimate(spec, min(args.xmax, bound or args.xmax))
    report = build_residual_report(spec.describe(), rows, C, offset=offset)
    if args.format == "csv":
        _write(args, checkpoints_csv(rows))
    else:
        _write(args, emit_report(report, args.format))
    if args.report:
        with open(args.report, "wb") as fh:
            fh.write(emit_report(report, "json"))
    fit = report.fit
    msg = [f"C = {_cfmt(C.value)} (tail bound {C.tail_bound:.3g}, {C.method})",
           f"max|R| = {report.max_abs_R:.6g}, monotonicity violations = {report.monotonicity_violations}"]
    if fit is not None:
        msg.append(f"decay fit: log|R| = {fit.slope:.6g} sqrt(log x) + {fit.intercept:.6g} ({fit.used} points)")
    if offset is not None:
        msg.append(f"offset estimate -1/2 prod 1/F_p(1) = {_cfmt(offset)}")
    print("\n".join(msg), file=sys.stderr)
    return EXIT_OK


def cmd_series(args):
    from .analysis import emit_report, series_report
    from .euler import c_constant

    spec = _spec(args)
    C = c_constant(spec, args.tol, allow_partial=True)
    rep = series_report(spec.describe(), spec, args.nmax, C)
    _write(args, emit_report(rep, args.format))
    print(
        f"sum alpha(n)/n^2 (n <= {rep.N}) = {_cfmt(rep.partial)}; 2C = {_cfmt(rep.target)}; "
        f"gap = {rep.gap:.3g}; ratio gap = {rep.ratio_gap if rep.ratio_gap is None else format(rep.ratio_gap, '.3g')}; "
        f"max |h| on squarefree n = {rep.h_max_squarefree:.6g} at n = {rep.h_argmax}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_dump(args):
    from .sieve import DEFAULT_MEMORY_CAP, build_spf, bulk_phi_ratio

    if args.xmax is None:
        raise argparse.ArgumentTypeError("dump needs --xmax")
    spec = _spec(args)
    cap = args.memory_cap or DEFAULT_MEMORY_CAP
    table = build_spf(max(args.xmax, 2), memory_cap=cap)
    vals = bulk_phi_ratio(spec, table)
    lines = ["n,ratio_re,ratio_im"]
    for n in range(1, args.xmax + 1):
        v = vals[n]
        lines.append(f"{n},{v.real:.17g},{v.imag:.17g}")
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_selftest(args):
    from .acceptance import format_results, run_all

    results = run_all(quick=args.quick, eigenvalue_file=args.eigenvalues, threads=args.threads)
    _write(args, format_results(results))
    return EXIT_OK if all(r.passed for r in results) else 1


COMMANDS = {
    "const": cmd_const,
    "phi": cmd_phi,
    "scan": cmd_scan,
    "series": cmd_series,
    "dump": cmd_dump,
    "selftest": cmd_selftest,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # numba reads its thread ceiling at import time
    if args.threads:
        cur = int(os.environ.get("NUMBA_NUM_THREADS", "0") or 0)
        if args.threads > max(cur, os.cpu_count() or 1):
            os.environ["NUMBA_NUM_THREADS"] = str(args.threads)
    try:
        _resolve(args)
        return COMMANDS[args.command](args)
    except AssocTotientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
