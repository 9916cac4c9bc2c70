"""Acceptance criteria, runnable from pytest and from ``assoc-totient selftest``.

Each criterion returns a :class:`Result`; tolerances and time budgets are
fixed here. Kernels are compiled once by :func:`warm_up` before any timed
section so runtimes measure computation, not JIT compilation.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile
import time
from typing import NamedTuple

import numpy as np

from .analysis import (
    alpha_series_partial,
    build_residual_report,
    decay_fit,
    decay_trend,
    h_boundedness_report,
    h_values,
    residual_series,
)
from .arith import primes_up_to
from .errors import AssocTotientError
from .euler import (
    alpha,
    c_constant,
    dirichlet_spec,
    gl2_spec,
    parse_product_spec,
    phi,
    phi_via_divisors,
    zeta_spec,
)
from .sieve import DEFAULT_MEMORY_CAP, build_spf, geometric_checkpoints, scan
from .sources import DirichletCharacter, load_eigenvalues, tau_qexpansion

DELTA_CHI5 = "gl2:source=delta,chi=q=5,index=1"
MEMORY_CAP = DEFAULT_MEMORY_CAP


class Result(NamedTuple):
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


def warm_up():
    z = zeta_spec()
    C = c_constant(z, 1e-12)
    scan(z, 300, [10, 300], C)
    alpha_series_partial(z, 50, C)
    h_values(z, 50)
    s = parse_product_spec(DELTA_CHI5)
    scan(s, 300, [300], c_constant(s, 1e-3, allow_partial=True))


# ---------------------------------------------------------------------------
# independent oracles


def totient_sieve(N):
    """Classical phi(n), exact int64, by the standard totient sieve."""
    ph = np.arange(N + 1, dtype=np.int64)
    for p in primes_up_to(N):
        ph[p::p] -= ph[p::p] // p
    return ph


def mobius_sieve(N):
    mu = np.ones(N + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_up_to(N):
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def l2_chi4_alternating(terms=200_000):
    """sum_{k>=0} (-1)^k/(2k+1)^2 (Catalan's constant) with endpoint averaging."""
    vals = [(-1) ** k / (2 * k + 1) ** 2 for k in range(terms)]
    s = math.fsum(vals)
    return s + 0.5 * (-1) ** terms / (2 * terms + 1) ** 2


def tau_direct(n_terms):
    """tau(1..n_terms) by literally multiplying out q * prod_{n<=n_terms} (1 - q^n)^24."""
    poly = [1] + [0] * (n_terms - 1)  # coefficients of q^0..q^{n_terms-1}
    for n in range(1, n_terms):
        for _ in range(24):
            for i in range(n_terms - 1, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly  # tau(m) = coefficient of q^{m-1}


# ---------------------------------------------------------------------------
# criteria


def c1_constant_zeta():
    res, dt = _timed(c_constant, zeta_spec(), 1e-12)
    exact = 3 / math.pi**2
    rel = abs(res.value - exact) / exact
    ok = rel <= 1e-11 and dt < 1.0
    return Result(1, "C(zeta) = 3/pi^2", ok, f"rel err {rel:.2e} (<= 1e-11), {dt:.3f}s (< 1s)", dt)


def c2_constant_dirichlet():
    chi = DirichletCharacter(4, (1,))
    res, dt = _timed(c_constant, dirichlet_spec(chi), 1e-12)
    oracle = 1 / (2 * l2_chi4_alternating())
    err = abs(res.value - oracle)
    ok = err <= 1e-9 and dt < 1.0
    return Result(2, "C(L(chi_4)) = 1/(2 L(2,chi))", ok, f"abs err {err:.2e} (<= 1e-9), {dt:.3f}s (< 1s)", dt)


def c3_classical_reduction(N=100_000):
    t0 = time.perf_counter()
    z = zeta_spec()
    spf = build_spf(N).spf
    ph = totient_sieve(N)
    mu = mobius_sieve(N)
    bad_phi = bad_mu = 0
    for n in range(1, N + 1):
        v = phi(z, n, spf=spf)
        if v.imag != 0 or round(v.real) != ph[n]:
            bad_phi += 1
        a = alpha(z, n, spf=spf)
        if a != mu[n]:
            bad_mu += 1
    dt = time.perf_counter() - t0
    ok = bad_phi == 0 and bad_mu == 0 and dt < 5.0
    return Result(3, "phi(n,zeta) = phi(n), alpha(n,zeta) = mu(n), n <= 1e5", ok,
                  f"{bad_phi} phi mismatches, {bad_mu} mu mismatches, {dt:.2f}s (< 5s)", dt)


def c4_two_path(N=10_000):
    t0 = time.perf_counter()
    specs = {
        "zeta": zeta_spec(),
        "dirichlet:q=4,index=1": dirichlet_spec(DirichletCharacter(4, (1,))),
        DELTA_CHI5: parse_product_spec(DELTA_CHI5),
    }
    worst = {}
    for name, s in specs.items():
        w = 0.0
        for n in range(1, N + 1):
            w = max(w, abs(phi(s, n) - phi_via_divisors(s, n)) / n)
        worst[name] = w
    dt = time.perf_counter() - t0
    ok = all(w <= 1e-9 for w in worst.values()) and dt < 30.0
    det = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    return Result(4, "product path = divisor-sum path, n <= 1e4", ok,
                  f"max |diff|/n {det} (<= 1e-9), {dt:.2f}s (< 30s)", dt)


def c5_series_identity():
    t0 = time.perf_counter()
    z = zeta_spec()
    part, _, _ = alpha_series_partial(z, 10**6, c_constant(z, 1e-12))
    gap_z = abs(part - 6 / math.pi**2)
    s = parse_product_spec(DELTA_CHI5)
    C = c_constant(s, 1e-12, allow_partial=True)
    g3 = alpha_series_partial(s, 10**3, C)[2]
    g4 = alpha_series_partial(s, 10**4, C)[2]
    dt = time.perf_counter() - t0
    ok = gap_z < 2e-6 and g4 < g3 and dt < 10.0
    return Result(5, "sum alpha(n)/n^2 = 2 C(F)", ok,
                  f"zeta gap {gap_z:.2e} (< 2e-6); Delta x chi gaps {g3:.2e} -> {g4:.2e}; {dt:.2f}s (< 10s)", dt)


def c6_h_function(N=10_000):
    t0 = time.perf_counter()
    hz = h_values(zeta_spec(), N)
    ok_z = hz[1] == 1 and np.all(hz[2:] == 0)
    hs = h_values(parse_product_spec(DELTA_CHI5), N)
    hmax, arg = h_boundedness_report(hs, N)
    dt = time.perf_counter() - t0
    ok = bool(ok_z) and math.isfinite(hmax)
    return Result(6, "h = delta_1 for zeta; h bounded on squarefree n", ok,
                  f"zeta exact: {bool(ok_z)}; Delta x chi max|h| = {hmax:.6g} at n = {arg}", dt)


def _identity_worst(rows, C):
    Cv = complex(getattr(C, "value", C))
    worst = 0.0
    for r in rows:
        rhs = Cv * r.x + r.E0 - r.E / r.x
        worst = max(worst, abs(r.smoothed - rhs) / (1 + abs(r.smoothed)))
    return worst


class _ScanCache:
    def __init__(self):
        self.runs = {}

    def get(self, text, X):
        key = (text, X)
        if key not in self.runs:
            spec = parse_product_spec(text)
            C = c_constant(spec, 1e-12, allow_partial=True)
            rows, dt = _timed(scan, spec, X, geometric_checkpoints(X), C)
            self.runs[key] = (spec, C, rows, dt)
        return self.runs[key]


def c7_smoothed_identity(cache):
    worst = 0.0
    count = 0
    t0 = time.perf_counter()
    for text, X in [("zeta", 10**7), ("dirichlet:q=4,index=1", 10**6),
                    ("dirichlet:q=7,index=2", 10**5), (DELTA_CHI5, 10**4)]:
        _, C, rows, _ = cache.get(text, X)
        worst = max(worst, _identity_worst(rows, C))
        count += len(rows)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9
    return Result(7, "smoothed = C x + E0 - E/x at every checkpoint", ok,
                  f"max relative defect {worst:.2e} over {count} checkpoints (<= 1e-9)", dt)


def c8_zeta_trend(cache):
    _, C, rows, dt = cache.get("zeta", 10**7)
    series = residual_series(rows)
    fit = decay_fit(series)
    xmax_R, ups = decay_trend(series, xmin=1000)
    ok = fit.slope < 0 and ups <= 2 and dt < 120.0
    return Result(8, "zeta residual decays (X = 1e7)", ok,
                  f"slope {fit.slope:.4g} (< 0); max|R| over x >= 1e3 at x = {xmax_R} after {ups} "
                  f"increase(s) (<= 2); scan {dt:.2f}s (< 120s)", dt)


def _gl2_trend(spec, C, X):
    rows, dt = _timed(scan, spec, X, geometric_checkpoints(X), C)
    rep = build_residual_report("", rows, C)
    return rep, dt


def c9_gl2_trend(cache, eigenvalue_file=None):
    _, C, rows, dt = cache.get(DELTA_CHI5, 10**4)
    fit = decay_fit(residual_series(rows))
    ok = fit.slope < 0 and dt < 30.0
    detail = f"Delta x chi mod 5: slope {fit.slope:.4g} (< 0); {dt:.2f}s (< 30s)"
    if eigenvalue_file is not None:
        try:
            src = load_eigenvalues(eigenvalue_file)
            spec = gl2_spec(src, DirichletCharacter(5, (1,)))
            X = min(10**4, src.coverage_bound)
            Cf = c_constant(spec, 1e-12, allow_partial=True)
            rep, dtf = _gl2_trend(spec, Cf, X)
            ok_f = rep.fit is not None and rep.fit.slope < 0
            slope = "n/a" if rep.fit is None else f"{rep.fit.slope:.4g}"
            detail += f"; {eigenvalue_file}: X = {X}, slope {slope}"
            ok = ok and ok_f
        except (AssocTotientError, OSError) as exc:
            ok = False
            detail += f"; eigenvalue file {eigenvalue_file} failed: {exc}"
    return Result(9, "twisted residual trend (X = 1e4)", ok, detail, dt)


def c10_tau_oracle():
    t0 = time.perf_counter()
    oracle = tau_direct(20)
    ts = tau_qexpansion(10_000)
    agree = all(ts[n] == oracle[n] for n in range(1, 21))
    spot = ts[2] == -24 and ts[3] == 252 and ts[5] == 4830 and ts[6] == ts[2] * ts[3]
    deligne = all(ts[int(p)] ** 2 <= 4 * int(p) ** 11 for p in primes_up_to(10_000))
    dt = time.perf_counter() - t0
    ok = agree and spot and deligne
    return Result(10, "tau from the q-expansion", ok,
                  f"direct oracle n <= 20: {agree}; tau(2,3,5,6) values: {spot}; Deligne p <= 1e4: {deligne}", dt)


def _cli(args, threads=None, out=None):
    cmd = [sys.executable, "-m", "assoc_totient"]
    if threads is not None:
        cmd += ["--threads", str(threads)]
    cmd += args
    if out is not None:
        cmd += ["--out", out]
    env = dict(os.environ)
    env.pop("NUMBA_NUM_THREADS", None)
    proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, env=env)
    _, status, usage = os.wait4(proc.pid, 0)
    proc.returncode = os.waitstatus_to_exitcode(status)
    err = proc.stderr.read().decode(errors="replace")
    proc.stderr.close()
    return proc.returncode, usage, err


def c11_determinism():
    t0 = time.perf_counter()
    outs = {}
    with tempfile.TemporaryDirectory() as tmp:
        for t in (1, 4, 8):
            path = os.path.join(tmp, f"scan_{t}.csv")
            code, _, err = _cli(["scan", "zeta", "--xmax", "1e6"], threads=t, out=path)
            if code != 0:
                return Result(11, "byte-identical CSV at 1/4/8 threads", False,
                              f"threads={t} exited {code}: {err.strip()[-200:]}", time.perf_counter() - t0)
            with open(path, "rb") as fh:
                outs[t] = fh.read()
    same = outs[1] == outs[4] == outs[8]
    dt = time.perf_counter() - t0
    return Result(11, "byte-identical CSV at 1/4/8 threads", same,
                  f"{len(outs[1])} bytes each; identical: {same}", dt)


def c12_performance():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "scan_1e8.csv")
        t0 = time.perf_counter()
        code, usage, err = _cli(["scan", "zeta", "--xmax", "1e8"], out=path)
        dt = time.perf_counter() - t0
    rss = usage.ru_maxrss * 1024  # kilobytes on Linux
    ok = code == 0 and dt < 120.0 and rss <= MEMORY_CAP
    return Result(12, "scan zeta to 1e8", ok,
                  f"exit {code}; {dt:.1f}s (< 120s, {os.cpu_count()} core(s)); peak RSS "
                  f"{rss / 2**20:.0f} MiB (<= {MEMORY_CAP / 2**20:.0f} MiB cap)", dt)


def run_all(quick=False, eigenvalue_file=None, threads=None):
    from .sieve import set_threads

    set_threads(threads)
    warm_up()
    cache = _ScanCache()
    fns = [
        c1_constant_zeta,
        c2_constant_dirichlet,
        c3_classical_reduction,
        c4_two_path,
        c5_series_identity,
        c6_h_function,
        lambda: c7_smoothed_identity(cache),
        lambda: c8_zeta_trend(cache),
        lambda: c9_gl2_trend(cache, eigenvalue_file),
        c10_tau_oracle,
    ]
    if not quick:
        fns += [c11_determinism, c12_performance]
    out = []
    for fn in fns:
        try:
            out.append(fn())
        except Exception as exc:  # a crashing criterion is a failing criterion
            num = len(out) + 1
            out.append(Result(num, "error", False, f"{type(exc).__name__}: {exc}", 0.0))
    return out


def format_line(r):
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.title}: {r.detail}"


def format_results(results):
    lines = [format_line(r) for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
