"""Residual R(x) = E0(x) - E(x)/x, its decay fit, and the series identities.

All "evaluation at s = 2" here is truncated direct summation with the
truncation point carried in the report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .arith import primes_up_to
from .errors import DomainError
from .sieve import build_spf, bulk_alpha, bulk_coeff

R_FLOOR = 1e-14
SCHEMA_VERSION = 1


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    used: int
    excluded: int


@dataclass
class ResidualReport:
    spec: str
    checkpoints: list  # (x, R)
    fit: DecayFit | None
    max_abs_R: float
    monotonicity_violations: int
    C: complex = 0j
    C_tail_bound: float = 0.0
    R_uncertainty: list = field(default_factory=list)
    identity_gap: float = 0.0
    offset_estimate: complex | None = None


@dataclass
class SeriesReport:
    spec: str
    N: int
    partial: complex
    target: complex
    gap: float
    h_max_squarefree: float
    h_argmax: int
    h_table: list
    ratio_gap: float | None = None
    C_tail_bound: float = 0.0


class IdentityGaps(NamedTuple):
    ratio: complex
    ratio_gap: float
    alpha_gap: float


# ---------------------------------------------------------------------------
# residuals


def residual_series(checkpoints):
    return [(c.x, c.E0 - c.E / c.x) for c in checkpoints]


def decay_fit(series, floor=R_FLOOR):
    """Least squares of log|R| against sqrt(log x), skipping |R| <= floor."""
    pts = [(math.sqrt(math.log(x)), math.log(abs(r))) for x, r in series if abs(r) > floor]
    excluded = len(series) - len(pts)
    if len(pts) < 3:
        raise DomainError(f"decay fit needs >= 3 points with |R| > {floor}, have {len(pts)}")
    u = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    A = np.vstack([u, np.ones_like(u)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, v, rcond=None)
    return DecayFit(float(slope), float(intercept), len(pts), excluded)


def monotonicity_violations(series):
    """Number of consecutive checkpoints where |R| increases."""
    mags = [abs(r) for _, r in series]
    return sum(1 for a, b in zip(mags, mags[1:]) if b > a)


def decay_trend(series, xmin=1000):
    """(x at which max|R| is attained over x >= xmin, increases preceding it).

    The second value counts the consecutive |R| increases among the
    checkpoints from ``xmin`` up to the argmax; it is 0 exactly when the
    maximum sits at the smallest such checkpoint.
    """
    tail = [(x, abs(r)) for x, r in series if x >= xmin]
    if not tail:
        raise DomainError(f"no checkpoints at or above {xmin}")
    i = max(range(len(tail)), key=lambda j: (tail[j][1], -j))
    ups = sum(1 for j in range(i) if tail[j + 1][1] > tail[j][1])
    return tail[i][0], ups


def residual_offset_estimate(spec, P):
    """-1/2 prod_{p <= P} 1/F_p(1).

    The smoothed sum picks up a constant -1/2 * sum alpha(n)/n from the pole of
    1/s at s = 0 whenever sum alpha(n)/n = prod_p (1 - gamma(p)/p) does not
    vanish; this is a truncated estimate of that constant. For zeta the limit is zero,
    approached like 1/log P.
    """
    spec.check_coverage(P)
    prod = 1 + 0j
    for p in primes_up_to(P):
        prod *= spec.local(int(p)).inv_local
    return -0.5 * prod


def build_residual_report(spec_text, checkpoints, C, *, offset=None):
    series = residual_series(checkpoints)
    Cval = complex(getattr(C, "value", C))
    tail = float(getattr(C, "tail_bound", 0.0))
    try:
        fit = decay_fit(series)
    except DomainError:
        fit = None
    gap = 0.0
    for c, (_, r) in zip(checkpoints, series):
        gap = max(gap, abs(r - (c.smoothed - Cval * c.x)) / (1 + abs(c.smoothed)))
    return ResidualReport(
        spec=spec_text,
        checkpoints=series,
        fit=fit,
        max_abs_R=max((abs(r) for _, r in series), default=0.0),
        monotonicity_violations=monotonicity_violations(series),
        C=Cval,
        C_tail_bound=tail,
        R_uncertainty=[tail * abs(Cval) * x for x, _ in series],
        identity_gap=gap,
        offset_estimate=offset,
    )


# ---------------------------------------------------------------------------
# alpha series and h


def _table(N):
    return build_spf(max(N, 2))


def alpha_series_partial(spec, N, C):
    """(partial, target, gap) for sum_{n <= N} alpha(n)/n^2 against 2 C(F)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    spec.check_coverage(N)
    alpha = bulk_alpha(spec, _table(N))[: N + 1]
    re, im = K.weighted_sum_dd(alpha, 2.0)
    partial = complex(re, im)
    target = 2 * complex(getattr(C, "value", C))
    return partial, target, abs(partial - target)


def h_values(spec, N):
    """h(1..N) (index 0 unused) with h = alpha * a_F, by an explicit divisor loop."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    spec.check_coverage(N)
    table = _table(N)
    alpha = bulk_alpha(spec, table)[: N + 1]
    a = bulk_coeff(spec, table)[: N + 1]
    return K.dirichlet_convolve(alpha, a)


def h_boundedness_report(h, N):
    """(max |h(n)| over squarefree n <= N, argmax)."""
    N = min(N, len(h) - 1)
    spf = _table(N).spf
    best, arg = -1.0, 1
    for n in range(1, N + 1):
        m = n
        sqfree = True
        while m > 1:
            p = spf[m]
            m //= p
            if m % p == 0:
                sqfree = False
                break
        if sqfree and abs(h[n]) > best:
            best, arg = float(abs(h[n])), n
    return best, arg


def verify_constant_identity(spec, N, C):
    """Gaps of (sum h/n^2)/(sum a_F/n^2) and of sum alpha/n^2 from 2 C(F)."""
    h = h_values(spec, N)
    a = bulk_coeff(spec, _table(N))[: N + 1]
    hr, hi = K.weighted_sum_dd(h, 2.0)
    ar, ai = K.weighted_sum_dd(a, 2.0)
    denom = complex(ar, ai)
    if abs(denom) < 1e-6:
        raise DomainError(f"|sum a_F(n)/n^2| = {abs(denom)} for N={N}; truncation too short")
    ratio = complex(hr, hi) / denom
    target = 2 * complex(getattr(C, "value", C))
    _, _, agap = alpha_series_partial(spec, N, C)
    return IdentityGaps(ratio, abs(ratio - target), agap)


def series_report(spec_text, spec, N, C, table_len=100):
    partial, target, gap = alpha_series_partial(spec, N, C)
    h = h_values(spec, N)
    hmax, harg = h_boundedness_report(h, N)
    ratio_gap = None
    try:
        ratio_gap = verify_constant_identity(spec, N, C).ratio_gap
    except DomainError:
        pass
    return SeriesReport(
        spec=spec_text,
        N=N,
        partial=partial,
        target=target,
        gap=gap,
        h_max_squarefree=hmax,
        h_argmax=harg,
        h_table=[complex(v) for v in h[1 : min(N, table_len) + 1]],
        ratio_gap=ratio_gap,
        C_tail_bound=float(getattr(C, "tail_bound", 0.0)),
    )


# ---------------------------------------------------------------------------
# serialization


def _num(v):
    v = float(v)
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def _json(obj):
    """JSON with every float rendered to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return _json({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_json(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _fit_dict(fit):
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept, "used": fit.used, "excluded": fit.excluded}


def _plot_rows(report):
    if isinstance(report, ResidualReport):
        return [
            (math.sqrt(math.log(x)), math.log(abs(r)))
            for x, r in report.checkpoints
            if abs(r) > R_FLOOR
        ]
    return [(n, abs(h)) for n, h in enumerate(report.h_table, start=1)]


def emit_report(report, fmt="json"):
    if fmt == "csv":
        if isinstance(report, ResidualReport):
            lines = ["x,R_re,R_im,abs_R,R_uncertainty"]
            unc = report.R_uncertainty or [0.0] * len(report.checkpoints)
            for (x, r), u in zip(report.checkpoints, unc):
                lines.append(f"{x},{_num(r.real)},{_num(r.imag)},{_num(abs(r))},{_num(u)}")
        else:
            lines = ["n,h_re,h_im"]
            for n, h in enumerate(report.h_table, start=1):
                lines.append(f"{n},{_num(h.real)},{_num(h.imag)}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "plot-data":
        head = "# sqrt_log_x log_abs_R" if isinstance(report, ResidualReport) else "# n abs_h"
        lines = [head] + [f"{_num(a)} {_num(b)}" for a, b in _plot_rows(report)]
        return ("\n".join(lines) + "\n").encode()
    if fmt != "json":
        raise DomainError(f"unknown report format {fmt!r}")
    if isinstance(report, ResidualReport):
        unc = report.R_uncertainty or [0.0] * len(report.checkpoints)
        doc = {
            "schema": SCHEMA_VERSION,
            "type": "residual",
            "spec": report.spec,
            "C": report.C,
            "C_tail_bound": report.C_tail_bound,
            "checkpoints": [
                {"x": x, "R": r, "abs_R": abs(r), "R_uncertainty": u}
                for (x, r), u in zip(report.checkpoints, unc)
            ],
            "fit": _fit_dict(report.fit),
            "max_abs_R": report.max_abs_R,
            "monotonicity_violations": report.monotonicity_violations,
            "identity_gap": report.identity_gap,
            "offset_estimate": report.offset_estimate,
        }
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "type": "series",
            "spec": report.spec,
            "N": report.N,
            "partial": report.partial,
            "target": report.target,
            "gap": report.gap,
            "ratio_gap": report.ratio_gap,
            "C_tail_bound": report.C_tail_bound,
            "h_max_squarefree": report.h_max_squarefree,
            "h_argmax": report.h_argmax,
            "h_table": report.h_table,
        }
    return (_json(doc) + "\n").encode()
