"""Bulk evaluation: SPF tables, dense phi(n,F)/n, and the checkpointed scan.

The scan streams n = 1..X in fixed-size segments. Inside a segment, terms are
accumulated in increasing n with error-free transformations; segment totals
are then folded into a double-double running sum in segment order. Segment
boundaries do not depend on the thread count or the checkpoint list, so the
output is bit-identical across both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import NamedTuple

import numba
import numpy as np

from . import _kernels as K
from .arith import primes_up_to
from .errors import DomainError, MemoryCapError
from .euler import phi

SEGMENT = 1 << 17
DEFAULT_MEMORY_CAP = 2 * 1024**3
CSV_HEADER = "x,S_re,S_im,S0_re,S0_im,E_re,E_im,E0_re,E0_im,smoothed_re,smoothed_im"


@dataclass(frozen=True)
class SpfTable:
    X: int
    spf: np.ndarray

    def __getitem__(self, n):
        return int(self.spf[n])


class SummationCheckpoint(NamedTuple):
    x: int
    S: complex
    S0: complex
    E: complex
    E0: complex
    smoothed: complex


def build_spf(X, memory_cap=DEFAULT_MEMORY_CAP):
    if X < 2:
        raise DomainError(f"SPF table needs X >= 2, got {X}")
    need = 4 * (X + 1)
    if need > memory_cap:
        raise MemoryCapError(need, memory_cap)
    return SpfTable(X, K.build_spf(X))


def _prime_arrays(spec, table):
    kind, chi_tab, lam = spec.kernel_params(table.X)
    return K.prime_tables(kind, table.spf, chi_tab, lam)


def bulk_phi_ratio(spec, table):
    """phi(n,F)/n for n = 0..X (index 0 unused, set to 0)."""
    inv, _, _, _ = _prime_arrays(spec, table)
    return K.phi_ratio_dense(table.spf, inv)


def bulk_alpha(spec, table):
    _, gam, _, _ = _prime_arrays(spec, table)
    return K.alpha_dense(table.spf, gam)


def bulk_coeff(spec, table):
    _, _, e1, e2 = _prime_arrays(spec, table)
    return K.coeff_dense(table.spf, e1, e2)


def geometric_checkpoints(X):
    """round(10^{k/4}) for k = 4 .. 4 log10 X, deduplicated, capped at X."""
    if X < 10:
        return [X] if X >= 1 else []
    kmax = int(math.floor(4 * math.log10(X) + 1e-9))
    out = sorted({int(round(10 ** (k / 4))) for k in range(4, kmax + 1)})
    return [x for x in out if x <= X]


def set_threads(threads):
    """Clamp to what numba was launched with; returns the count in effect."""
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if threads is None else max(1, min(int(threads), limit))
    numba.set_num_threads(n)
    return n


def scan_memory_estimate(X, batch, modulus=1, gl2=False):
    per_seg = min(SEGMENT, X) * (16 + 8)
    est = batch * per_seg + 16 * modulus
    if gl2:
        est += 8 * (X + 1)
    return est


def _dd_fraction(hi, lo):
    return Fraction(float(hi)) + Fraction(float(lo))


def _finish(x, row, C):
    """Turn accumulator pairs into a checkpoint; E and E0 are formed in exact
    rational arithmetic from the double-double sums."""
    s_re = _dd_fraction(row[0], row[1])
    s_im = _dd_fraction(row[2], row[3])
    s0_re = _dd_fraction(row[4], row[5])
    s0_im = _dd_fraction(row[6], row[7])
    c_re = Fraction(C.real)
    c_im = Fraction(C.imag)
    x2 = x * x
    E = complex(float(s_re - c_re * x2), float(s_im - c_im * x2))
    E0 = complex(float(s0_re - 2 * c_re * x), float(s0_im - 2 * c_im * x))
    sm = complex(float(s0_re - s_re / x), float(s0_im - s_im / x))
    return SummationCheckpoint(
        x, complex(float(s_re), float(s_im)), complex(float(s0_re), float(s0_im)), E, E0, sm
    )


def scan(spec, X, checkpoints, C, *, threads=None, memory_cap=DEFAULT_MEMORY_CAP):
    """Single pass over n <= X emitting a SummationCheckpoint per checkpoint.

    ``C`` is a ConstantResult (or a bare complex) used for E = S - C x^2 and
    E0 = S0 - 2 C x.
    """
    X = int(X)
    if X < 1:
        raise DomainError(f"X must be positive, got {X}")
    cps = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise DomainError("checkpoints must be strictly increasing")
    if cps and (cps[0] < 1 or cps[-1] > X):
        bad = cps[-1] if cps[-1] > X else cps[0]
        raise DomainError(f"checkpoint {bad} outside 1..{X}")
    Cval = complex(getattr(C, "value", C))

    kind, chi_tab, lam = spec.kernel_params(X)
    nthreads = set_threads(threads)
    batch = max(8, 4 * nthreads)
    need = scan_memory_estimate(X, batch, len(chi_tab), kind == 2)
    if need > memory_cap:
        raise MemoryCapError(need, memory_cap)

    small = primes_up_to(isqrt(X) + 1)
    small_inv = K.inv_local_table(kind, small, chi_tab, lam)
    cps_arr = np.asarray(cps, dtype=np.int64)

    starts = list(range(1, X + 1, SEGMENT))
    glob = np.zeros(K.NCOL)
    rows = {}
    for b0 in range(0, len(starts), batch):
        seg_lo = np.asarray(starts[b0 : b0 + batch], dtype=np.int64)
        seg_hi = np.minimum(seg_lo + SEGMENT, X + 1)
        cp_start = np.searchsorted(cps_arr, seg_lo, side="left")
        cp_end = np.searchsorted(cps_arr, seg_hi, side="left")
        totals, cp_out = K.scan_batch(
            seg_lo, seg_hi, small, small_inv, kind, chi_tab, lam, cps_arr,
            cp_start.astype(np.int64), cp_end.astype(np.int64),
        )
        for s in range(len(seg_lo)):
            for j in range(cp_start[s], cp_end[s]):
                rows[cps[j]] = K.combine(glob, cp_out[j])
            glob = K.combine(glob, totals[s])
    return [_finish(x, rows[x], Cval) for x in cps]


def smoothed_sum_direct(spec, x):
    """sum_{n <= x} (1 - n/x) phi(n,F)/n, term by term through the single-n path."""
    if x < 1:
        raise DomainError(f"x must be positive, got {x}")
    spec.check_coverage(x)
    re, im = [], []
    for n in range(1, x + 1):
        t = phi(spec, n) / n * ((x - n) / x)
        re.append(t.real)
        im.append(t.imag)
    return complex(math.fsum(re), math.fsum(im))


def _fmt(v):
    return format(v, ".17g")


def checkpoints_csv(rows):
    lines = [CSV_HEADER]
    for r in rows:
        vals = [r.S, r.S0, r.E, r.E0, r.smoothed]
        parts = [str(r.x)]
        for v in vals:
            parts += [_fmt(v.real), _fmt(v.imag)]
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"
