"""numba kernels for the bulk paths. Pure functions of their array inputs.

Local factors are passed as (kind code, chi table mod q, dense lambda array):
kind 0 = zeta, 1 = Dirichlet L, 2 = twisted GL(2).
"""

import os

import numba as nb
import numpy as np
from numba import prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    nb.config.THREADING_LAYER = "workqueue"

# per-accumulator column layout of the (hi, lo) output rows
S_RE, S_IM, S0_RE, S0_IM = 0, 2, 4, 6
NCOL = 8


@nb.njit(cache=True, inline="always")
def local_coeffs(kind, p, chi_tab, lam):
    if kind == 0:
        return -1.0 + 0j, 0j
    c = chi_tab[p % chi_tab.shape[0]]
    if kind == 1:
        return -c, 0j
    return -lam[p] * c, c * c


@nb.njit(cache=True)
def inv_local(kind, p, chi_tab, lam):
    e1, e2 = local_coeffs(kind, p, chi_tab, lam)
    v = 1 + e1 / p
    if kind == 2:
        v = v + e2 / (p * p)
    return v


@nb.njit(cache=True)
def gamma(kind, p, chi_tab, lam):
    e1, e2 = local_coeffs(kind, p, chi_tab, lam)
    g = -e1
    if kind == 2:
        g = g - e2 / p
    return g


@nb.njit(cache=True)
def inv_local_table(kind, primes, chi_tab, lam):
    out = np.empty(primes.shape[0], dtype=np.complex128)
    for i in range(primes.shape[0]):
        out[i] = inv_local(kind, primes[i], chi_tab, lam)
    return out


@nb.njit(cache=True)
def build_spf(X):
    spf = np.zeros(X + 1, dtype=np.int32)
    i = 2
    while i * i <= X:
        if spf[i] == 0:
            for j in range(i * i, X + 1, i):
                if spf[j] == 0:
                    spf[j] = i
        i += 1
    for n in range(2, X + 1):
        if spf[n] == 0:
            spf[n] = n
    return spf


# ---------------------------------------------------------------------------
# compensated accumulation


@nb.njit(cache=True, inline="always")
def two_sum(a, b):
    s = a + b
    z = s - a
    e = (a - (s - z)) + (b - z)
    return s, e


@nb.njit(cache=True, inline="always")
def fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@nb.njit(cache=True)
def dd_add(hi, lo, h2, l2):
    """(hi, lo) + (h2, l2) in double-double arithmetic."""
    s, e = two_sum(hi, h2)
    e += lo + l2
    return fast_two_sum(s, e)


@nb.njit(cache=True)
def scan_segment(lo, hi, small_primes, small_inv, kind, chi_tab, lam, cps, cp_out, totals):
    """Accumulate phi(n)/n and phi(n) for lo <= n < hi.

    ``totals`` receives the segment sums as (hi, lo) pairs; ``cp_out`` receives
    the in-segment partial sums at each checkpoint in ``cps``.
    """
    m = hi - lo
    ratio = np.ones(m, dtype=np.complex128)
    acc = np.ones(m, dtype=np.int64)
    for i in range(small_primes.shape[0]):
        p = small_primes[i]
        if p * p >= hi:
            break
        inv = small_inv[i]
        start = ((lo + p - 1) // p) * p - lo
        for k in range(start, m, p):
            ratio[k] *= inv
            acc[k] *= p
        pk = p * p
        while pk < hi:
            start = ((lo + pk - 1) // pk) * pk - lo
            for k in range(start, m, pk):
                acc[k] *= p
            pk *= p
    acc_hi = np.zeros(4)
    acc_lo = np.zeros(4)
    j = 0
    ncp = cps.shape[0]
    for k in range(m):
        n = lo + k
        r = ratio[k]
        a = acc[k]
        if a < n:
            r = r * inv_local(kind, n // a, chi_tab, lam)
        v = n * r
        vals = (v.real, v.imag, r.real, r.imag)
        for c in range(4):
            s, e = two_sum(acc_hi[c], vals[c])
            acc_hi[c] = s
            acc_lo[c] += e
        while j < ncp and cps[j] == n:
            for c in range(4):
                cp_out[j, 2 * c] = acc_hi[c]
                cp_out[j, 2 * c + 1] = acc_lo[c]
            j += 1
    for c in range(4):
        totals[2 * c] = acc_hi[c]
        totals[2 * c + 1] = acc_lo[c]


@nb.njit(cache=True, parallel=True)
def scan_batch(seg_lo, seg_hi, small_primes, small_inv, kind, chi_tab, lam, cps, cp_start, cp_end):
    """Run independent segments; each segment's result is independent of scheduling."""
    nseg = seg_lo.shape[0]
    totals = np.zeros((nseg, NCOL))
    cp_out = np.zeros((cps.shape[0], NCOL))
    for s in prange(nseg):
        a = cp_start[s]
        b = cp_end[s]
        scan_segment(
            seg_lo[s], seg_hi[s], small_primes, small_inv, kind, chi_tab, lam,
            cps[a:b], cp_out[a:b], totals[s],
        )
    return totals, cp_out


@nb.njit(cache=True)
def combine(glob, part):
    """Double-double add of two accumulator rows (4 pairs)."""
    out = np.empty(NCOL)
    for c in range(4):
        h, l = dd_add(glob[2 * c], glob[2 * c + 1], part[2 * c], part[2 * c + 1])
        out[2 * c] = h
        out[2 * c + 1] = l
    return out


# ---------------------------------------------------------------------------
# dense per-n tables over an SPF table


@nb.njit(cache=True)
def prime_tables(kind, spf, chi_tab, lam):
    """Dense inv_local, gamma, e1, e2 indexed by prime (zero elsewhere)."""
    X = spf.shape[0] - 1
    inv = np.zeros(X + 1, dtype=np.complex128)
    gam = np.zeros(X + 1, dtype=np.complex128)
    e1 = np.zeros(X + 1, dtype=np.complex128)
    e2 = np.zeros(X + 1, dtype=np.complex128)
    for p in range(2, X + 1):
        if spf[p] == p:
            inv[p] = inv_local(kind, p, chi_tab, lam)
            gam[p] = gamma(kind, p, chi_tab, lam)
            a, b = local_coeffs(kind, p, chi_tab, lam)
            e1[p] = a
            e2[p] = b
    return inv, gam, e1, e2


@nb.njit(cache=True)
def phi_ratio_dense(spf, inv):
    X = spf.shape[0] - 1
    out = np.ones(X + 1, dtype=np.complex128)
    out[0] = 0
    for n in range(2, X + 1):
        m = n
        r = 1.0 + 0j
        while m > 1:
            p = spf[m]
            r *= inv[p]
            while m % p == 0:
                m //= p
        out[n] = r
    return out


@nb.njit(cache=True)
def alpha_dense(spf, gam):
    X = spf.shape[0] - 1
    out = np.zeros(X + 1, dtype=np.complex128)
    if X >= 1:
        out[1] = 1
    for n in range(2, X + 1):
        m = n
        r = 1.0 + 0j
        while m > 1:
            p = spf[m]
            m //= p
            if m % p == 0:
                r = 0j
                break
            r *= -gam[p]
        out[n] = r
    return out


@nb.njit(cache=True)
def coeff_dense(spf, e1, e2):
    """a_F(n) for n <= X from the local recurrences and multiplicativity."""
    X = spf.shape[0] - 1
    out = np.zeros(X + 1, dtype=np.complex128)
    if X >= 1:
        out[1] = 1
    for n in range(2, X + 1):
        p = spf[n]
        m = n
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            out[n] = out[n // m] * out[m]
        else:
            # n = p^k: a(p^k) = -e1 a(p^{k-1}) - e2 a(p^{k-2})
            prev = out[n // p]
            prev2 = out[n // (p * p)] if k >= 2 else 0j
            out[n] = -e1[p] * prev - e2[p] * prev2
    return out


@nb.njit(cache=True)
def dirichlet_convolve(f, g):
    """(f * g)(n) = sum_{d | n} f(d) g(n/d), outer loop over d in increasing order."""
    N = f.shape[0] - 1
    out = np.zeros(N + 1, dtype=np.complex128)
    for d in range(1, N + 1):
        fd = f[d]
        if fd == 0:
            continue
        for m in range(1, N // d + 1):
            out[d * m] += fd * g[m]
    return out


@nb.njit(cache=True)
def weighted_sum_dd(vals, power):
    """Compensated sum of vals[n] / n^power for n >= 1, returned as (re, im)."""
    hr = 0.0
    lr = 0.0
    hi_ = 0.0
    li = 0.0
    for n in range(1, vals.shape[0]):
        w = vals[n] / float(n) ** power
        s, e = two_sum(hr, w.real)
        hr = s
        lr += e
        s, e = two_sum(hi_, w.imag)
        hi_ = s
        li += e
    return hr + lr, hi_ + li
