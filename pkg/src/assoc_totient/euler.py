"""Polynomial Euler products and the associated Euler totient function.

Every built-in product is described by its local polynomial at p,

    F_p(s)^{-1} = 1 + e_1(p) p^{-s} + ... + e_d(p) p^{-ds},

with ``e = (-1,)`` for zeta, ``(-chi(p),)`` for a Dirichlet L-function and
``(-lambda(p) chi(p), chi(p)^2)`` for a twisted GL(2) form. All local
quantities are evaluated from these coefficients; the roots are never needed.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import polygamma

from .arith import divisors, factorize, factorize_spf, is_prime, primes_up_to
from .errors import DataGapError, DomainError, SpecParseError
from .sources import (
    DEFAULT_TAU_CAP,
    DEFAULT_TAU_N,
    DirichletCharacter,
    EigenvalueSource,
    char_eval,
    delta_source,
    is_primitive,
    load_eigenvalues,
    normalized_lambda,
    parse_character,
)

KINDS = {"zeta": 1, "dirichlet-L": 1, "gl2-twisted": 2}
KIND_CODES = {"zeta": 0, "dirichlet-L": 1, "gl2-twisted": 2}

_EPS = np.finfo(np.float64).eps


class LocalData(NamedTuple):
    p: int
    inv_local: complex
    gamma: complex


class ConstantResult(NamedTuple):
    value: complex
    cutoff: int
    tail_bound: float
    method: str = "euler-product"


@dataclass(frozen=True, eq=False)
class EulerProductSpec:
    kind: str
    degree: int
    character: DirichletCharacter | None = None
    eigenvalue_source: EigenvalueSource | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecParseError(f"unknown product kind {self.kind!r}")
        if self.degree != KINDS[self.kind]:
            raise SpecParseError(
                f"{self.kind} has Euler degree {KINDS[self.kind]}, got {self.degree}"
            )
        if self.kind == "dirichlet-L" and self.character is None:
            raise SpecParseError("dirichlet-L needs a character")
        if self.kind == "gl2-twisted":
            if self.eigenvalue_source is None:
                raise SpecParseError("gl2-twisted needs an eigenvalue source")
            if self.character is None:
                object.__setattr__(self, "character", DirichletCharacter(1))
            if not is_primitive(self.character):
                raise SpecParseError(
                    f"gl2 twist needs a primitive character; {self.character.spec_string()} is not"
                )

    @property
    def modulus(self):
        return self.character.modulus if self.character is not None else 1

    def chi(self, n):
        if self.character is None:
            return 1 + 0j
        return char_eval(self.character, n)

    def local_coefficients(self, p):
        """(e_1(p), ..., e_d(p)) of the inverse local factor."""
        if self.kind == "zeta":
            return (-1.0 + 0j,)
        c = self.chi(p)
        if self.kind == "dirichlet-L":
            return (-c,)
        lam = normalized_lambda(self.eigenvalue_source, p)
        return (-lam * c, c * c)

    def local(self, p):
        """Cached :class:`LocalData` for prime ``p``."""
        hit = self._cache.get(p)
        if hit is not None:
            return hit
        e = self.local_coefficients(p)
        inv = 1 + e[0] / p
        if len(e) > 1:
            inv = inv + e[1] / (p * p)
        gamma = -e[0]
        if len(e) > 1:
            gamma = gamma - e[1] / p
        ld = LocalData(p, complex(inv), complex(gamma))
        if abs(ld.gamma) > 2**self.degree and not self._violations_allowed():
            raise DomainError(f"|gamma({p})| = {abs(ld.gamma)} exceeds 2^{self.degree}")
        with self._lock:
            self._cache.setdefault(p, ld)
        return ld

    def _violations_allowed(self):
        src = self.eigenvalue_source
        return src is not None and src.allow_violations

    def coverage_bound(self):
        """Largest X such that every prime <= X can be evaluated (None: unbounded)."""
        if self.kind == "gl2-twisted":
            return self.eigenvalue_source.coverage_bound
        return None

    def check_coverage(self, limit):
        bound = self.coverage_bound()
        if bound is not None and limit > bound:
            first = next((p for p in range(bound + 1, limit + 1) if is_prime(p)), None)
            if first is not None:
                raise DataGapError(first, bound)

    def kernel_params(self, limit):
        """(kind code, chi value table mod q, dense lambda array) for the numba kernels."""
        self.check_coverage(limit)
        if self.character is None:
            chi_tab = np.ones(1, dtype=np.complex128)
        else:
            chi_tab = self.character.values()
        if self.kind == "gl2-twisted":
            lam = self.eigenvalue_source.lambda_array(limit)
        else:
            lam = np.zeros(1, dtype=np.float64)
        return KIND_CODES[self.kind], chi_tab, lam

    def describe(self):
        return format_product_spec(self)


def zeta_spec():
    return EulerProductSpec("zeta", 1)


def dirichlet_spec(chi):
    return EulerProductSpec("dirichlet-L", 1, character=chi)


def gl2_spec(source, chi=None):
    return EulerProductSpec("gl2-twisted", 2, character=chi, eigenvalue_source=source)


# ---------------------------------------------------------------------------
# product-spec strings


@lru_cache(maxsize=8)
def _cached_delta(n, cap):
    return delta_source(n, cap=cap)


def parse_product_spec(text, *, allow_violations=False, tau_n=DEFAULT_TAU_N, tau_cap=DEFAULT_TAU_CAP):
    """Parse ``zeta``, ``dirichlet:q=..,index=..`` or ``gl2:source=..[,chi=q=..,index=..]``."""
    text = text.strip()
    if text == "zeta":
        return zeta_spec()
    if text.startswith("dirichlet:"):
        return dirichlet_spec(parse_character(text[len("dirichlet:"):]))
    if text.startswith("gl2:"):
        body = text[len("gl2:"):]
        chi = None
        if ",chi=" in body:
            body, chi_text = body.rsplit(",chi=", 1)
            chi = parse_character(chi_text)
        if not body.startswith("source="):
            raise SpecParseError(f"gl2 spec needs source=delta or source=file:<path>, got {text!r}")
        src = body[len("source="):]
        if src == "delta":
            source = _cached_delta(tau_n, tau_cap)
        elif src.startswith("file:") and len(src) > 5:
            source = load_eigenvalues(src[5:], allow_violations=allow_violations)
        else:
            raise SpecParseError(f"unknown eigenvalue source {src!r}")
        return gl2_spec(source, chi)
    raise SpecParseError(f"unrecognised product spec {text!r}")


def format_product_spec(spec):
    if spec.kind == "zeta":
        return "zeta"
    if spec.kind == "dirichlet-L":
        return "dirichlet:" + spec.character.spec_string()
    out = "gl2:source=" + spec.eigenvalue_source.describe()
    if spec.character is not None and spec.character.modulus > 1:
        out += ",chi=" + spec.character.spec_string()
    return out


# ---------------------------------------------------------------------------
# local quantities


def _check_prime(p):
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")


def local_inverse_at_one(spec, p):
    """1/F_p(1) = prod_j (1 - alpha_j(p)/p)."""
    _check_prime(p)
    return spec.local(p).inv_local


def gamma_at(spec, p):
    """gamma(p) = p (1 - 1/F_p(1)), taken from the local coefficients so it is
    exact wherever they are (gamma = 1 for zeta)."""
    _check_prime(p)
    return spec.local(p).gamma


def _factor(n, spf):
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if spf is not None and n < len(spf):
        return factorize_spf(n, spf)
    return factorize(n) if n > 1 else []


def alpha(spec, n, spf=None):
    out = 1 + 0j
    for p, k in _factor(n, spf):
        if k > 1:
            return 0j
        out *= -spec.local(p).gamma
    return out


def phi(spec, n, spf=None):
    """phi(n, F) = n prod_{p | n} 1/F_p(1)."""
    out = complex(n)
    for p, _ in _factor(n, spf):
        out *= spec.local(p).inv_local
    return out


def phi_via_divisors(spec, n):
    """n * sum_{m | n} alpha(m)/m, evaluated term by term."""
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    total = 0j
    for m in divisors(n):
        total += alpha(spec, m) / m
    return n * total


def coeff_prime_power(spec, p, k):
    """a_F(p^k) via a(p^k) = -sum_j e_j(p) a(p^{k-j})."""
    if k < 0:
        raise DomainError(f"exponent must be nonnegative, got {k}")
    _check_prime(p)
    e = spec.local_coefficients(p)
    a = [1 + 0j]
    for i in range(1, k + 1):
        s = 0j
        for j in range(1, min(i, len(e)) + 1):
            s -= e[j - 1] * a[i - j]
        a.append(s)
    return a[k]


def coeff(spec, n, spf=None):
    out = 1 + 0j
    for p, k in _factor(n, spf):
        out *= coeff_prime_power(spec, p, k)
    return out


# ---------------------------------------------------------------------------
# C(F)


def euler_product_constant(spec, P):
    """(1/2) prod_{p <= P} (1 - gamma(p)/p^2), plain truncation."""
    spec.check_coverage(P)
    prod = 1 + 0j
    for p in primes_up_to(P):
        p = int(p)
        prod *= 1 - spec.local(p).gamma / (p * p)
    return 0.5 * prod


def truncation_bound(degree, P):
    """Rigorous relative bound on the discarded tail prod_{p > P}.

    |gamma(p)| <= 2^d and sum_{p > P} p^{-2} < 1/P give sum |z_p| <= 2^d/P,
    and |prod(1 + z_p) - 1| <= exp(sum |z_p|) - 1 <= 2 sum |z_p| for sum <= 1.
    """
    return 2.0 ** (degree + 1) / P


def _dirichlet_l2(chi):
    """L(2, chi) = q^{-2} sum_{a=1}^{q} chi(a) zeta(2, a/q), zeta(2, x) = trigamma(x).

    Returns the value and the condition number sum |terms| / |sum|.
    """
    q = 1 if chi is None else chi.modulus
    a = np.arange(1, q + 1)
    tri = polygamma(1, a / q)
    chis = np.ones(q, dtype=np.complex128) if chi is None else np.array(
        [char_eval(chi, int(x)) for x in a], dtype=np.complex128
    )
    terms = chis * tri
    total = math.fsum(terms.real) + 1j * math.fsum(terms.imag)
    cond = float(np.sum(np.abs(terms)) / abs(total))
    return total / (q * q), cond


def c_constant(spec, tol, *, allow_partial=False):
    """C(F) = (1/2) prod_p (1 - gamma(p)/p^2) with a recorded error bound.

    Degree-one products have gamma(p) = chi(p), so the product is exactly
    1/(2 L(2, chi)); that value is taken from the Hurwitz decomposition and
    the bound records floating-point error only. Otherwise the cutoff doubles
    from 2^{d+4} until the truncation bound drops to ``tol``. With
    ``allow_partial`` the cutoff is clipped to the eigenvalue coverage instead
    of raising, and the returned bound is the one actually achieved.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if spec.degree == 1:
        chi = spec.character if spec.kind == "dirichlet-L" else None
        l2, cond = _dirichlet_l2(chi)
        q = 1 if chi is None else chi.modulus
        bound = float(4 * (q + 2) * cond * _EPS)
        return ConstantResult(complex(0.5 / l2), 0, bound, "closed-form")
    P = 2 ** (spec.degree + 4)
    while truncation_bound(spec.degree, P) > tol:
        P *= 2
    cover = spec.coverage_bound()
    if cover is not None and P > cover:
        if not allow_partial:
            spec.check_coverage(P)
        P = cover
    value = euler_product_constant(spec, P)
    return ConstantResult(complex(value), P, truncation_bound(spec.degree, P), "euler-product")
