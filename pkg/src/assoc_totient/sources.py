"""Arithmetic inputs: Dirichlet characters, Ramanujan tau, Hecke eigenvalue tables.

Characters are built from an explicit decomposition of (Z/qZ)^* into cyclic
components. The component order is fixed: the 2-part first (the ``-1``
component, then the ``5`` component when 8 | q), followed by the odd prime
powers in ascending order of modulus. A character is the exponent tuple
``index`` against that generator list, so ``chi(g_c) = exp(2 pi i index_c / order_c)``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from pathlib import Path
from typing import NamedTuple

import gmpy2
import numpy as np

from .arith import factorize, is_prime, lcm
from .errors import DataGapError, DomainError, EigenvalueFileError, SpecParseError

RAMANUJAN_SLACK = 1e-8
DEFAULT_TAU_N = 10_000
DEFAULT_TAU_CAP = 2**16


# ---------------------------------------------------------------------------
# unit group and characters


class UnitGroup(NamedTuple):
    component_moduli: tuple
    generators: tuple
    orders: tuple


def _primitive_root_prime_power(p, k):
    m = p**k
    phi = p ** (k - 1) * (p - 1)
    rs = [r for r, _ in factorize(phi)]
    g = 2
    while True:
        if gcd(g, p) == 1 and all(pow(g, phi // r, m) != 1 for r in rs):
            return g
        g += 1


def _crt_lift(residue, modulus, q):
    """Unit mod q congruent to ``residue`` mod ``modulus`` and to 1 mod q/modulus."""
    rest = q // modulus
    if rest == 1:
        return residue % q
    # x = residue + modulus * t with x = 1 (mod rest)
    t = ((1 - residue) * pow(modulus, -1, rest)) % rest
    return (residue + modulus * t) % q


def _components(q):
    # (kind, prime, exponent, local modulus, local generator, order)
    comps = []
    fac = factorize(q) if q > 1 else []
    odd = []
    for p, k in fac:
        if p == 2:
            if k == 2:
                comps.append(("minus1", 2, k, 4, 3, 2))
            elif k >= 3:
                comps.append(("minus1", 2, k, 4, 2**k - 1, 2))
                comps.append(("five", 2, k, 2**k, 5, 2 ** (k - 2)))
        else:
            m = p**k
            odd.append(("odd", p, k, m, _primitive_root_prime_power(p, k), m // p * (p - 1)))
    odd.sort(key=lambda c: c[3])
    return comps + odd


def unit_group_structure(q):
    """Cyclic decomposition of (Z/qZ)^*.

    Returns the component moduli, one generator per component (lifted to a
    unit mod q that is 1 on every other component) and the generator orders.
    ``q`` in {1, 2} gives the empty structure.
    """
    if q < 1:
        raise DomainError(f"modulus must be positive, got {q}")
    comps = _components(q)
    moduli, gens, orders = [], [], []
    for kind, p, k, m, g, order in comps:
        two_k = 2**k
        if kind == "odd":
            gens.append(_crt_lift(g, m, q))
        else:
            gens.append(_crt_lift(g % two_k, two_k, q))
        moduli.append(m)
        orders.append(order)
    return UnitGroup(tuple(moduli), tuple(gens), tuple(orders))


def _root_of_unity(k, n):
    """exp(2 pi i k/n), exact on the quarter turns."""
    k %= n
    frac = Fraction(k, n)
    if frac == 0:
        return 1 + 0j
    if frac == Fraction(1, 2):
        return -1 + 0j
    if frac == Fraction(1, 4):
        return 1j
    if frac == Fraction(3, 4):
        return -1j
    return cmath.exp(2j * math.pi * k / n)


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    index: tuple = ()
    _comps: tuple = field(init=False, repr=False, compare=False)
    _tables: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = self.modulus
        if q < 1:
            raise DomainError(f"character modulus must be positive, got {q}")
        comps = _components(q)
        index = tuple(int(e) for e in self.index)
        if not index and comps:
            index = (0,) * len(comps)
        if len(index) != len(comps):
            raise SpecParseError(
                f"character mod {q} needs {len(comps)} index entries, got {len(index)}"
            )
        index = tuple(e % c[5] for e, c in zip(index, comps))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "_comps", tuple(comps))
        tables = []
        for kind, p, k, m, g, order in comps:
            if kind == "minus1":
                tables.append(None)
                continue
            tab = {}
            x = 1
            for e in range(order):
                tab[x] = e
                x = x * g % m
            tables.append(tab)
        object.__setattr__(self, "_tables", tuple(tables))

    @property
    def structure(self):
        return unit_group_structure(self.modulus)

    @property
    def component_moduli(self):
        return self.structure.component_moduli

    @property
    def generators(self):
        return self.structure.generators

    @property
    def orders(self):
        return tuple(c[5] for c in self._comps)

    @property
    def order(self):
        """lcm of the component orders (the exponent of the unit group)."""
        return lcm(*self.orders) if self._comps else 1

    def dlog(self, n):
        """Discrete logs of ``n`` against each component generator."""
        out = []
        for (kind, p, k, m, g, order), tab in zip(self._comps, self._tables):
            if kind == "minus1":
                out.append(0 if n % 4 == 1 else 1)
            elif kind == "five":
                two_k = 2**k
                r = n % two_k
                if r % 4 == 3:
                    r = (-r) % two_k
                out.append(tab[r])
            else:
                out.append(tab[n % m])
        return tuple(out)

    def __call__(self, n):
        return char_eval(self, n)

    def is_principal(self):
        return all(e == 0 for e in self.index)

    def values(self):
        """chi(0), ..., chi(q-1) as a complex array."""
        return np.array([char_eval(self, a) for a in range(self.modulus)], dtype=np.complex128)

    def spec_string(self):
        return f"q={self.modulus},index={'.'.join(str(e) for e in self.index)}"


def char_eval(chi, n):
    q = chi.modulus
    if gcd(n, q) != 1:
        return 0j
    if not chi._comps:
        return 1 + 0j
    big = chi.order
    k = 0
    for e, d, c in zip(chi.index, chi.dlog(n % q), chi._comps):
        k += e * d * (big // c[5])
    return _root_of_unity(k, big)


def all_characters(q):
    comps = _components(q)
    for idx in product(*(range(c[5]) for c in comps)):
        yield DirichletCharacter(q, idx)


def _v(p, n):
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


def conductor(chi):
    """Smallest f | q such that chi is induced from a character mod f."""
    f = 1
    comps = chi._comps
    two_minus = two_five = None
    for e, c in zip(chi.index, comps):
        kind, p, k, m, g, order = c
        if kind == "minus1":
            two_minus = (e, k)
        elif kind == "five":
            two_five = (e, k)
        elif e:
            f *= p ** max(1, k - _v(p, e))
    if two_five is not None and two_five[0]:
        e, k = two_five
        f *= 2 ** (k - _v(2, e))
    elif two_minus is not None and two_minus[0]:
        f *= 4
    return f


def is_primitive(chi):
    return conductor(chi) == chi.modulus


_CHAR_RE = re.compile(r"^q=(\d+),index=([0-9.]*)$")


def parse_character(text):
    """Parse ``q=<Q>,index=<e1.e2...>``."""
    m = _CHAR_RE.match(text.strip())
    if not m:
        raise SpecParseError(f"bad character spec {text!r}; expected q=<Q>,index=<e1.e2...>")
    q = int(m.group(1))
    if q < 1:
        raise SpecParseError(f"character modulus must be positive in {text!r}")
    raw = m.group(2)
    if raw:
        parts = raw.split(".")
        if any(not s for s in parts):
            raise SpecParseError(f"bad index tuple in {text!r}")
        idx = tuple(int(s) for s in parts)
    else:
        idx = ()
    return DirichletCharacter(q, idx)


# ---------------------------------------------------------------------------
# Ramanujan tau


@dataclass(frozen=True)
class TauSeries:
    N: int
    tau: tuple  # tau[0] is a placeholder 0; tau[n] for 1 <= n <= N

    def __getitem__(self, n):
        if not 1 <= n <= self.N:
            raise IndexError(f"tau({n}) outside computed range 1..{self.N}")
        return self.tau[n]


def _pack(coeffs, nbytes):
    pos = b"".join(max(c, 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join(max(-c, 0).to_bytes(nbytes, "little") for c in coeffs)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def _square_truncated(coeffs, n):
    """First ``n`` coefficients of the square of an integer power series.

    Kronecker substitution: pack into one big integer at a slot width wide
    enough for every product coefficient, square, unpack signed digits.
    """
    amax = max(abs(c) for c in coeffs)
    bits = 2 * amax.bit_length() + len(coeffs).bit_length() + 2
    nbytes = (bits + 7) // 8
    b = 8 * nbytes
    w = _pack(coeffs, nbytes) ** 2
    total = 2 * len(coeffs) + 1
    w = int(w % (gmpy2.mpz(1) << (b * total)))
    raw = w.to_bytes(nbytes * total, "little")
    base = 1 << b
    half = base >> 1
    out = []
    borrow = 0
    for i in range(n):
        u = int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") + borrow
        if u >= half:
            out.append(u - base)
            borrow = 1
        else:
            out.append(u)
            borrow = 0
    return out


def tau_qexpansion(N, cap=DEFAULT_TAU_CAP):
    """tau(1..N) from q * prod (1 - q^n)^24, exactly.

    The cube of the Euler product is the sparse Jacobi series
    sum (-1)^k (2k+1) q^{k(k+1)/2}; three squarings give the 24th power.
    """
    if N < 1:
        raise DomainError(f"tau truncation must be positive, got {N}")
    if N > cap:
        raise DomainError(
            f"tau truncation N={N} exceeds the cap {cap}; three big-integer squarings "
            f"of an N-term series need roughly {N * 40} bytes of working memory. "
            "Raise the cap explicitly or supply eigenvalues from a table file."
        )
    p3 = [0] * N
    k = 0
    while k * (k + 1) // 2 < N:
        p3[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    s = p3
    for _ in range(3):
        s = _square_truncated(s, N)
    return TauSeries(N, (0, *s))


# ---------------------------------------------------------------------------
# eigenvalue sources


@dataclass(frozen=True, eq=False)
class EigenvalueSource:
    kind: str  # "delta-builtin" | "table"
    coverage_bound: int
    values: dict = field(default_factory=dict, repr=False)
    tau: TauSeries | None = field(default=None, repr=False)
    origin: str = ""
    violations: tuple = ()
    allow_violations: bool = False

    def covers(self, p):
        return p <= self.coverage_bound

    def describe(self):
        if self.kind == "delta-builtin":
            return "delta"
        return f"file:{self.origin}"

    def lambda_array(self, limit):
        """Dense float64 array ``a`` with ``a[p] = lambda(p)`` for primes ``p <= limit``."""
        if limit > self.coverage_bound:
            first = next((p for p in range(self.coverage_bound + 1, limit + 1) if is_prime(p)), None)
            if first is not None:
                raise DataGapError(first, self.coverage_bound)
        arr = np.zeros(limit + 1, dtype=np.float64)
        if self.kind == "delta-builtin":
            for p in range(2, limit + 1):
                if is_prime(p):
                    arr[p] = _delta_lambda(self.tau[p], p)
        else:
            for p, v in self.values.items():
                if p <= limit:
                    arr[p] = v
        return arr


def _delta_lambda(t, p):
    return t / (p**5 * math.sqrt(p))


def delta_source(N=DEFAULT_TAU_N, cap=DEFAULT_TAU_CAP):
    ts = tau_qexpansion(N, cap=cap)
    bound = max((p for p in range(2, N + 1) if is_prime(p)), default=1)
    return EigenvalueSource("delta-builtin", bound, tau=ts, origin="delta")


def table_source(values, origin="<memory>", allow_violations=False):
    values = {int(p): float(v) for p, v in values.items()}
    bad = tuple(sorted(p for p, v in values.items() if abs(v) > 2 + RAMANUJAN_SLACK))
    if bad and not allow_violations:
        listing = ", ".join(f"{p}: {values[p]!r}" for p in bad[:20])
        raise EigenvalueFileError(
            f"{len(bad)} entries violate |lambda(p)| <= 2: {listing}", path=origin
        )
    bound = 1
    p = 2
    while p in values:
        bound = p
        p += 1
        while not is_prime(p):
            p += 1
    return EigenvalueSource(
        "table", bound, values=values, origin=origin, violations=bad,
        allow_violations=allow_violations,
    )


def normalized_lambda(source, p):
    if p > source.coverage_bound:
        raise DataGapError(p, source.coverage_bound)
    if source.kind == "delta-builtin":
        return _delta_lambda(source.tau[p], p)
    try:
        return source.values[p]
    except KeyError:
        raise DataGapError(p, source.coverage_bound) from None


def load_eigenvalues(path, allow_violations=False):
    """Read a ``<prime>,<lambda>`` table (``#`` comments, LF or CRLF)."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise EigenvalueFileError(f"cannot read eigenvalue file: {exc.strerror}", path=path) from exc
    except UnicodeDecodeError as exc:
        raise EigenvalueFileError("file is not UTF-8 text", path=path) from exc
    values = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise EigenvalueFileError(f"expected '<prime>,<lambda>', got {line!r}", path, lineno)
        try:
            p = int(parts[0].strip())
            lam = float(parts[1].strip())
        except ValueError:
            raise EigenvalueFileError(f"unparseable record {line!r}", path, lineno) from None
        if not math.isfinite(lam):
            raise EigenvalueFileError(f"non-finite eigenvalue {parts[1]!r}", path, lineno)
        if not is_prime(p):
            raise EigenvalueFileError(f"{p} is not prime", path, lineno)
        if p in values:
            raise EigenvalueFileError(f"duplicate prime {p}", path, lineno)
        values[p] = lam
    return table_source(values, origin=str(path), allow_violations=allow_violations)


def gl2_local_roots(lambda_p, chi_p):
    """Roots of x^2 - lambda*chi*x + chi^2 (diagnostic only)."""
    s = lambda_p * chi_p
    prod = chi_p * chi_p
    if chi_p == 0:
        return 0j, 0j
    disc = cmath.sqrt(s * s - 4 * prod)
    r1 = (s + disc) / 2
    r2 = (s - disc) / 2
    # take the larger root directly and the other from the product
    if abs(r2) > abs(r1):
        r1, r2 = r2, r1
    r2 = prod / r1
    return complex(r1), complex(r2)
