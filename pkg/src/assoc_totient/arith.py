"""Small integer helpers: trial-division factorization, prime lists, Möbius."""

from math import gcd, isqrt

import numpy as np

__all__ = [
    "factorize",
    "is_prime",
    "primes_up_to",
    "mobius",
    "radical",
    "divisors",
    "lcm",
    "euler_phi_int",
]


def factorize(n):
    """Return the prime factorization of ``n`` as a list of ``(p, k)`` pairs."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    if n % 2 == 0:
        k = 0
        while n % 2 == 0:
            n //= 2
            k += 1
        out.append((2, k))
    p = 3
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 2
    if n > 1:
        out.append((n, 1))
    return out


def factorize_spf(n, spf):
    """Factor ``n`` by walking a smallest-prime-factor table."""
    out = []
    while n > 1:
        p = int(spf[n])
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        out.append((p, k))
    return out


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def primes_up_to(n):
    """All primes ``<= n`` as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=np.bool_)
    sieve[:2] = False
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def mobius(n):
    mu = 1
    for _, k in factorize(n):
        if k > 1:
            return 0
        mu = -mu
    return mu


def radical(n):
    r = 1
    for p, _ in factorize(n):
        r *= p
    return r


def divisors(n):
    divs = [1]
    for p, k in factorize(n):
        divs = [d * p**j for d in divs for j in range(k + 1)]
    return sorted(divs)


def lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def euler_phi_int(n):
    """Classical totient in exact integer arithmetic."""
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out
