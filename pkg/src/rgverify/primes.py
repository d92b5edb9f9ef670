"""Sieves, factorization and primality shared by the search modules."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from sympy import factorint as _factorint
from sympy import isprime as _isprime


def spf_sieve(limit: int) -> np.ndarray:
    """Smallest prime factor of every n <= limit (spf[0] = spf[1] = 0)."""
    if limit < 1:
        return np.zeros(max(limit + 1, 1), dtype=np.int64)
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            spf[p] = p
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest[rest >= 2]] = rest[rest >= 2]
    return spf


@lru_cache(maxsize=4)
def cached_spf(limit: int) -> np.ndarray:
    spf = spf_sieve(limit)
    spf.setflags(write=False)
    return spf


def factorize(n: int, spf: np.ndarray | None = None) -> dict[int, int]:
    """Prime factorization {p: e} of a positive integer."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    if spf is None or n >= len(spf):
        return {int(p): int(e) for p, e in _factorint(n).items()}
    out: dict[int, int] = {}
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out[p] = e
    return out


def is_prime(n: int) -> bool:
    # Deterministic below 2^64; BPSW above.
    return bool(_isprime(n))


def prime_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask of primality for lo <= n < hi (segmented sieve)."""
    lo = max(lo, 0)
    if hi <= lo:
        return np.zeros(0, dtype=bool)
    mask = np.ones(hi - lo, dtype=bool)
    for n in range(lo, min(2, hi)):
        mask[n - lo] = False
    root = math.isqrt(hi - 1)
    base = np.flatnonzero(spf_sieve(root) == np.arange(root + 1)) if root >= 2 else []
    for p in base:
        p = int(p)
        if p < 2:
            continue
        start = max(p * p, ((lo + p - 1) // p) * p)
        mask[start - lo :: p] = False
    return mask


def primes_in(lo: int, hi: int) -> np.ndarray:
    """Primes p with lo <= p < hi."""
    return np.flatnonzero(prime_mask(lo, hi)) + max(lo, 0)


def primitive_root_power(a: int) -> tuple[int, int]:
    """(k0, s0) with a = k0**s0 and k0 as small as possible."""
    if a < 2:
        raise ValueError("a must be >= 2")
    fac = factorize(a)
    s0 = 0
    for e in fac.values():
        s0 = math.gcd(s0, e)
    k0 = 1
    for p, e in fac.items():
        k0 *= p ** (e // s0)
    return k0, s0
