"""Exact arithmetic on repunits (x^m - 1)/(x - 1) in arbitrary bases."""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from . import BudgetExceeded
from .primes import is_prime

DEFAULT_BUDGET = 10**8


def repunit_value(base: int, length: int) -> int:
    """1 + base + ... + base**(length - 1), exactly."""
    if base < 2 or length < 1:
        raise ValueError(f"need base >= 2 and length >= 1, got ({base}, {length})")
    return (base**length - 1) // (base - 1)


@dataclass(frozen=True, order=True)
class Solution:
    base: int
    length: int

    def __post_init__(self):
        if self.base < 2 or self.length < 2:
            raise ValueError(f"invalid solution {self.base, self.length}")

    @property
    def value(self) -> int:
        return repunit_value(self.base, self.length)

    def as_pair(self) -> tuple[int, int]:
        return (self.base, self.length)


@dataclass(frozen=True)
class SolutionSet:
    target: int
    items: tuple[Solution, ...]
    min_length: int = 2

    def __iter__(self) -> Iterator[Solution]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def bases(self) -> list[int]:
        return [s.base for s in self.items]

    def pairs(self) -> list[tuple[int, int]]:
        return [s.as_pair() for s in self.items]


@dataclass(frozen=True)
class CoincidenceRecord:
    value: int
    representations: SolutionSet


def _base_for_length(target: int, length: int) -> int | None:
    # repunit(b, length) is strictly increasing in b, and b**(length-1) < target.
    if length == 2:
        return target - 1 if target - 1 >= 2 else None
    lo = 2
    hi = 1 << (-(-target.bit_length() // (length - 1)))
    while lo < hi:
        mid = (lo + hi) // 2
        if repunit_value(mid, length) < target:
            lo = mid + 1
        else:
            hi = mid
    return lo if repunit_value(lo, length) == target else None


def solutions_for(target: int, min_length: int = 2, prime_base_only: bool = False) -> SolutionSet:
    """All (x, m) with x >= 2, m >= min_length and repunit_value(x, m) == target."""
    if target < 3:
        raise ValueError("target must be >= 3")
    if min_length not in (2, 3):
        raise ValueError("min_length must be 2 or 3")
    found = []
    length = min_length
    while (1 << length) - 1 <= target:
        b = _base_for_length(target, length)
        if b is not None and (not prime_base_only or is_prime(b)):
            found.append(Solution(b, length))
        length += 1
    found.sort()
    return SolutionSet(target, tuple(found), min_length)


def reciprocal_tail_sum(target: int, min_length: int = 2, prime_base_only: bool = False) -> Fraction:
    """Exact sum of 1/x_i over all solutions except the one with smallest base."""
    sols = solutions_for(target, min_length, prime_base_only)
    return sum((Fraction(1, s.base) for s in sols.items[1:]), Fraction(0))


def _work_estimate(base_lo: int, base_hi: int, value_cap: int) -> int:
    log_cap = math.log(value_cap)
    return sum(max(0, int(log_cap / math.log(y)) - 1) for y in range(base_lo, base_hi + 1))


def _index_stripe(args: tuple[int, int, int]) -> dict[int, list[tuple[int, int]]]:
    lo, hi, cap = args
    index: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for y in range(lo, hi + 1):
        v = 1 + y + y * y
        n = 3
        while v <= cap:
            index[v].append((y, n))
            v = v * y + 1
            n += 1
    return index


def _stripes(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    # Balance by work: small bases carry many lengths.
    parts = max(1, min(parts, hi - lo + 1))
    edges = [lo + (hi - lo + 1) * i // parts for i in range(parts + 1)]
    return [(edges[i], edges[i + 1] - 1) for i in range(parts) if edges[i] <= edges[i + 1] - 1]


def repunit_index(base_limit: int, value_cap: int, workers: int = 1) -> dict[int, list[tuple[int, int]]]:
    """Map N -> [(y, n)] for every y <= base_limit, n >= 3 with value <= value_cap."""
    stripes = [(lo, hi, value_cap) for lo, hi in _stripes(2, base_limit, workers * 4)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_index_stripe, stripes))
    else:
        parts = [_index_stripe(s) for s in stripes]
    merged: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for part in parts:
        for v, reps in part.items():
            merged[v].extend(reps)
    return merged


def coincidence_search(
    base_limit: int,
    value_cap: int,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> list[CoincidenceRecord]:
    """Every N <= value_cap with two or more length->=3 representations in bases <= base_limit."""
    if base_limit < 3 or value_cap < 31:
        raise ValueError("need base_limit >= 3 and value_cap >= 31")
    needed = _work_estimate(2, base_limit, value_cap)
    if needed > budget:
        raise BudgetExceeded(needed, budget)
    index = repunit_index(base_limit, value_cap, workers)
    records = []
    for value in sorted(v for v, reps in index.items() if len(reps) >= 2):
        full = solutions_for(value, 3)
        kept = tuple(s for s in full.items if s.base <= base_limit)
        assert {s.as_pair() for s in kept} == set(index[value]), value
        records.append(CoincidenceRecord(value, SolutionSet(value, kept, 3)))
    return records


def max_tail_scan(limit: int, min_length: int = 2, prime_base_only: bool = False) -> tuple[Fraction, int]:
    """(max, argmax) of reciprocal_tail_sum(N) over 3 <= N <= limit.

    Any N with two solutions has one of length >= 3, since length 2 fixes
    the base to N - 1; so only values in the length->=3 index can have a
    non-zero tail.
    """
    base_limit = max(2, math.isqrt(limit))
    best, arg = Fraction(0), 3
    for value in sorted(repunit_index(base_limit, limit)):
        tail = reciprocal_tail_sum(value, min_length, prime_base_only)
        if tail > best:
            best, arg = tail, value
    return best, arg
