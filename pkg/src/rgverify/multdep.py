"""Multiplicative dependence of a, b and c = (b - 1)/(a - 1).

The pairs (k^s, k^t (k^s - 1) + 1) always give dependent triples.  The
search looks for the other pairs: a and b multiplicatively independent, with
c nonetheless a rational power product of them.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import BudgetExceeded
from .primes import cached_spf, factorize, primitive_root_power

DEFAULT_LIMIT = 10**4
DEFAULT_BUDGET = 10**5  # largest limit accepted without raising the budget

KNOWN_PAIRS = (
    (3, 4), (4, 9), (6, 16), (6, 81), (15, 36), (16, 25), (16, 81),
    (40, 625), (91, 4096), (169, 729), (280, 15625),
)


@dataclass(frozen=True)
class ExponentVector:
    """Prime exponents of a positive rational; zero entries are never stored."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        cleaned = tuple(sorted((int(p), int(e)) for p, e in dict(self.entries).items() if e != 0))
        object.__setattr__(self, "entries", cleaned)

    @classmethod
    def from_map(cls, m: Mapping[int, int]) -> "ExponentVector":
        return cls(tuple(m.items()))

    @classmethod
    def of(cls, q, spf=None) -> "ExponentVector":
        q = Fraction(q)
        if q <= 0:
            raise ValueError("only positive rationals have exponent vectors")
        m = dict(factorize(q.numerator, spf)) if q.numerator > 1 else {}
        if q.denominator > 1:
            for p, e in factorize(q.denominator, spf).items():
                m[p] = m.get(p, 0) - e
        return cls.from_map(m)

    def as_map(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(p for p, _ in self.entries)

    def rational(self) -> Fraction:
        out = Fraction(1)
        for p, e in self.entries:
            out *= Fraction(p) ** e
        return out


@dataclass(frozen=True)
class DependenceVerdict:
    a: int
    b: int
    c: Fraction
    dependent: bool
    relation: tuple[int, int, int] | None
    family: bool
    family_params: tuple[int, int, int] | None
    rank_ab: int
    rank: int

    @property
    def involves_c(self) -> bool:
        """True when a, b are independent but a, b, c are not."""
        return self.rank_ab == 2 and self.rank == 2

    @property
    def exceptional(self) -> bool:
        return self.involves_c and not self.family

    def relation_product(self) -> Fraction:
        e1, e2, e3 = self.relation
        return Fraction(self.a) ** e1 * Fraction(self.b) ** e2 * self.c**e3

    def as_record(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c_num": self.c.numerator,
            "c_den": self.c.denominator,
            "relation": list(self.relation) if self.relation else None,
            "family": self.family,
        }


# ----------------------------------------------------------------------------
# Exact linear algebra.


def rank_fraction_free(rows: list[list[int]]) -> int:
    """Rank over Q by Bareiss elimination; every intermediate stays an integer."""
    m = [list(map(int, r)) for r in rows]
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank, prev = 0, 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((i for i in range(rank, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, nrows):
            for j in range(col + 1, ncols):
                m[i][j] = (p * m[i][j] - m[i][col] * m[rank][j]) // prev
            m[i][col] = 0
        prev = p
        rank += 1
    return rank


def left_kernel(rows: list[list[int]]) -> list[tuple[int, ...]]:
    """Basis of {e : sum e_i rows_i = 0}, each scaled to coprime integers with
    last non-zero entry positive."""
    n = len(rows)
    ncols = len(rows[0]) if rows else 0
    # Solve M^T e = 0 by reduced row echelon form over Q.
    mt = [[Fraction(rows[i][j]) for i in range(n)] for j in range(ncols)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mt)) if mt[i][col] != 0), None)
        if piv is None:
            continue
        mt[r], mt[piv] = mt[piv], mt[r]
        inv = 1 / mt[r][col]
        mt[r] = [x * inv for x in mt[r]]
        for i in range(len(mt)):
            if i != r and mt[i][col] != 0:
                f = mt[i][col]
                mt[i] = [x - f * y for x, y in zip(mt[i], mt[r])]
        pivots.append(col)
        r += 1
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mt[i][free]
        basis.append(_primitive(v))
    return basis


def _primitive(v: Iterable[Fraction]) -> tuple[int, ...]:
    v = list(v)
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    ints = [x // g for x in ints]
    last = next(x for x in reversed(ints) if x != 0)
    if last < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def exponent_matrix(vectors: list[ExponentVector]) -> list[list[int]]:
    primes = sorted(set().union(*(v.support for v in vectors)))
    return [[v.as_map().get(p, 0) for p in primes] for v in vectors]


# ----------------------------------------------------------------------------
# Decisions.


def c_of(a: int, b: int) -> Fraction:
    return Fraction(b - 1, a - 1)


def _check_pair(a: int, b: int):
    if not 2 <= a < b:
        raise ValueError("need b > a >= 2")


def in_family(a: int, b: int) -> tuple[bool, tuple[int, int, int] | None]:
    """Is (a, b) = (k^s, k^t (k^s - 1) + 1)?  Returns (k0, s0, t) with k0 the primitive root of a."""
    _check_pair(a, b)
    c = c_of(a, b)
    if c.denominator != 1 or c < 2:
        return False, None
    k0, s0 = primitive_root_power(a)
    n, t = int(c), 0
    while n % k0 == 0:
        n //= k0
        t += 1
    if n != 1:
        return False, None
    return True, (k0, s0, t)


def is_dependent(a: int, b: int, spf=None) -> DependenceVerdict:
    """Decide whether a^e1 b^e2 c^e3 = 1 has a non-zero integer solution."""
    _check_pair(a, b)
    c = c_of(a, b)
    va, vb, vc = ExponentVector.of(a, spf), ExponentVector.of(b, spf), ExponentVector.of(c, spf)
    fam, params = in_family(a, b)
    rank_ab = rank_fraction_free(exponent_matrix([va, vb]))
    if not vc.support <= (va.support | vb.support) and rank_ab == 2:
        # A prime of c that a and b lack forces e3 = 0, and then rank(a, b) = 2 forces e = 0.
        return DependenceVerdict(a, b, c, False, None, fam, params, rank_ab, 3)
    rows = exponent_matrix([va, vb, vc])
    rank = rank_fraction_free(rows)
    relation = None
    if rank <= 2:
        kernel = left_kernel(rows)
        # Prefer a relation that actually uses c when one exists.
        relation = next((k for k in kernel if k[2] != 0), kernel[0])
    return DependenceVerdict(a, b, c, rank <= 2, relation, fam, params, rank_ab, rank)


# ----------------------------------------------------------------------------
# Search.


def _radical(fac: Mapping[int, int]) -> int:
    return math.prod(fac)


def _smooth_numbers(primes: list[int], cap: int) -> list[int]:
    """All n <= cap whose prime factors lie in primes (including 1)."""
    out = [1]
    for p in primes:
        grown = []
        for n in out:
            n *= p
            while n <= cap:
                grown.append(n)
                n *= p
        out += grown
    return out


def _divisors(fac: Mapping[int, int]) -> list[int]:
    divs = [1]
    for p, e in fac.items():
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return divs


def _candidates(a: int, limit: int, spf) -> Iterable[int]:
    # c = s/d in lowest terms with s = (b-1)/g, d = (a-1)/g, g = gcd(a-1, b-1).
    # If c lies in the span of a and b, primes of s divide a and primes of d divide b.
    fa = factorize(a, spf)
    fam1 = factorize(a - 1, spf)
    smooth = sorted(_smooth_numbers(sorted(fa), limit))
    for g in _divisors(fam1):
        d = (a - 1) // g
        rd = _radical(factorize(d, spf)) if d > 1 else 1
        for s in smooth:
            b = g * s + 1
            if b > limit:
                break
            if b <= a or math.gcd(s, d) != 1 or b % rd:
                continue
            yield b


def _scan_stripe(args) -> list[tuple[int, int]]:
    lo, hi, limit = args
    spf = cached_spf(limit)
    hits = []
    for a in range(lo, hi):
        for b in _candidates(a, limit, spf):
            v = is_dependent(a, b, spf)
            if v.exceptional:
                hits.append((b, a))
    return hits


def search_exceptional(limit: int = DEFAULT_LIMIT, budget: int = DEFAULT_BUDGET, workers: int = 1) -> list[DependenceVerdict]:
    """All a < b <= limit with a, b independent, (a, b, c) dependent and (a, b) outside the family,
    sorted by (b, a)."""
    if limit < 4:
        raise ValueError("limit must be >= 4")
    if limit > budget:
        raise BudgetExceeded(limit, budget)
    spf = cached_spf(limit)
    stripes = max(1, workers) * 4
    edges = [2 + (limit - 2) * i // stripes for i in range(stripes + 1)]
    tasks = [(edges[i], edges[i + 1], limit) for i in range(stripes) if edges[i] < edges[i + 1]]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_stripe, tasks))
    else:
        parts = [_scan_stripe(t) for t in tasks]
    hits = sorted(h for part in parts for h in part)
    return [is_dependent(a, b, spf) for b, a in hits]


def to_jsonl(verdicts: Iterable[DependenceVerdict]) -> str:
    return "".join(json.dumps(v.as_record()) + "\n" for v in verdicts)


def load_golden() -> list[dict]:
    from importlib.resources import files

    text = files("rgverify").joinpath("data/eleven_pairs.jsonl").read_text()
    return [json.loads(line) for line in text.splitlines() if line.strip()]
