"""Linear forms in logarithms of rationals and the lower bound for the second base."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from . import HypothesisError
from .analytic import LogScale, as_log, log_n_min
from .repunit import Solution, repunit_value

X2_EXPONENT = mpf("0.33479")
C3_PRINTED = mpf("1.69019e10")
LL_SWITCH = mpf("34.3882")
RANGE_FLOOR = 100001


@dataclass(frozen=True)
class LinearForm:
    """sum b_j log a_j with positive rationals a_j and integers b_j, last b non-zero."""

    coefficients: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        coeffs = tuple((Fraction(a), int(b)) for a, b in self.coefficients)
        if not coeffs:
            raise ValueError("empty linear form")
        if any(a <= 0 for a, _ in coeffs):
            raise ValueError("every a_j must be positive")
        if coeffs[-1][1] == 0:
            raise ValueError("last b_j must be non-zero")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def of(cls, *pairs) -> "LinearForm":
        return cls(tuple(pairs))

    @property
    def n(self) -> int:
        return len(self.coefficients)

    def product(self) -> Fraction:
        """prod a_j^b_j, exactly."""
        out = Fraction(1)
        for a, b in self.coefficients:
            out *= a**b
        return out

    def is_zero(self) -> bool:
        return self.product() == 1

    def value(self, dps: int = 50) -> mpf:
        with mp.workdps(dps):
            return +mpmath.fsum(b * (mpmath.log(a.numerator) - mpmath.log(a.denominator)) for a, b in self.coefficients)

    def exact_abs_log(self, dps: int = 50) -> mpf:
        """log |Lambda| computed as log |log prod a_j^b_j| to avoid cancellation."""
        p = self.product()
        with mp.workdps(dps + 20):
            lam = mpmath.log(mpf(p.numerator) / p.denominator) if abs(p - 1) > Fraction(1, 10**6) else mpmath.log1p(mpf(p - 1))
            return mpmath.log(abs(lam))


def height(a: Fraction) -> int:
    a = Fraction(a)
    return max(abs(a.numerator), a.denominator)


@dataclass(frozen=True)
class MatveevParams:
    n: int
    A: tuple[mpf, ...]
    B: mpf
    Omega: mpf
    Cn: mpf

    @property
    def W0(self) -> mpf:
        """log(1.5 e B), the last factor of the bound."""
        return mpmath.log(mpf("1.5") * mpmath.e * self.B)


def matveev_constant(n: int, dps: int = 40) -> mpf:
    """(16/n!) e^n (2n+3)(n+2)(4(n+1))^(n+1) (e n / 2)(4.4n + 5.5 log n + 7)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with mp.workdps(dps):
        e = mpmath.e
        return (
            mpf(16) / math.factorial(n)
            * e**n
            * (2 * n + 3)
            * (n + 2)
            * mpf(4 * (n + 1)) ** (n + 1)
            * (e * n / 2)
            * (mpf("4.4") * n + mpf("5.5") * mpmath.log(n) + 7)
        )


def _drop_units(form: LinearForm) -> LinearForm:
    # log 1 = 0 contributes nothing and would zero the product of heights.
    kept = [(a, b) for a, b in form.coefficients[:-1] if a != 1 and b != 0]
    return LinearForm(tuple(kept) + (form.coefficients[-1],))


def matveev_params(form: LinearForm, dps: int = 40) -> MatveevParams:
    form = _drop_units(form)
    a_n = form.coefficients[-1][0]
    if height(a_n) < 2:
        raise ValueError("last a_j has height 1; A_n = 0 makes B undefined")
    with mp.workdps(dps):
        A = tuple(mpmath.log(height(a)) for a, _ in form.coefficients)
        An = A[-1]
        entries = [mpf(1)] + [abs(b) * Aj / An for (_, b), Aj in zip(form.coefficients[:-1], A[:-1])]
        entries.append(mpf(abs(form.coefficients[-1][1])))
        omega = mpmath.fprod(A)
        return MatveevParams(form.n, A, max(entries), omega, matveev_constant(form.n, dps))


@dataclass(frozen=True)
class MatveevBound:
    log_bound: mpf | None
    zero: bool
    params: MatveevParams | None


def matveev_lower_bound(form: LinearForm, dps: int = 40) -> MatveevBound:
    """Either the form vanishes, or log|Lambda| > -C(n) Omega log(1.5 e B)."""
    if form.is_zero():
        return MatveevBound(None, True, None)
    p = matveev_params(form, dps)
    with mp.workdps(dps):
        return MatveevBound(-p.Cn * p.Omega * p.W0, False, p)


@dataclass(frozen=True)
class SolutionPair:
    first: Solution
    second: Solution
    target: int | LogScale

    def __post_init__(self):
        if not self.first.base < self.second.base:
            raise ValueError("need first.base < second.base")
        if isinstance(self.target, int):
            if self.first.value != self.target or self.second.value != self.target:
                raise ValueError("both solutions must represent the target")
        elif self.first.value != self.second.value:
            raise ValueError("solutions represent different values")

    def linear_form(self) -> LinearForm:
        """m1 log x1 - m2 log x2 + log((x2 - 1)/(x1 - 1))."""
        (x1, m1), (x2, m2) = self.first.as_pair(), self.second.as_pair()
        return LinearForm.of((Fraction(x1), m1), (Fraction(x2), -m2), (Fraction(x2 - 1, x1 - 1), 1))

    def growth_gap_holds(self) -> bool:
        """x2^m2 >= x1^m1 + N."""
        (x1, m1), (x2, m2) = self.first.as_pair(), self.second.as_pair()
        return x2**m2 >= x1**m1 + repunit_value(x1, m1)


class RouteMismatch(ArithmeticError):
    pass


@dataclass(frozen=True)
class LambdaReport:
    direct: mpf
    via_identity: mpf
    upper: mpf  # 1 / (x1^m1 - 1)

    @property
    def in_range(self) -> bool:
        return 0 < self.direct < self.upper


def lambda_for_pair(pair: SolutionPair, rel_tol: float = 1e-12) -> LambdaReport:
    """Lambda by the logarithm sum and by the identity
    log(x1^m1/(x1^m1 - 1)) - log(x2^m2/(x2^m2 - 1)); the two must agree."""
    (x1, m1), (x2, m2) = pair.first.as_pair(), pair.second.as_pair()
    p1, p2 = x1**m1, x2**m2
    dps = 30 + 2 * len(str(p2))
    with mp.workdps(dps):
        direct = m1 * mpmath.log(x1) - m2 * mpmath.log(x2) - (mpmath.log(x1 - 1) - mpmath.log(x2 - 1))
        ident = -mpmath.log1p(-mpf(1) / p1) + mpmath.log1p(-mpf(1) / p2)
        if abs(direct - ident) > rel_tol * abs(ident):
            raise RouteMismatch(f"routes disagree: {direct} vs {ident}")
        return LambdaReport(+direct, +ident, mpf(1) / (p1 - 1))


def printed_role_form(pair: SolutionPair, dps: int = 30) -> mpf:
    """x1 log m1 - x2 log m2 - log((m1 - 1)/(m2 - 1)), the form as displayed (roles swapped)."""
    (x1, m1), (x2, m2) = pair.first.as_pair(), pair.second.as_pair()
    with mp.workdps(dps):
        return x1 * mpmath.log(m1) - x2 * mpmath.log(m2) - (mpmath.log(m1 - 1) - mpmath.log(m2 - 1))


def x2_threshold(L) -> tuple[mpf, str]:
    """Lower bound for the second base: log^0.33479 N, or 100001 from the range search."""
    L = as_log(L)
    if L < log_n_min():
        raise HypothesisError("needs log N >= log 10**100000")
    if mpmath.log(L) > LL_SWITCH:
        return L**X2_EXPONENT, "linear_form"
    return mpf(RANGE_FLOOR), "range_search"


@dataclass(frozen=True)
class ContradictionCheck:
    loglog: mpf
    left: mpf  # log N / log(1.5 e (1 + log N / log 100001))
    right: mpf  # 1.69019e10 (log x2)^3 at x2 = log^0.33479 N

    @property
    def contradiction(self) -> bool:
        return self.left > self.right

    @property
    def ratio(self) -> mpf:
        return self.left / self.right


def lemma41_sides(L, dps: int = 40) -> ContradictionCheck:
    with mp.workdps(dps):
        L = as_log(L)
        LL = mpmath.log(L)
        left = L / mpmath.log(mpf("1.5") * mpmath.e * (1 + L / mpmath.log(RANGE_FLOOR)))
        right = C3_PRINTED * (X2_EXPONENT * LL) ** 3
        return ContradictionCheck(LL, left, right)


def lemma41_contradiction_check(L, dps: int = 40) -> ContradictionCheck:
    """Sides of the comparison that forces x2 > log^0.33479 N; needs log log N >= 34.3882."""
    if mpmath.log(as_log(L)) < LL_SWITCH:
        raise HypothesisError("needs log log N >= 34.3882")
    return lemma41_sides(L, dps)


def lemma41_crossover(lo: float = 30.0, hi: float = 40.0, dps: int = 40) -> mpf:
    """log log N at which the two sides are equal (bisection; left - right is increasing)."""
    with mp.workdps(dps):
        f = lambda LL: (lambda c: c.left - c.right)(lemma41_sides(mpmath.exp(mpf(LL)), dps))
        a, b = mpf(lo), mpf(hi)
        if not (f(a) < 0 < f(b)):
            raise ValueError("crossover not bracketed")
        for _ in range(200):
            m = (a + b) / 2
            if f(m) < 0:
                a = m
            else:
                b = m
            if b - a < mpf(10) ** (-dps // 2):
                break
        return (a + b) / 2
