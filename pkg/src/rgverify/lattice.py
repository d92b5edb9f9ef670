"""Integer points close to a smooth curve: brute-force counts and explicit bounds."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from mpmath import iv, mp, mpf

from . import BudgetExceeded, HypothesisError
from .analytic import TABLE1, as_log, derive_symbolic, log_n_min

DEFAULT_BUDGET = 10**7
GUARD_ULPS = 4
FLOAT_BAND = 1e-9


class Curve:
    """A real function evaluable in high precision, optionally vectorised in float64.

    Subclasses used by the soundness harness also supply a certified window
    for |f^(k)| on [M, 2M].
    """

    def mp(self, x):
        raise NotImplementedError

    def np(self, xs: np.ndarray) -> np.ndarray | None:
        return None

    def window(self, k: int, M: float) -> "DerivativeWindow":
        raise NotImplementedError

    def __call__(self, x):
        return self.mp(x)


class CallableCurve(Curve):
    def __init__(self, fn: Callable):
        self.fn = fn

    def mp(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class CloseSetQuery:
    f: Curve | Callable
    M: float
    delta: float

    def __post_init__(self):
        if not self.M >= 2:
            raise ValueError("M must be >= 2")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")

    @property
    def curve(self) -> Curve:
        return self.f if isinstance(self.f, Curve) else CallableCurve(self.f)

    @property
    def bounds(self) -> tuple[int, int]:
        return math.ceil(self.M), math.floor(2 * self.M)


@dataclass(frozen=True)
class DerivativeWindow:
    """Certifies lam <= |f^(k)(x)| <= c * lam on [M, 2M]."""

    k: int
    lam: float
    c: float

    def __post_init__(self):
        if self.k < 1 or not self.lam > 0 or not self.c >= 1:
            raise ValueError(f"invalid window {self}")


@dataclass
class CloseScan:
    points: list[int]
    ambiguous: list[int]


def _dist(y):
    return abs(y - mpmath.nint(y))


def _classify(curve: Curve, x: int, delta, dps: int) -> bool | None:
    """True/False if x is certainly inside/outside, None if unresolved at 2*dps."""
    for prec in (dps, 2 * dps):
        with mp.workdps(prec):
            y = curve.mp(mpf(x))
            d = _dist(y)
            guard = GUARD_ULPS * mpmath.eps * max(abs(y), 1)
            if abs(d - mpf(delta)) > guard:
                return bool(d < mpf(delta))
    return None


def _scan_block(args) -> tuple[list[int], list[int]]:
    curve, lo, hi, delta, dps = args
    points, ambiguous = [], []
    xs = np.arange(lo, hi + 1, dtype=np.float64)
    ys = curve.np(xs) if len(xs) else None
    if ys is not None:
        d = np.abs(ys - np.rint(ys))
        band = FLOAT_BAND * np.maximum(np.abs(ys), 1.0)
        near = np.abs(d - delta) <= band
        # Anything non-finite also goes to the slow path.
        near |= ~np.isfinite(d)
        candidates = [int(x) for x, n, inside in zip(xs, near, d < delta) if n or inside]
        sure = {int(x) for x, n, inside in zip(xs, near, d < delta) if inside and not n}
    else:
        candidates = list(range(lo, hi + 1))
        sure = set()
    for x in candidates:
        if x in sure:
            points.append(x)
            continue
        verdict = _classify(curve, x, delta, dps)
        if verdict is None:
            ambiguous.append(x)
        elif verdict:
            points.append(x)
    return points, ambiguous


def scan_close(q: CloseSetQuery, dps: int = 30, budget: int = DEFAULT_BUDGET, workers: int = 1) -> CloseScan:
    """Classify every integer in [M, 2M]; unresolved boundary cases are listed separately."""
    lo, hi = q.bounds
    if hi - lo + 1 > budget:
        raise BudgetExceeded(hi - lo + 1, budget)
    curve = q.curve
    parts = max(1, workers)
    size = max(1, -(-(hi - lo + 1) // parts))
    blocks = [(curve, a, min(a + size - 1, hi), q.delta, dps) for a in range(lo, hi + 1, size)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_block, blocks))
    else:
        results = [_scan_block(b) for b in blocks]
    points = [x for p, _ in results for x in p]
    ambiguous = [x for _, a in results for x in a]
    return CloseScan(points, ambiguous)


def enumerate_close(q: CloseSetQuery, dps: int = 30, budget: int = DEFAULT_BUDGET, workers: int = 1) -> list[int]:
    """Integers x in [M, 2M] with ||f(x)|| < delta, ascending."""
    return scan_close(q, dps, budget, workers).points


def lemma21_bound(w: DerivativeWindow, M: float, delta: float) -> tuple[float, bool]:
    """alpha M lam^(2/(k^2+k)) + 4k with alpha = 2k (2c)^(2/(k^2+k)).

    The flag records whether (k+1)! delta < lam, the condition under which
    the count is guaranteed not to exceed the bound.
    """
    k = w.k
    e = 2.0 / (k * k + k)
    alpha = 2 * k * (2 * w.c) ** e
    bound = alpha * M * w.lam**e + 4 * k
    return bound, math.factorial(k + 1) * delta < w.lam


def lemma33_bound(k: int, L, M) -> mpf:
    """C_k L^(2/(k^2+k)) M^(1 - 2/(k+1)) for f_N with delta = 1/(N log M)."""
    if not 1 <= k <= 6:
        raise HypothesisError("k must be in 1..6")
    L, M = as_log(L), mpf(M)
    if L < log_n_min():
        raise HypothesisError("needs log N >= log 10**100000")
    if M < 10**5:
        raise HypothesisError("needs M >= 10**5")
    return mpf(TABLE1[k][2]) * L ** (mpf(2) / (k * k + k)) * M ** (1 - mpf(2) / (k + 1))


# ----------------------------------------------------------------------------
# Curve families with analytic or interval-certified derivative windows.


class PowerCurve(Curve):
    """c * x**theta with theta non-integer."""

    family = "power"

    def __init__(self, c: float, theta: float):
        if float(theta).is_integer():
            raise ValueError("theta must be non-integer")
        self.c, self.theta = c, theta

    def params(self):
        return {"c": self.c, "theta": self.theta}

    def mp(self, x):
        return mpf(self.c) * mpf(x) ** mpf(self.theta)

    def np(self, xs):
        return self.c * xs**self.theta

    def window(self, k, M):
        falling = 1.0
        for i in range(k):
            falling *= self.theta - i
        a = abs(self.c * falling) * M ** (self.theta - k)
        b = abs(self.c * falling) * (2 * M) ** (self.theta - k)
        lo, hi = min(a, b), max(a, b)
        # Relative slack of 1e-12 absorbs float rounding in the endpoints.
        return DerivativeWindow(k, lo * (1 - 1e-12), max(1.0, hi / lo * (1 + 2e-12)))


class XLogXCurve(Curve):
    """c * x * log x."""

    family = "xlogx"

    def __init__(self, c: float):
        self.c = c

    def params(self):
        return {"c": self.c}

    def mp(self, x):
        x = mpf(x)
        return mpf(self.c) * x * mpmath.log(x)

    def np(self, xs):
        return self.c * xs * np.log(xs)

    def window(self, k, M):
        c = abs(self.c)
        if k == 1:
            lo, hi = c * (math.log(M) + 1), c * (math.log(2 * M) + 1)
        else:
            lo = c * math.factorial(k - 2) / (2 * M) ** (k - 1)
            hi = c * math.factorial(k - 2) / M ** (k - 1)
        return DerivativeWindow(k, lo * (1 - 1e-12), max(1.0, hi / lo * (1 + 2e-12)))


class FNCurve(Curve):
    """f_N(x) = (log N + log(x-1))/log x with an exact integer N."""

    family = "f_N"

    def __init__(self, N: int):
        self.N = int(N)

    def params(self):
        return {"N": self.N}

    def mp(self, x):
        x = mpf(x)
        return (mpmath.log(self.N) + mpmath.log(x - 1)) / mpmath.log(x)

    def np(self, xs):
        return (math.log(self.N) + np.log(xs - 1)) / np.log(xs)

    def window(self, k, M, pieces: int = 256):
        """Interval-arithmetic enclosure of g_k over [M, 2M], split into pieces."""
        form = derive_symbolic(k)
        lows, highs = [], []
        saved = iv.prec
        iv.prec = 80
        try:
            Lv = iv.log(iv.mpf(self.N))
            for i in range(pieces):
                a = mpf(M) * (1 + mpf(i) / pieces)
                b = mpf(M) * (1 + mpf(i + 1) / pieces)
                lo, hi = form.enclose(Lv, a, b)
                lows.append(lo)
                highs.append(hi)
        finally:
            iv.prec = saved
        lo, hi = min(lows), max(highs)
        if not lo > 0:
            raise ValueError(f"g_{k} not certified positive on [{M}, {2 * M}]")
        return DerivativeWindow(k, float(lo) * (1 - 1e-12), max(1.0, float(hi / lo) * (1 + 2e-12)))


def make_curve(family: str, params: dict) -> Curve:
    if family == "power":
        return PowerCurve(params["c"], params["theta"])
    if family == "xlogx":
        return XLogXCurve(params["c"])
    if family == "f_N":
        return FNCurve(params["N"])
    raise ValueError(f"unknown family {family!r}")


@dataclass
class SoundnessCase:
    family: str
    params: dict
    M: float
    delta: float
    window: DerivativeWindow
    count: int
    bound: float
    applicable: bool
    ambiguous: int

    @property
    def violated(self) -> bool:
        return self.applicable and self.count > self.bound

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "M": self.M,
            "delta": self.delta,
            "window": {"k": self.window.k, "lam": self.window.lam, "c": self.window.c},
            "count": self.count,
            "bound": self.bound,
            "applicable": self.applicable,
        }


def soundness_case(curve: Curve, k: int, M: float, delta: float, dps: int = 30) -> SoundnessCase:
    w = curve.window(k, M)
    scan = scan_close(CloseSetQuery(curve, M, delta), dps=dps)
    bound, ok = lemma21_bound(w, M, delta)
    # Unresolved points are counted as inside, the pessimistic side.
    count = len(scan.points) + len(scan.ambiguous)
    return SoundnessCase(curve.family, curve.params(), M, delta, w, count, bound, ok, len(scan.ambiguous))


def random_soundness_cases(n: int, seed: int = 0) -> list[SoundnessCase]:
    """Randomised instances whose delta is chosen to satisfy (k+1)! delta < lam."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < n:
        kind = ("power", "xlogx", "f_N")[len(cases) % 3]
        M = float(rng.integers(50, 1500))
        if kind == "power":
            theta = float(rng.uniform(1.05, 2.95))
            if abs(theta - 2) < 0.05:
                continue
            curve = PowerCurve(float(rng.uniform(1e-4, 2.0)), theta)
            k = int(rng.integers(1, 4))
        elif kind == "xlogx":
            curve = XLogXCurve(float(rng.uniform(1e-3, 3.0)))
            k = int(rng.integers(1, 3))
        else:
            curve = FNCurve(int(rng.integers(10**3, 10**9)))
            k = int(rng.integers(1, 3))
        w = curve.window(k, M)
        cap = min(0.49, w.lam / math.factorial(k + 1))
        delta = float(cap * rng.uniform(0.05, 0.95))
        if not 0 < delta < 0.5:
            continue
        cases.append(soundness_case(curve, k, M, delta))
    return cases
