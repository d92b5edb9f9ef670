"""Regime-by-regime bounds for sums of reciprocal bases.

Each regime carries the printed expression (``printed_track``, with the
readings listed in :mod:`rgverify.findings`) and an independent
recomputation from the block bounds (``recomputed_track``).  The two are
reported side by side; only the printed track is held to its printed
constant.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
from mpmath import mp, mpf

from . import BudgetExceeded, HypothesisError
from .analytic import TABLE1, as_log, d_fold, log_n_min
from .lattice import lemma33_bound
from .primes import primes_in

DPS = 30

# Constants are parsed at working precision, not at the 53-bit default.
with mp.workdps(DPS):
    X2_EXP = mpf("0.33479")
    X2_FLOOR = 10**5
    TAIL_CAP = mpf("1e-5")
    M_TILDE = 3591050
    M6_COEF = mpf("35836.7")
    M5_COEF = mpf("3700.84")
    W_EXP = {3: mpf("22.2883"), 4: mpf("22.2883"), 5: mpf("27.0215"), 6: mpf("34.098")}
    TOLERANCE = 1e-3

    THEOREM1_REGIME_MAX = mpf("5.90369")
    THEOREM1_FINAL = mpf("5.9037")
    THEOREM2_REGIME_MAX = mpf("0.73193")
    THEOREM2_FINAL = mpf("0.73194")
    THEOREM2_PRODUCT = mpf("2.07913")
    SMALL_N_CONSTANT = mpf("0.21")

# Coefficients of the subtracted powers log^{-e} N as printed.
NEG_T1 = [("23.6293", 15), ("19.5955", 10), ("14.8925", 6), ("9.09791", 3), ("2.75742", 1), ("0.06044", 0.5)]
NEG_T2 = [("23.6293", 15), ("19.5955", 10), ("14.8926", 6), ("9.09793", 3), ("2.75743", 1), ("0.06044", 0.5)]


def _neg(L, table, start):
    """sum_{j >= start} c_j log^{-1/d_j} N (d = 0.5 encodes log^{-2} N)."""
    return mpmath.fsum(mpf(c) * L ** (-1 / mpf(d)) for c, d in table[start:])


def ll_min() -> mpf:
    return mpmath.log(log_n_min())


def tail_bound(L) -> mpf:
    """Sum over x_i >= log^3 N: at most 1/(3 log^2 N log log N)."""
    L = as_log(L)
    return 1 / (3 * L**2 * mpmath.log(L))


# ----------------------------------------------------------------------------
# Printed expressions, one per regime.


def _x2_floor(L):
    return max(mpf(X2_FLOOR), L**X2_EXP)


def t1_all_k(L):
    return 70.0333 * L ** mpf("-0.048035") - _neg(L, NEG_T1, 0)


def t1_mtilde6(L):
    F = L**X2_EXP
    mt = M6_COEF * L ** (mpf(1) / 6)
    return 1 / F + mpmath.log(mt / F) + mpf("70.0333") * L ** (mpf(1) / 21) / mt ** (mpf(2) / 7) - _neg(L, NEG_T1, 0)


def t1_mtilde5(L):
    F = L**X2_EXP
    mt = M5_COEF * L ** (mpf(1) / 5)
    return 1 / F + mpmath.log(mt / F) + mpf("46.4039") * L ** (mpf(1) / 15) / mt ** (mpf(1) / 3) - _neg(L, NEG_T1, 1)


def t1_mtilde(L):
    mt = mpf(M_TILDE)
    return mpf("1e-5") + mpmath.log(mt / X2_FLOOR) + mpf("46.4039") * L ** (mpf(1) / 15) / mt ** (mpf(1) / 3) - _neg(L, NEG_T1, 1)


def prime_interval_bound(L, W, floor=None) -> mpf:
    """1/log^2 F + log(log W / log F) with F = log^0.33479 N (or the given floor)."""
    L, W = as_log(L), mpf(W)
    F = L**X2_EXP if floor is None else mpf(floor)
    if W < F:
        raise HypothesisError("W is below the floor for x_2")
    lf = mpmath.log(F)
    return 1 / lf**2 + mpmath.log(mpmath.log(W) / lf)


def _prime_regime(k: int, neg_start: int, floor=None) -> Callable:
    def expr(L):
        W = mpmath.exp(W_EXP[k])
        block = mpf(d_fold(k)) * L ** (mpf(2) / (k * (k + 1))) * W ** (-mpf(2) / (k + 1))
        return prime_interval_bound(L, W, floor) + block - _neg(L, NEG_T2, neg_start)

    return expr


def t2_low(L):
    lf = mpmath.log(X2_FLOOR)
    return (
        1 / lf**2
        + mpmath.log(mpmath.log(L) / lf)
        + mpf("2.81787") / L ** (mpf(1) / 3)
        - mpf("2.75743") / L
        - mpf("0.06044") / L**2
    )


# ----------------------------------------------------------------------------
# Regimes.


@dataclass(frozen=True)
class RegimeSpec:
    id: str
    theorem: int
    lo: mpf | None  # log log N, inclusive
    hi: mpf | None  # log log N, exclusive
    printed_bound: mpf
    expression: Callable | None
    expression_kind: str  # printed | reconstructed | none
    anchors: dict = field(default_factory=dict)
    findings: tuple[str, ...] = ()

    def contains(self, LL) -> bool:
        return (self.lo is None or LL >= self.lo) and (self.hi is None or LL < self.hi)


def _mtilde_ll():
    return 2 * mpmath.log(M_TILDE)


def regimes(theorem: int, lower_reading: str = "100000") -> list[RegimeSpec]:
    """Regime table; ``lower_reading`` only relabels the documented domain of the lowest
    named regime, selection below 10^100000 always uses the small-N constant."""
    with mp.workdps(DPS):
        return _regimes(theorem, lower_reading)


def _regimes(theorem: int, lower_reading: str) -> list[RegimeSpec]:
    lo = ll_min()
    low_label = mpmath.log(mpmath.log(10) * int(lower_reading)) if lower_reading != "100000" else lo
    if theorem == 1:
        return [
            RegimeSpec("t1_small_n", 1, None, lo, SMALL_N_CONSTANT, None, "none", {}, ("small-n-head",)),
            RegimeSpec(
                "t1_similar", 1, lo, _mtilde_ll(), THEOREM1_REGIME_MAX, None, "none",
                {"documented_lower_loglog": low_label}, ("lower-range-exponent",),
            ),
            RegimeSpec(
                "t1_mtilde", 1, _mtilde_ll(), mpf("34.3883"), mpf("5.90359"), t1_mtilde, "printed",
                {"M~": M_TILDE}, ("mtilde-head-log", "n-power-in-fold", "regime-edge-values"),
            ),
            RegimeSpec(
                "t1_mtilde5", 1, mpf("34.3883"), mpf("44.9432"), mpf("5.90369"), t1_mtilde5, "printed",
                {"M~_5 coefficient": M5_COEF}, ("n-power-in-fold",),
            ),
            RegimeSpec(
                "t1_mtilde6", 1, mpf("44.9432"), mpf("62.3752"), mpf("5.0226"), t1_mtilde6, "printed",
                {"M~_6 coefficient": M6_COEF}, ("n-power-in-fold",),
            ),
            RegimeSpec(
                "t1_all_k", 1, mpf("62.3752"), None, mpf("3.0919"), t1_all_k, "printed",
                {}, ("dyadic-fold-endpoints", "m6-min-max"),
            ),
        ]
    if theorem == 2:
        return [
            RegimeSpec("t2_small_n", 2, None, lo, SMALL_N_CONSTANT, None, "none", {}, ("small-n-head",)),
            RegimeSpec("t2_low", 2, lo, mpf("22.2883"), mpf("0.66981"), t2_low, "printed", {}, ("prime-head-log",)),
            RegimeSpec(
                "t2_w3", 2, mpf("22.2883"), mpf("33.4325"), mpf("0.71332"), _prime_regime(3, 3, X2_FLOOR),
                "reconstructed", {"log W_3": W_EXP[3]},
            ),
            RegimeSpec(
                "t2_w4_floor", 2, mpf("33.4325"), mpf("34.3883"), mpf("0.73193"), _prime_regime(4, 2, X2_FLOOR),
                "printed", {"log W_4": W_EXP[4]}, ("prime-head-log",),
            ),
            RegimeSpec(
                "t2_w4", 2, mpf("34.3883"), mpf("44.5766"), mpf("0.73193"), _prime_regime(4, 2),
                "printed", {"log W_4": W_EXP[4]}, ("prime-head-log",),
            ),
            RegimeSpec(
                "t2_w5", 2, mpf("44.5766"), mpf("67.5537"), mpf("0.67057"), _prime_regime(5, 1),
                "reconstructed", {"log W_5": W_EXP[5]},
            ),
            RegimeSpec(
                "t2_w6", 2, mpf("67.5537"), mpf("101.848"), mpf("0.49905"), _prime_regime(6, 0),
                "reconstructed", {"log W_6": W_EXP[6]},
            ),
            RegimeSpec("t2_tail", 2, mpf("101.848"), None, mpf("0.49823"), t1_all_k, "reconstructed"),
        ]
    raise ValueError("theorem must be 1 or 2")


def covering_regimes(theorem: int, LL) -> list[RegimeSpec]:
    """Every regime whose closed range holds LL; two at a shared endpoint."""
    LL = mpf(LL)
    table = regimes(theorem)
    hits = [r for r in table if r.contains(LL)]
    hits += [r for r in table if r.hi is not None and LL == r.hi and r not in hits]
    if len(hits) == 0:
        raise ValueError(f"no regime covers log log N = {LL}")
    return hits


def regime_for(theorem: int, LL) -> RegimeSpec:
    """Closed-left/open-right lookup; on a shared endpoint the larger printed bound wins."""
    return max(covering_regimes(theorem, LL), key=lambda r: r.printed_bound)


# ----------------------------------------------------------------------------
# Block sums.


@dataclass(frozen=True)
class DyadicSum:
    explicit: mpf
    folded: mpf
    blocks: int


def dyadic_block_sum(k: int, L, M_lo, M_hi) -> DyadicSum:
    """Sum of lemma33_bound(k, L, M)/M over M = M_lo 2^j < M_hi, and its geometric fold
    D_k L^(2/(k(k+1))) (M_lo^-s - M_hi^-s) with s = 2/(k+1)."""
    with mp.workdps(DPS):
        L, M_lo, M_hi = as_log(L), mpf(M_lo), mpf(M_hi)
        if not M_lo < M_hi:
            raise ValueError("need M_lo < M_hi")
        if M_lo < X2_FLOOR:
            raise HypothesisError("needs M_lo >= 10**5")
        terms = []
        M = M_lo
        while M < M_hi:
            terms.append(lemma33_bound(k, L, M) / M)
            M *= 2
        s = mpf(2) / (k + 1)
        D = mpf(TABLE1[k][2]) / (1 - mpf(2) ** (-s))
        folded = D * L ** (mpf(2) / (k * (k + 1))) * (M_lo ** (-s) - M_hi ** (-s))
        return DyadicSum(mpmath.fsum(terms), folded, len(terms))


def m_k_sequence(L) -> dict[int, mpf]:
    """M_6 = max(10^5, log^0.33479 N); M_k = least 2^n M_6 >= log^(2/k) N (M_0 at log^3 N)."""
    L = as_log(L)
    M6 = _x2_floor(L)
    out = {6: M6}
    for k in range(5, -1, -1):
        target = L**3 if k == 0 else L ** (mpf(2) / k)
        n = max(0, int(mpmath.ceil(mpmath.log(target / M6, 2))))
        M = M6 * mpf(2) ** n
        while M < target:
            M *= 2
        while n > 0 and M / 2 >= target:
            M /= 2
            n -= 1
        out[k] = M
    return out


def block_bounds(L, start) -> list[float]:
    """Best lemma33_bound block bound, min over k, for M = start 2^j < log^3 N (float, log-space)."""
    LL = float(mpmath.log(as_log(L)))
    lstart = float(mpmath.log(start))
    ln2 = math.log(2)
    cap = 3 * LL
    out = []
    j = 0
    while lstart + j * ln2 < cap:
        lm = lstart + j * ln2
        out.append(min(
            math.exp(math.log(TABLE1[k][2]) + 2 / (k * k + k) * LL - 2 / (k + 1) * lm) for k in range(1, 7)
        ))
        j += 1
    return out


def recomputed_track(theorem: int, L) -> float:
    """First-principles bound: trivial (or prime-reciprocal) head up to a dyadic border,
    then the best block bound per dyadic block, minimised over the border."""
    L = as_log(L)
    if L < log_n_min():
        raise HypothesisError("recomputation needs log N >= log 10**100000")
    F = _x2_floor(L)
    b = block_bounds(L, F)
    suffix = [0.0] * (len(b) + 1)
    for j in range(len(b) - 1, -1, -1):
        suffix[j] = suffix[j + 1] + b[j]
    lf = float(mpmath.log(F))
    best = math.inf
    for J in range(len(b) + 1):
        if J == 0:
            head = 0.0
        elif theorem == 1:
            head = 1 / float(F) + J * math.log(2)
        else:
            head = 1 / lf**2 + math.log((lf + J * math.log(2)) / lf)
        best = min(best, head + suffix[J])
    return best


# Largest tails among the two known coincidences (N = 31), by minimal length.
KNOWN_TAIL = {2: 7 / 30, 3: 1 / 5}


def small_n_track(L, convention: int) -> float:
    """Sum over i >= 2 for N < 10^100000.

    Outside the two known coincidences every x_i with i >= 2 is at least 10^5,
    with one base per length and lengths <= 1 + log N/log 10^5.  The known
    coincidences are covered by their exact tails.
    """
    L = as_log(L)
    lengths = int(mpmath.floor(1 + L / mpmath.log(X2_FLOOR)))
    value = max(0, lengths - 2) / X2_FLOOR
    if convention == 2:
        # the length-2 solution x = N - 1
        value += float(1 / (mpmath.exp(L) - 1))
    return max(value, KNOWN_TAIL[convention])


# ----------------------------------------------------------------------------
# Reports.


@dataclass
class BoundReport:
    theorem: int
    regime: str
    loglog: float
    printed_constant: float
    printed_track: float | None
    expression_kind: str
    recomputed_track: float | None
    tail: float
    final: float
    within: bool | None
    findings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "regime": self.regime,
            "LL": self.loglog,
            "printed_constant": self.printed_constant,
            "printed_track": self.printed_track,
            "expression_kind": self.expression_kind,
            "recomputed_track": self.recomputed_track,
            "tail": self.tail,
            "final": self.final,
            "within": self.within,
            "findings": list(self.findings),
            **self.extra,
        }


def _report(theorem: int, L, convention: int = 2, recompute: bool = True) -> BoundReport:
    with mp.workdps(DPS):
        L = as_log(L)
        LL = mpmath.log(L)
        covering = covering_regimes(theorem, LL)
        reg = max(covering, key=lambda r: r.printed_bound)
        findings = list(reg.findings)
        printed = None if reg.expression is None else float(reg.expression(L))
        small = reg.lo is None
        if small:
            rec = small_n_track(L, convention if theorem == 1 else 3)
            tail = 0.0
            if convention == 3:
                # the 0.21 head holds for lengths >= 3 only
                findings.remove("small-n-head")
        else:
            rec = recomputed_track(theorem, L) if recompute else None
            tail = float(tail_bound(L))
        if reg.expression is not None:
            within = printed <= float(reg.printed_bound) + TOLERANCE
        elif small:
            within = rec < float(THEOREM1_FINAL if theorem == 1 else THEOREM2_FINAL)
        elif rec is not None:
            within = rec <= float(reg.printed_bound)
        else:
            within = None
        final = THEOREM1_FINAL if theorem == 1 else THEOREM2_FINAL
        extra = {}
        if len(covering) > 1:
            extra["covering"] = [r.id for r in covering]
        if theorem == 2:
            extra["product_bound"] = float(product_bound())
            extra["product_constant"] = float(THEOREM2_PRODUCT)
        return BoundReport(
            theorem, reg.id, float(LL), float(reg.printed_bound), printed, reg.expression_kind,
            rec, tail, float(final), within, findings, extra,
        )


def theorem1_bound(L, convention: int = 2, recompute: bool = True) -> BoundReport:
    if convention not in (2, 3):
        raise ValueError("convention is the minimal length, 2 or 3")
    return _report(1, L, convention, recompute)


def theorem2_bound(L, recompute: bool = True) -> BoundReport:
    return _report(2, L, 3, recompute)


def product_bound(sum_bound=THEOREM2_FINAL) -> mpf:
    """exp(sum * 10^5/(10^5 - 1)) bounds prod q/(q-1) for q >= 10^5."""
    return mpmath.exp(mpf(sum_bound) * 100000 / 99999)


def final_constants() -> dict:
    with mp.workdps(DPS):
        t1 = THEOREM1_REGIME_MAX + TAIL_CAP
        t2 = THEOREM2_REGIME_MAX + TAIL_CAP
        prod = product_bound()
        return {
            "theorem1_sum": float(t1),
            "theorem1_matches": abs(t1 - THEOREM1_FINAL) < mpf("1e-12"),
            "theorem2_sum": float(t2),
            "theorem2_matches": abs(t2 - THEOREM2_FINAL) < mpf("1e-12"),
            "theorem2_product": float(prod),
            "theorem2_product_below": bool(prod < THEOREM2_PRODUCT),
            "tail_at_min": float(tail_bound(log_n_min())),
            "tail_below_cap": bool(tail_bound(log_n_min()) < TAIL_CAP),
        }


# ----------------------------------------------------------------------------
# Sweeps.


def ll_grid(points: int, lo=None, hi=200.0) -> list[mpf]:
    lo = ll_min() if lo is None else mpf(lo)
    hi = mpf(hi)
    return [lo + (hi - lo) * i / (points - 1) for i in range(points)]


def sweep(theorem: int, points: int = 10_000, lo=None, hi=200.0, recompute_every: int = 0) -> list[dict]:
    """Evaluate the printed track on a log log N grid; the recomputed track every n-th point."""
    rows = []
    with mp.workdps(DPS):
        for i, LL in enumerate(ll_grid(points, lo, hi)):
            L = mpmath.exp(LL)
            reg = regime_for(theorem, LL)
            printed = None if reg.expression is None else float(reg.expression(L))
            rec = None
            if recompute_every and i % recompute_every == 0 and reg.lo is not None:
                rec = recomputed_track(theorem, L)
            rows.append({
                "theorem": theorem,
                "LL": float(LL),
                "regime": reg.id,
                "printed_constant": float(reg.printed_bound),
                "printed_track": printed,
                "recomputed_track": rec,
            })
    return rows


def sweep_violations(rows: list[dict], tolerance: float = TOLERANCE) -> list[dict]:
    return [
        r for r in rows
        if r["printed_track"] is not None and r["printed_track"] > r["printed_constant"] + tolerance
    ]


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def regime_report_at_edges() -> list[dict]:
    """Printed expression at both ends of every regime, against its constant."""
    out = []
    with mp.workdps(DPS):
        for theorem in (1, 2):
            for reg in regimes(theorem):
                if reg.expression is None or reg.lo is None:
                    continue
                hi = reg.hi if reg.hi is not None else reg.lo + 100
                for LL in (reg.lo, hi):
                    v = reg.expression(mpmath.exp(LL))
                    out.append({
                        "regime": reg.id,
                        "LL": float(LL),
                        "value": float(v),
                        "constant": float(reg.printed_bound),
                        "excess": float(v - reg.printed_bound),
                    })
    return out


# ----------------------------------------------------------------------------
# Desk-scale prime sums.


def prime_sum_oracle(lo, hi, budget: int = 10**8) -> float:
    """Sum of 1/p over primes lo <= p < hi by a segmented sieve, compensated summation."""
    lo_i, hi_i = math.ceil(lo), math.ceil(hi)
    if not 2 <= lo_i < hi_i:
        raise ValueError("need 2 <= lo < hi")
    if hi_i > budget:
        raise BudgetExceeded(hi_i, budget)
    parts = []
    seg = 10**7
    for a in range(lo_i, hi_i, seg):
        ps = primes_in(a, min(a + seg, hi_i))
        parts.extend((1.0 / ps.astype("float64")).tolist())
    return math.fsum(parts)
