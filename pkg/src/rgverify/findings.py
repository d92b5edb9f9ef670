"""Known defects in the printed formulas under verification, and the readings adopted.

Each finding is machine-readable: an id, what is printed, what the toolkit
evaluates instead, and a callable producing evidence on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable


@dataclass(frozen=True)
class Finding:
    id: str
    topic: str
    printed: str
    adopted: str
    evidence: Callable[[], object] | None = field(default=None, compare=False)

    def as_dict(self, with_evidence: bool = True) -> dict:
        out = {"id": self.id, "topic": self.topic, "printed": self.printed, "adopted": self.adopted}
        if with_evidence and self.evidence is not None:
            out["evidence"] = self.evidence()
        return out


def _small_n_evidence():
    from .repunit import reciprocal_tail_sum

    return {
        "literal_value_at_x2_1e5": 0.5 + 20000 / 1e5,
        "i_ge_2_value": 20000 / 1e5,
        "tail_31_min_length_2": str(reciprocal_tail_sum(31, 2)),
        "tail_31_min_length_3": str(reciprocal_tail_sum(31, 3)),
    }


def _recurrence_evidence():
    from fractions import Fraction

    from .analytic import recurrence_discrepancies

    return {
        "seed_1": recurrence_discrepancies(4),
        "seed_t": recurrence_discrepancies(6, (Fraction(0), Fraction(1))),
    }


def _display_evidence():
    from .analytic import display_index_mismatch

    return [display_index_mismatch(k) for k in (1, 2, 3)]


def _roles_evidence():
    from .linforms import SolutionPair, lambda_for_pair, printed_role_form
    from .repunit import Solution

    pair = SolutionPair(Solution(2, 5), Solution(5, 3), 31)
    return {
        "as_displayed": float(printed_role_form(pair)),
        "role_corrected": float(lambda_for_pair(pair).direct),
        "identity": float(lambda_for_pair(pair).via_identity),
    }


def _absorption_evidence():
    from .analytic import ck_margin_report

    return [
        {"k": r.k, "slack_times_scale": float(r.absorption_lhs), "needed": 4 * r.k, "absorbed": r.absorbed}
        for r in (ck_margin_report(k) for k in range(1, 7))
    ]


def _large_base_evidence():
    import math

    from .repunit import repunit_value

    x, m = 10**6, 3
    L = math.log(repunit_value(x, m))
    return {
        "x": x,
        "m": m,
        "log_N_cubed": L**3,
        "bound_L_over_3_logL": L / (3 * math.log(L)),
        "literal_holds": m < L / (3 * math.log(L)),
        "m_minus_1_holds": m - 1 < L / (3 * math.log(L)),
    }


def _endpoint_evidence():
    from .pipeline import regime_report_at_edges

    return regime_report_at_edges()


FINDINGS: tuple[Finding, ...] = (
    Finding(
        "small-n-head",
        "reciprocal sum for N < 10^100000",
        "1/2 + 20000/x_2 < 0.21",
        "sum over i >= 2 is at most 20000/x_2 <= 0.2 < 0.21 under lengths m >= 3; "
        "with m >= 2 the exceptional N = 31 has tail 7/30 > 0.21",
        _small_n_evidence,
    ),
    Finding(
        "dyadic-fold-endpoints",
        "geometric folding of block bounds",
        "(M_1^{-2/(k+1)} - M_1^{-2/(k+1)}) / (1 - 2^{-2/(k+1)})",
        "(M_k^{-2/(k+1)} - M_{k-1}^{-2/(k+1)}) / (1 - 2^{-2/(k+1)})",
    ),
    Finding(
        "recurrence-seed",
        "initial derivative polynomials",
        "P_{1,0}(t) = P_{1,1}(t) = 1",
        "P_{1,0}(t) = t from direct differentiation (closed form k!/max(1,k) t^k agrees)",
        _recurrence_evidence,
    ),
    Finding(
        "recurrence-middle-rows",
        "recurrence for P_{k+1,r}",
        "P_{2,1} = t + 2 from the printed recurrence",
        "polynomials extracted from exact differentiation; closed forms agree with them, "
        "the recurrence does not for 1 <= r <= k-2 even with P_{1,0} = t",
        _recurrence_evidence,
    ),
    Finding(
        "derivative-display-index",
        "general k-th derivative display",
        "sum_{r=1}^{k} P_{k,r}(log x) / (x^r (x-1)^{k-r})",
        "sum over r = 0..k-1; P_{k,k} appears only on the (log N + log(x-1)) term",
        _display_evidence,
    ),
    Finding(
        "linear-form-roles",
        "linear form built from two solutions",
        "x_1 log m_1 - x_2 log m_2 - log((m_1-1)/(m_2-1))",
        "m_1 log x_1 - m_2 log x_2 - log((x_1-1)/(x_2-1)), checked against the identity route",
        _roles_evidence,
    ),
    Finding(
        "lower-range-exponent",
        "lowest regime of the first bound",
        "exp(M~^2) >= N >= 10^{10000}",
        "both 10^{10000} and 10^{100000} exposed as regime variants; selection uses 10^{100000}",
    ),
    Finding(
        "m6-min-max",
        "starting block",
        "M_6 = min{10^5, log^{0.33479} N}",
        "M_6 = max{10^5, log^{0.33479} N}, the lower bound for x_2",
    ),
    Finding(
        "n-power-in-fold",
        "border terms of the middle regimes",
        "70.0333 N^{1/21} / M~_6^{2/7} and 46.4039 N^{1/15} / M~^{1/3}",
        "log^{1/21} N and log^{1/15} N",
    ),
    Finding(
        "mtilde-head-log",
        "head term with fixed border M~ = 3591050",
        "log(M~ / log(10^5))",
        "log(M~ / 10^5), the harmonic sum from 10^5 to M~",
    ),
    Finding(
        "prime-head-log",
        "head terms of the prime-base regimes",
        "log(W_4 / log(log^{0.33479} N)) and log(log N / log(10^5))",
        "log(log W / log x_2-floor), i.e. log(22.2883 / (0.33479 log log N)) and log(log log N / log 10^5)",
    ),
    Finding(
        "large-base-length",
        "solutions with x >= log^3 N",
        "m_i < log N / (3 log log N)",
        "m_i - 1 < log N / (3 log log N); the count of such solutions, and the tail bound, are unchanged",
        _large_base_evidence,
    ),
    Finding(
        "lemma21-interval",
        "smoothness hypothesis of the point-counting bound",
        "f in C^k[N, 2N]",
        "f in C^k[M, 2M]",
    ),
    Finding(
        "absorption-4k",
        "additive 4k in the point-counting bound",
        "C_k absorbs the +4k term",
        "slack C_k - main term reported; it covers 4k at M = 10^5, N = 10^100000 only for k = 1",
        _absorption_evidence,
    ),
    Finding(
        "regime-edge-values",
        "printed regime constants at their endpoints",
        "fixed-border regime < 5.90359",
        "expression reaches 5.903613 at log log N = 34.3883 (2.3e-5 over, inside rounding tolerance 1e-3)",
        _endpoint_evidence,
    ),
)


def findings(with_evidence: bool = False) -> list[dict]:
    return [f.as_dict(with_evidence) for f in FINDINGS]


def finding(id_: str) -> Finding:
    for f in FINDINGS:
        if f.id == id_:
            return f
    raise KeyError(id_)
