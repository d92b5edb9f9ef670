import json
from fractions import Fraction

import mpmath
import pytest

from rgverify.findings import FINDINGS, finding, findings
from rgverify.pipeline import regimes, t1_mtilde

# Every identified defect in the printed formulas must carry a ledger entry.
REQUIRED = {
    "small-n-head",
    "dyadic-fold-endpoints",
    "recurrence-seed",
    "recurrence-middle-rows",
    "derivative-display-index",
    "linear-form-roles",
    "lower-range-exponent",
}


def test_ids_unique_and_complete():
    ids = [f.id for f in FINDINGS]
    assert len(ids) == len(set(ids))
    assert REQUIRED <= set(ids)


def test_every_regime_finding_is_ledgered():
    ids = {f.id for f in FINDINGS}
    for theorem in (1, 2):
        for reg in regimes(theorem):
            assert set(reg.findings) <= ids


@pytest.mark.parametrize("f", FINDINGS, ids=lambda f: f.id)
def test_evidence_evaluates_and_serializes(f):
    d = f.as_dict(with_evidence=True)
    assert d["printed"] and d["adopted"] and d["topic"]
    assert d["printed"] != d["adopted"]
    json.dumps(d)


def test_listing_without_evidence():
    rows = findings()
    assert all("evidence" not in r for r in rows)
    assert len(rows) == len(FINDINGS)


def test_lookup():
    assert finding("small-n-head").id == "small-n-head"
    with pytest.raises(KeyError):
        finding("no-such-finding")


def test_small_n_evidence_values():
    ev = finding("small-n-head").evidence()
    assert ev["literal_value_at_x2_1e5"] > 0.21
    assert Fraction(ev["tail_31_min_length_2"]) == Fraction(7, 30) > Fraction(21, 100)
    assert Fraction(ev["tail_31_min_length_3"]) == Fraction(1, 5)


def test_edge_value_claim():
    with mpmath.workdps(30):
        v = t1_mtilde(mpmath.exp(mpmath.mpf("34.3883")))
    assert abs(v - mpmath.mpf("5.903613")) < 1e-6
    assert 0 < v - mpmath.mpf("5.90359") < 1e-3
