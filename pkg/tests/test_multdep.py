import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import by_b, naive_exceptional, np_rank
from rgverify import BudgetExceeded
from rgverify.multdep import (
    KNOWN_PAIRS,
    ExponentVector,
    c_of,
    exponent_matrix,
    in_family,
    is_dependent,
    left_kernel,
    load_golden,
    rank_fraction_free,
    search_exceptional,
    to_jsonl,
)

F = Fraction
TEN_THOUSAND = [p for p in KNOWN_PAIRS if p != (280, 15625)]


def modular_rank(rows, p=1_000_000_007):
    m = [[x % p for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col] * inv % p
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# single pairs


def test_smallest_pair():
    v = is_dependent(3, 4)
    assert v.dependent and v.c == F(3, 2)
    assert v.relation == (-2, 1, 2)
    assert v.relation_product() == 1
    assert v.exceptional and not v.family


@pytest.mark.parametrize("a,b,rel", [(6, 16, (-4, 1, 4)), (4, 9, (-3, 1, 2))])
def test_relation_examples(a, b, rel):
    v = is_dependent(a, b)
    assert v.relation == rel and v.relation_product() == 1


def test_family_member():
    v = is_dependent(2, 5)
    assert v.family and v.family_params == (2, 1, 2)
    assert v.dependent and v.relation_product() == 1
    assert not v.exceptional
    assert in_family(4, 13) == (True, (2, 2, 2))


def test_independent_pair():
    v = is_dependent(2, 3)
    assert v.c == 2 and v.dependent  # c = a
    v = is_dependent(5, 7)
    assert not v.dependent and v.relation is None and v.rank == 3


def test_dependent_base_pair_is_not_exceptional():
    v = is_dependent(2, 4)
    assert v.dependent and v.rank_ab == 1 and not v.exceptional


def test_pair_validation():
    with pytest.raises(ValueError):
        is_dependent(4, 4)
    with pytest.raises(ValueError):
        is_dependent(1, 5)


@pytest.mark.parametrize("a,b", KNOWN_PAIRS)
def test_known_pairs_are_exceptional(a, b):
    v = is_dependent(a, b)
    assert v.exceptional and v.relation[2] != 0 and v.relation_product() == 1


# ---------------------------------------------------------------------------
# invariants


def test_kernel_relations_on_random_pairs():
    rng = random.Random(7)
    for _ in range(10**4):
        a = rng.randrange(2, 10**6)
        b = rng.randrange(a + 1, 10**6 + 1)
        v = is_dependent(a, b)
        if v.dependent:
            assert any(v.relation) and v.relation_product() == 1
        else:
            assert v.relation is None


def test_kernel_relations_on_dependent_pairs():
    rng = random.Random(11)
    seen = 0
    for _ in range(2000):
        k = rng.randrange(2, 40)
        s = rng.randrange(1, 4)
        t = rng.randrange(1, 6)
        a, b = k**s, k**t * (k**s - 1) + 1
        v = is_dependent(a, b)
        assert v.dependent and v.relation_product() == 1
        seen += 1
    assert seen == 2000


@pytest.mark.parametrize("k", range(2, 31))
def test_family_soundness(k):
    for s in range(1, 4):
        for t in range(1, 5):
            a, b = k**s, k**t * (k**s - 1) + 1
            fam, (k0, s0, t0) = in_family(a, b)
            assert fam
            assert k0**s0 == a and k0**t0 * (a - 1) + 1 == b


def test_family_rejects_non_members():
    assert in_family(3, 4) == (False, None)
    assert in_family(6, 16) == (False, None)
    assert in_family(2, 4) == (False, None)


def test_rank_against_modular_oracle():
    rng = random.Random(3)
    for _ in range(10**3):
        a = rng.randrange(2, 10**5)
        b = rng.randrange(a + 1, 10**5 + 1)
        v = is_dependent(a, b)
        rows = exponent_matrix([ExponentVector.of(q) for q in (a, b, c_of(a, b))])
        assert v.rank == modular_rank(rows)
        assert v.rank_ab == modular_rank(rows[:2])
        assert v.rank == np_rank(a, b, c_of(a, b))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**12), st.integers(1, 10**12))
def test_exponent_vector_roundtrip(p, q):
    v = ExponentVector.of(F(p, q))
    assert v.rational() == F(p, q)
    assert all(e != 0 for _, e in v.entries)
    assert v == ExponentVector.from_map(v.as_map())
    assert ExponentVector.of(F(q, p)).as_map() == {k: -e for k, e in v.as_map().items()}


def test_exponent_vector_rejects_non_positive():
    with pytest.raises(ValueError):
        ExponentVector.of(0)
    with pytest.raises(ValueError):
        ExponentVector.of(F(-3, 2))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=4))
def test_rank_and_kernel_on_random_matrices(rows):
    r = rank_fraction_free(rows)
    assert r == int(np.linalg.matrix_rank(np.array(rows, dtype=float)))
    kernel = left_kernel(rows)
    assert len(kernel) == len(rows) - r
    for vec in kernel:
        assert any(vec)
        for j in range(4):
            assert sum(e * row[j] for e, row in zip(vec, rows)) == 0


# ---------------------------------------------------------------------------
# searches


def test_search_limit_ten():
    assert [(v.a, v.b) for v in search_exceptional(10)] == [(3, 4), (4, 9)]


def test_search_matches_naive_oracle():
    got = [(v.a, v.b) for v in search_exceptional(300)]
    assert got == naive_exceptional(300)


def test_search_ten_thousand():
    got = search_exceptional(10**4)
    assert [(v.a, v.b) for v in got] == by_b(TEN_THOUSAND)
    assert all(v.relation_product() == 1 for v in got)


def test_search_independent_of_workers():
    assert search_exceptional(3000, workers=1) == search_exceptional(3000, workers=3)


def test_search_limits():
    with pytest.raises(ValueError):
        search_exceptional(3)
    with pytest.raises(BudgetExceeded):
        search_exceptional(10**6)
    assert [(v.a, v.b) for v in search_exceptional(4)] == [(3, 4)]


def test_golden_file():
    golden = load_golden()
    assert [(r["a"], r["b"]) for r in golden] == by_b(KNOWN_PAIRS)
    for rec in golden:
        v = is_dependent(rec["a"], rec["b"])
        assert v.as_record() == rec
        assert F(rec["c_num"], rec["c_den"]) == c_of(rec["a"], rec["b"])


def test_jsonl_lines_match_records():
    vs = search_exceptional(100)
    lines = to_jsonl(vs).splitlines()
    assert len(lines) == len(vs) and all(line.startswith("{") for line in lines)
