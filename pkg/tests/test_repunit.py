import random
from collections import defaultdict
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgverify import BudgetExceeded
from rgverify.analytic import f_value
from rgverify.primes import is_prime
from rgverify.repunit import (
    Solution,
    SolutionSet,
    coincidence_search,
    max_tail_scan,
    reciprocal_tail_sum,
    repunit_index,
    repunit_value,
    solutions_for,
)


def brute_solutions(limit):
    """Double loop over all bases and lengths: value -> set of (base, length)."""
    out = defaultdict(set)
    for x in range(2, limit):
        v, m = 1 + x, 2
        while v <= limit:
            out[v].add((x, m))
            v = v * x + 1
            m += 1
    return out


def test_repunit_value_examples():
    assert repunit_value(2, 5) == 31
    assert repunit_value(90, 3) == 8191
    assert repunit_value(7, 1) == 1
    for x in (2, 17, 10**30):
        assert repunit_value(x, 2) == x + 1


def test_repunit_value_rejects_bad_input():
    with pytest.raises(ValueError):
        repunit_value(1, 3)
    with pytest.raises(ValueError):
        repunit_value(5, 0)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10**12), st.integers(1, 60))
def test_repunit_recurrence(x, m):
    assert repunit_value(x, m + 1) == x * repunit_value(x, m) + 1


def test_repunit_recurrence_random_pairs():
    rng = random.Random(0)
    for _ in range(10**4):
        x, m = rng.randrange(2, 10**9), rng.randrange(1, 40)
        assert repunit_value(x, m + 1) == x * repunit_value(x, m) + 1


def test_solutions_known_values():
    assert solutions_for(31).pairs() == [(2, 5), (5, 3), (30, 2)]
    assert solutions_for(8191).pairs() == [(2, 13), (90, 3), (8190, 2)]
    assert solutions_for(31, 3, True).pairs() == [(2, 5), (5, 3)]
    assert solutions_for(8191, 3, True).pairs() == [(2, 13)]


def test_solutions_small_target_against_brute_force():
    brute = brute_solutions(8)
    assert set(solutions_for(7).pairs()) == brute[7] == {(2, 3), (6, 2)}


def test_solutions_empty_for_min_length_three():
    assert len(solutions_for(10, 3)) == 0
    assert solutions_for(10).pairs() == [(9, 2)]


def test_solutions_match_double_loop_oracle():
    limit = 10**5
    brute = brute_solutions(limit + 1)
    for n in range(3, limit + 1):
        assert set(solutions_for(n).pairs()) == brute.get(n, set()), n


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 10**40), st.sampled_from([2, 3]), st.booleans())
def test_solution_set_invariants(n, min_length, prime_only):
    s = solutions_for(n, min_length, prime_only)
    bases = s.bases
    assert bases == sorted(set(bases))
    for sol in s:
        assert sol.value == n and sol.length >= min_length
        if prime_only:
            assert is_prime(sol.base)
    if min_length == 2 and not prime_only:
        assert (n - 1, 2) in s.pairs()


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10**6), st.integers(2, 12))
def test_constructed_representation_is_found(x, m):
    n = repunit_value(x, m)
    assert (x, m) in solutions_for(n).pairs()


def test_solution_type_invariants():
    with pytest.raises(ValueError):
        Solution(1, 3)
    with pytest.raises(ValueError):
        Solution(4, 1)
    assert Solution(4, 2).value == 5


def test_identity_reformulation_for_every_solution():
    # 0 < m - f_N(x) < 1/((x^m - 1) log x)
    with mpmath.workdps(50):
        for n in range(3, 3000):
            L = mpmath.log(n)
            for x, m in solutions_for(n).pairs():
                gap = m - f_value(L, x)
                assert 0 < gap < 1 / ((mpmath.mpf(x) ** m - 1) * mpmath.log(x)), (n, x, m)


def test_reciprocal_tail_examples():
    assert reciprocal_tail_sum(31) == Fraction(7, 30)
    assert reciprocal_tail_sum(31, 2, True) == Fraction(1, 5)
    assert reciprocal_tail_sum(10) == 0
    assert reciprocal_tail_sum(8191) == Fraction(1, 90) + Fraction(1, 8190)


def test_coincidence_examples():
    assert [r.value for r in coincidence_search(100, 10**9)] == [31, 8191]
    recs = coincidence_search(5, 100)
    assert [r.value for r in recs] == [31]
    assert recs[0].representations.pairs() == [(2, 5), (5, 3)]
    assert coincidence_search(3, 50) == []


def test_coincidence_against_brute_force():
    brute = brute_solutions(10**6)
    expected = sorted(v for v, reps in brute.items() if len([r for r in reps if r[1] >= 3]) >= 2)
    assert [r.value for r in coincidence_search(10**3, 10**6)] == expected


def test_coincidence_records_are_valid():
    for r in coincidence_search(10**3, 10**18):
        assert len(r.representations) >= 2
        assert all(s.length >= 3 and s.value == r.value for s in r.representations)


def test_coincidence_budget():
    with pytest.raises(BudgetExceeded):
        coincidence_search(10**5, 10**30, budget=1000)


def test_coincidence_independent_of_workers():
    one = coincidence_search(400, 10**15, workers=1)
    three = coincidence_search(400, 10**15, workers=3)
    assert one == three
    assert repunit_index(400, 10**12, 1) == repunit_index(400, 10**12, 2)


def test_max_tail_small_scan():
    assert max_tail_scan(10**4) == (Fraction(7, 30), 31)
    assert max_tail_scan(10**4, 2, True) == (Fraction(1, 5), 31)
    assert max_tail_scan(10**4, 3) == (Fraction(1, 5), 31)


def test_solution_set_is_a_value():
    s = solutions_for(31)
    assert isinstance(s, SolutionSet) and s.target == 31 and s.min_length == 2
    assert s == solutions_for(31)
