import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from automaticity.membership import build_prime_oracle, build_square_oracle, build_oracle
from automaticity.numeral import to_word
from automaticity.residuals import (ResidualSet, brun_titchmarsh_bound, census,
                                    check_brun_titchmarsh, check_partition_identity, default_K,
                                    pigeonhole_holds, residual_of)


def is_prime_td(v):
    return v >= 2 and all(v % d for d in range(2, math.isqrt(v) + 1))


def brute_classes(q, n, m, member, mode="paper", coprime=False):
    """Residual classes by direct enumeration of (w, a)."""
    lo = q ** (n - m)
    sets = {}
    for w in range(lo):
        if coprime and math.gcd(w, q) != 1:
            continue
        start = 1 if mode == "paper" else 0
        sets[w] = frozenset(a for a in range(start, q**m) if member(a * lo + w))
    return sets


@pytest.fixture(scope="module")
def p16():
    return build_prime_oracle(16)


@pytest.mark.parametrize("w, expected", [(1, [1, 3]), (3, [1, 2]), (0, [])])
def test_residual_of_examples(p16, w, expected):
    assert residual_of(to_word(w, 2, 2), p16, 4, 2).members() == expected


def test_residual_of_length_mismatch(p16):
    with pytest.raises(ValueError):
        residual_of(to_word(1, 2, 3), p16, 4, 2)


def test_census_small(p16):
    cen = census(2, 4, 2, p16, "paper", "all", K=2)
    assert cen.N == 3
    assert cen.classes() == {frozenset(): 2, frozenset({1, 3}): 1, frozenset({1, 2}): 1}
    assert (cen.N_k, cen.R_K, cen.sum_sizes, cen.max_size) == ([2], 1, 4, 2)
    brute = brute_classes(2, 4, 2, is_prime_td)
    assert cen.classes() == dict(Counter(brute.values()))


def test_census_squares_full_mode():
    o = build_square_oracle(16)
    cen = census(2, 4, 2, o, "full", "all", K=2)
    brute = brute_classes(2, 4, 2, lambda v: math.isqrt(v) ** 2 == v, mode="full")
    assert cen.classes() == dict(Counter(brute.values()))
    # squares below 16 are 0, 1, 4, 9: w=0 -> {0,1}, w=1 -> {0,2}, others empty
    assert cen.classes() == {frozenset({0, 1}): 1, frozenset({0, 2}): 1, frozenset(): 2}


@pytest.mark.parametrize("q", [2, 3, 5])
def test_single_digit_words(q):
    o = build_prime_oracle(q**4)
    assert census(q, 4, 3, o).words.size == q


@pytest.mark.parametrize("q, n, m", [(2, 4, 2), (3, 4, 2), (2, 6, 3), (2, 9, 4), (5, 4, 2)])
@pytest.mark.parametrize("mode", ["paper", "full"])
@pytest.mark.parametrize("word_filter", ["all", "coprime"])
def test_census_matches_brute_force(q, n, m, mode, word_filter):
    o = build_prime_oracle(q**n)
    cen = census(q, n, m, o, mode, word_filter)
    brute = brute_classes(q, n, m, is_prime_td, mode, word_filter == "coprime")
    assert cen.classes() == dict(Counter(brute.values()))
    assert cen.sum_sizes == sum(len(s) for s in brute.values())
    assert cen.max_size == max(len(s) for s in brute.values())
    assert cen.N == sum(cen.N_k) + cen.R_K
    assert cen.multiplicity.sum() == len(brute)


@pytest.mark.parametrize("q, n, m", [(2, 4, 2), (3, 4, 2), (2, 6, 3)])
def test_partition_identity_examples(q, n, m):
    o = build_prime_oracle(q**n)
    rep = check_partition_identity(census(q, n, m, o), o)
    expected = sum(1 for p in range(q ** (n - m), q**n) if is_prime_td(p))
    assert rep.passed and rep.details["sum_sizes"] == expected
    if (q, n, m) == (2, 4, 2):
        assert expected == 4


def test_brun_titchmarsh_example(p16):
    rep = check_brun_titchmarsh(census(2, 4, 2, p16, word_filter="coprime"))
    assert rep.passed
    assert rep.details["max_size"] == 2
    assert rep.details["bound"] == pytest.approx(2 * 2 * 4 / math.log(4))
    assert rep.details["bound"] == pytest.approx(11.54, abs=0.01)


@pytest.mark.parametrize("q, n, m", [(2, 16, 8), (3, 8, 4)])
def test_brun_titchmarsh_runs(q, n, m):
    o = build_prime_oracle(q**n)
    rep = check_brun_titchmarsh(census(q, n, m, o, word_filter="coprime"))
    assert rep.passed and rep.details["margin"] > 0


def test_bt_bound_uses_phi():
    assert brun_titchmarsh_bound(10, 2) == pytest.approx(2 * 10 / 4 * 100 / math.log(100))


def test_even_words_empty_for_q2(primes_2_20):
    cen = census(2, 14, 6, primes_2_20)
    assert np.all(cen.sizes[cen.words % 2 == 0] == 0)


def test_full_restricted_equals_paper(primes_2_20):
    for w in (1, 7, 12, 255):
        full = residual_of(to_word(w, 2, 8), primes_2_20, 14, 6, "full")
        paper = residual_of(to_word(w, 2, 8), primes_2_20, 14, 6, "paper")
        assert [a for a in full.members() if a >= 1] == paper.members()


def test_residual_set_equality_is_exact():
    a = ResidualSet(3, 2, np.array([0, 1, 0, 0, 0, 0, 0, 1], dtype=bool))
    b = ResidualSet(3, 2, np.array([0, 1, 0, 0, 0, 0, 0, 1], dtype=bool))
    c = ResidualSet(3, 2, np.array([0, 1, 0, 0, 0, 0, 1, 0], dtype=bool))
    assert a == b and hash(a) == hash(b) and a != c
    with pytest.raises(ValueError):
        ResidualSet(1, 2, np.array([1, 0], dtype=bool), "paper")


def test_default_K():
    assert default_K(2, 4) == 2
    assert default_K(2, 64) == math.ceil(math.log(64 * math.log(2)))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(3, 9), st.data())
def test_census_invariants(q, n, data):
    if q**n > 3**9:
        n = 6
    m = data.draw(st.integers(1, n - 1))
    spec = data.draw(st.sampled_from(["primes", "squares", "class:1,3"]))
    o = build_oracle(spec, q**n)
    cen = census(q, n, m, o, data.draw(st.sampled_from(["paper", "full"])))
    assert cen.N == sum(cen.N_k) + cen.R_K
    assert int(cen.multiplicity.sum()) == cen.words.size
    assert pigeonhole_holds(cen)


@pytest.mark.parametrize("jobs", [2, 3, 7])
def test_census_independent_of_jobs(primes_2_20, jobs):
    a = census(2, 18, 9, primes_2_20, jobs=1)
    b = census(2, 18, 9, primes_2_20, jobs=jobs)
    assert a.class_keys == b.class_keys
    assert np.array_equal(a.class_of, b.class_of)
    assert np.array_equal(a.sizes, b.sizes)
