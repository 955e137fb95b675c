import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from automaticity.membership import (OracleParseError, ResourceError, build_oracle,
                                     build_prime_oracle, build_residue_class_oracle,
                                     build_square_oracle, is_prime_u64, load_explicit_oracle)


def trial_division_count(limit):
    """Count primes below limit by trial division with vectorized candidates."""
    small = [d for d in range(2, math.isqrt(limit) + 1)
             if all(d % e for e in range(2, math.isqrt(d) + 1))]
    n = np.arange(2, limit)
    composite = np.zeros(n.size, dtype=bool)
    for d in small:
        composite |= (n % d == 0) & (n != d)
    return int(np.count_nonzero(~composite))


def test_prime_small():
    o = build_prime_oracle(16)
    assert o(13) and not o(1) and not o(0) and o(2)
    assert [v for v in range(16) if o(v)] == [2, 3, 5, 7, 11, 13]


def test_prime_popcount_1e6(primes_1e6):
    assert primes_1e6.popcount() == trial_division_count(10**6) == 78498


def test_segmented_matches_single_segment():
    a = build_prime_oracle(100_000, segment=1000)
    b = build_prime_oracle(100_000, segment=1 << 20)
    assert np.array_equal(a.bits, b.bits)


def test_prime_agrees_with_miller_rabin(primes_2_20):
    rng = random.Random(20261016)
    for v in (rng.randrange(primes_2_20.limit) for _ in range(10_000)):
        assert primes_2_20(v) == is_prime_u64(v)


@pytest.mark.parametrize("n, expected", [
    (2**61 - 1, True), (2**64 - 59, True), (3215031751, False), (3825123056546413051, False),
    (1, False), (0, False), (2, True),
])
def test_miller_rabin_known(n, expected):
    assert is_prime_u64(n) is expected


@pytest.mark.parametrize("limit", [1, 2, 16, 81, 3**8, 10**5])
def test_square_popcount(limit):
    o = build_square_oracle(limit)
    u = 0
    while u * u < limit:
        u += 1
    assert o.popcount() == u
    assert o(0)
    if limit > 15:
        assert not o(15)


@given(st.integers(0, 3**10 - 1))
def test_square_answers_are_squares(v):
    o = build_square_oracle(3**10)
    assert o(v) == (math.isqrt(v) ** 2 == v)


def test_explicit(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("2\n3\n5\n")
    o = load_explicit_oracle(f, 8)
    assert [v for v in range(8) if o(v)] == [2, 3, 5]
    f.write_text("")
    assert load_explicit_oracle(f, 8).popcount() == 0
    f.write_text("5\n5")
    assert [v for v in range(8) if load_explicit_oracle(f, 8)(v)] == [5]


def test_explicit_errors(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("2\nx\n")
    with pytest.raises(OracleParseError, match=":2:"):
        load_explicit_oracle(f, 8)
    f.write_text("9\n")
    with pytest.raises(IndexError):
        load_explicit_oracle(f, 8)


def test_resource_cap():
    with pytest.raises(ResourceError):
        build_prime_oracle(1 << 27)
    with pytest.raises(ResourceError):
        build_square_oracle(100, limit_cap=10)


def test_oracles_are_pure_and_frozen():
    o = build_oracle("class:1,4", 64)
    assert [o(v) for v in range(64)] == [o(v) for v in range(64)] == [v % 4 == 1 for v in range(64)]
    with pytest.raises(ValueError):
        o.bits[0] = True
    assert build_residue_class_oracle(5, 4, 8).kind == "class:1,4"
