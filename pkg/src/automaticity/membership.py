"""Membership oracles: total predicates on ``[0, limit)`` backed by a dense bitset."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_LIMIT_CAP = 1 << 26
SEGMENT_SIZE = 1 << 20


class ResourceError(RuntimeError):
    """The requested oracle would exceed the configured memory budget."""


class OracleParseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MembershipOracle:
    kind: str
    limit: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.bits.setflags(write=False)

    def __call__(self, v: int) -> bool:
        if not 0 <= v < self.limit:
            raise IndexError(f"{v} outside oracle range [0, {self.limit})")
        return bool(self.bits[v])

    answer = __call__

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def count_upto(self, v: int) -> int:
        """Number of members in ``[0, v]``."""
        if v < 0:
            return 0
        return int(np.count_nonzero(self.bits[: v + 1]))


def _check_limit(limit: int, cap: int) -> None:
    if limit > cap:
        raise ResourceError(f"oracle limit {limit} exceeds cap {cap}; raise limit_cap to allow it")


def small_primes(bound: int) -> np.ndarray:
    """Primes p <= bound by a plain sieve of Eratosthenes."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def segmented_sieve(limit: int, segment: int = SEGMENT_SIZE) -> np.ndarray:
    """Boolean array ``is_prime[0:limit]`` computed segment by segment."""
    bits = np.zeros(limit, dtype=bool)
    base = small_primes(math.isqrt(max(limit - 1, 0)))
    for lo in range(0, limit, segment):
        hi = min(lo + segment, limit)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo :: p] = False
        bits[lo:hi] = seg
    bits[:2] = False
    return bits


def build_prime_oracle(limit: int, *, limit_cap: int = DEFAULT_LIMIT_CAP,
                       segment: int = SEGMENT_SIZE) -> MembershipOracle:
    if limit < 2:
        raise ValueError("prime oracle needs limit >= 2")
    _check_limit(limit, limit_cap)
    return MembershipOracle("primes", limit, segmented_sieve(limit, segment))


def build_square_oracle(limit: int, *, limit_cap: int = DEFAULT_LIMIT_CAP) -> MembershipOracle:
    if limit < 1:
        raise ValueError("square oracle needs limit >= 1")
    _check_limit(limit, limit_cap)
    bits = np.zeros(limit, dtype=bool)
    roots = np.arange(math.isqrt(limit - 1) + 1, dtype=np.int64)
    bits[roots * roots] = True
    return MembershipOracle("squares", limit, bits)


def build_residue_class_oracle(residue: int, modulus: int, limit: int, *,
                               limit_cap: int = DEFAULT_LIMIT_CAP) -> MembershipOracle:
    if modulus < 1:
        raise ValueError("modulus must be positive")
    _check_limit(limit, limit_cap)
    bits = np.zeros(limit, dtype=bool)
    bits[residue % modulus :: modulus] = True
    return MembershipOracle(f"class:{residue % modulus},{modulus}", limit, bits)


def build_constant_oracle(value: bool, limit: int) -> MembershipOracle:
    return MembershipOracle("true" if value else "false", limit, np.full(limit, value, dtype=bool))


def load_explicit_oracle(path: str | Path, limit: int, *,
                         limit_cap: int = DEFAULT_LIMIT_CAP) -> MembershipOracle:
    """Read one nonnegative decimal integer per line; duplicates collapse."""
    _check_limit(limit, limit_cap)
    path = Path(path)
    bits = np.zeros(limit, dtype=bool)
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                v = int(text)
            except ValueError:
                raise OracleParseError(f"{path}:{lineno}: not an integer: {text!r}") from None
            if v < 0:
                raise OracleParseError(f"{path}:{lineno}: negative value {v}")
            if v >= limit:
                raise IndexError(f"{path}:{lineno}: value {v} >= limit {limit}")
            bits[v] = True
    return MembershipOracle(f"file:{path}", limit, bits)


def build_oracle(spec: str, limit: int, *, limit_cap: int = DEFAULT_LIMIT_CAP) -> MembershipOracle:
    """Build an oracle from a CLI-style spec: primes, squares, class:r,mod or file:PATH."""
    if spec == "primes":
        return build_prime_oracle(max(limit, 2), limit_cap=limit_cap)
    if spec == "squares":
        return build_square_oracle(limit, limit_cap=limit_cap)
    if spec.startswith("class:"):
        r, mod = spec[len("class:"):].split(",")
        return build_residue_class_oracle(int(r), int(mod), limit, limit_cap=limit_cap)
    if spec.startswith("file:"):
        return load_explicit_oracle(spec[len("file:"):], limit, limit_cap=limit_cap)
    raise ValueError(f"unknown set {spec!r}; expected primes, squares, class:r,mod or file:PATH")


# Witness bases that make Miller-Rabin deterministic below 2**64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime_u64(n: int) -> bool:
    """Deterministic Miller-Rabin for 0 <= n < 2**64."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
