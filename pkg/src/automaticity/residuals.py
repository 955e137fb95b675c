"""Residual sets ``A_w`` and the class census that lower-bounds automaton size.

For a word ``w`` of length ``n - m`` the residual set is the set of high-order
continuations ``a`` in ``[0, q**m)`` with ``a * q**(n-m) + w`` in the target set.
Words with different residual sets must drive any correct automaton into
different states, so the number of distinct classes is a lower bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .membership import MembershipOracle
from .numeral import DigitWord, check_u64, format_digits, to_word

PAPER = "paper"
FULL = "full"
ALL_WORDS = "all"
COPRIME = "coprime"


@dataclass(frozen=True, eq=False)
class ResidualSet:
    m: int
    q: int
    bits: np.ndarray = field(repr=False)
    mode: str = PAPER

    def __post_init__(self):
        if self.mode == PAPER and self.bits.size and self.bits[0]:
            raise ValueError("paper-mode residual must not contain a = 0")

    def __eq__(self, other):
        if not isinstance(other, ResidualSet):
            return NotImplemented
        return self.m == other.m and self.q == other.q and self.key() == other.key()

    def __hash__(self):
        return hash((self.m, self.q, self.key()))

    def key(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    def members(self) -> list[int]:
        return np.flatnonzero(self.bits).tolist()

    def __len__(self) -> int:
        return int(np.count_nonzero(self.bits))


def default_K(q: int, n: int) -> int:
    """ceil(ln ln q**n), clamped to at least 2."""
    return max(2, math.ceil(math.log(n * math.log(q))))


def _check_split(q: int, n: int, m: int, oracle: MembershipOracle) -> None:
    if not 0 < m < n:
        raise ValueError(f"need 0 < m < n, got m={m}, n={n}")
    check_u64(q, n)
    if oracle.limit < q**n:
        raise ValueError(f"oracle limit {oracle.limit} < q**n = {q ** n}")


def residual_of(w: DigitWord, oracle: MembershipOracle, n: int, m: int,
                mode: str = PAPER) -> ResidualSet:
    q = w.base
    if w.length != n - m:
        raise ValueError(f"word length {w.length} != n - m = {n - m}")
    _check_split(q, n, m, oracle)
    a = np.arange(q**m, dtype=np.int64)
    bits = oracle.bits[a * q ** (n - m) + w.value].copy()
    if mode == PAPER:
        bits[0] = False
    return ResidualSet(m, q, bits, mode)


def residual_matrix(oracle: MembershipOracle, q: int, n: int, m: int,
                    mode: str = PAPER, words: np.ndarray | None = None) -> np.ndarray:
    """Row ``i`` is the residual bitset of word ``words[i]`` (default: all words)."""
    lo = q ** (n - m)
    grid = oracle.bits[: q**n].reshape(q**m, lo)  # grid[a, w]
    rows = grid.T if words is None else grid[:, words].T
    rows = np.ascontiguousarray(rows)
    if mode == PAPER:
        rows[:, 0] = False
    return rows


@dataclass
class ResidualCensus:
    q: int
    n: int
    m: int
    mode: str
    word_filter: str
    K: int
    words: np.ndarray = field(repr=False)
    class_of: np.ndarray = field(repr=False)
    class_keys: list[bytes] = field(repr=False)
    multiplicity: np.ndarray = field(repr=False)
    sizes: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.class_keys)

    @property
    def N_k(self) -> list[int]:
        """N_k for k = 1 .. K-1."""
        return [int(np.count_nonzero(self.multiplicity == k)) for k in range(1, self.K)]

    @property
    def R_K(self) -> int:
        return int(np.count_nonzero(self.multiplicity >= self.K))

    @property
    def sum_sizes(self) -> int:
        return int(self.sizes.sum())

    @property
    def max_size(self) -> int:
        return int(self.sizes.max()) if self.sizes.size else 0

    def class_members(self, class_id: int) -> list[int]:
        """Residual set of a class as a sorted list of continuations a."""
        bits = np.unpackbits(np.frombuffer(self.class_keys[class_id], dtype=np.uint8))
        return np.flatnonzero(bits[: self.q**self.m]).tolist()

    def classes(self) -> dict[frozenset, int]:
        return {frozenset(self.class_members(i)): int(self.multiplicity[i])
                for i in range(self.N)}

    def summary(self) -> dict:
        return {
            "q": self.q, "n": self.n, "m": self.m, "mode": self.mode,
            "filter": self.word_filter, "K": self.K, "N": self.N,
            "N_k": self.N_k, "R_K": self.R_K,
            "sum_sizes": self.sum_sizes, "max_size": self.max_size,
        }

    def rows(self):
        """CSV rows: w_value, w_digits, class_id, residual_cardinality."""
        L = self.n - self.m
        for w, c, s in zip(self.words.tolist(), self.class_of.tolist(), self.sizes.tolist()):
            yield w, format_digits(to_word(w, self.q, L).digits, self.q), c, s


def selected_words(q: int, length: int, word_filter: str) -> np.ndarray:
    w = np.arange(q**length, dtype=np.int64)
    if word_filter == COPRIME:
        w = w[np.gcd(w, q) == 1]
    elif word_filter != ALL_WORDS:
        raise ValueError(f"unknown word filter {word_filter!r}")
    return w


def census(q: int, n: int, m: int, oracle: MembershipOracle, mode: str = PAPER,
           word_filter: str = ALL_WORDS, K: int | None = None, jobs: int = 1) -> ResidualCensus:
    """Group the words of length n-m by residual set, compared as exact bytes."""
    _check_split(q, n, m, oracle)
    if mode not in (PAPER, FULL):
        raise ValueError(f"unknown mode {mode!r}")
    K = default_K(q, n) if K is None else K
    if K < 2:
        raise ValueError("K must be >= 2")
    words = selected_words(q, n - m, word_filter)

    def pack(chunk):
        rows = residual_matrix(oracle, q, n, m, mode, chunk)
        return np.packbits(rows, axis=1), rows.sum(axis=1)

    chunks = np.array_split(words, max(1, jobs)) if words.size else [words]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(pack, chunks))
    else:
        parts = [pack(c) for c in chunks]
    packed = np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, 0), np.uint8)
    sizes = np.concatenate([p[1] for p in parts]).astype(np.int64)

    if words.size:
        _, first, inverse, counts = np.unique(packed, axis=0, return_index=True,
                                              return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        # renumber classes by first appearance in word order
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        class_of = rank[inverse]
        multiplicity = counts[order]
        keys = [packed[first[i]].tobytes() for i in order]
    else:
        class_of = np.zeros(0, dtype=np.int64)
        multiplicity = np.zeros(0, dtype=np.int64)
        keys = []
    return ResidualCensus(q, n, m, mode, word_filter, K, words, class_of, keys,
                          multiplicity, sizes)


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, **self.details}


def check_partition_identity(cen: ResidualCensus, oracle: MembershipOracle) -> CheckReport:
    """Each prime in [q**(n-m), q**n) is a*q**(n-m)+w for exactly one (w, a) with a >= 1."""
    if cen.word_filter != ALL_WORDS or cen.mode != PAPER:
        raise ValueError("partition identity needs a paper-mode census over all words")
    q, n, m = cen.q, cen.n, cen.m
    lo = q ** (n - m)
    expected = oracle.count_upto(q**n - 1) - oracle.count_upto(lo - 1)
    return CheckReport("partition_identity", cen.sum_sizes == expected, {
        "q": q, "n": n, "m": m, "sum_sizes": cen.sum_sizes,
        "primes_in_range": expected,
    })


def phi(n: int) -> int:
    result, k = n, 2
    rest = n
    while k * k <= rest:
        if rest % k == 0:
            while rest % k == 0:
                rest //= k
            result -= result // k
        k += 1
    if rest > 1:
        result -= result // rest
    return result


def brun_titchmarsh_bound(q: int, m: int) -> float:
    """2 * (q / phi(q)) * y / ln y with y = q**m."""
    return 2 * q / phi(q) * q**m / (m * math.log(q))


def check_brun_titchmarsh(cen: ResidualCensus) -> CheckReport:
    if cen.word_filter != COPRIME or cen.mode != PAPER:
        raise ValueError("Brun-Titchmarsh check needs a paper-mode census over coprime words")
    bound = brun_titchmarsh_bound(cen.q, cen.m)
    return CheckReport("brun_titchmarsh", cen.max_size < bound, {
        "q": cen.q, "n": cen.n, "m": cen.m, "max_size": cen.max_size,
        "bound": bound, "margin": bound - cen.max_size,
    })


def pigeonhole_holds(cen: ResidualCensus) -> bool:
    """Words with a nonempty residual number at least sum_sizes / max_size.

    The class count N alone admits no such bound, since one class may be
    shared by many words; weighting classes by multiplicity recovers it.
    """
    if cen.max_size == 0:
        return cen.sum_sizes == 0
    nonempty = int(np.count_nonzero(cen.sizes))
    class_sizes = np.array([len(cen.class_members(i)) for i in range(cen.N)])
    weighted = int((class_sizes * cen.multiplicity).sum())
    return nonempty * cen.max_size >= cen.sum_sizes and weighted == cen.sum_sizes
