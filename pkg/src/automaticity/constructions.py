"""Explicit upper-bound automata for the squares and the primes.

Every construction is checked by exhaustive verification against its oracle
before a size is reported; a failed check is a bug and raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .automata import LayeredDFA, level_offsets, verify
from .membership import (DEFAULT_LIMIT_CAP, MembershipOracle, build_prime_oracle,
                         build_square_oracle, is_prime_u64, small_primes)
from .numeral import check_u64, word_count
from .residuals import ALL_WORDS, FULL, census, residual_matrix


class ConstructionError(AssertionError):
    """A built automaton failed verification against its oracle."""


@dataclass
class ConstructionReport:
    construction: str
    q: int
    n: int
    m: int
    state_count: int
    verified: bool
    words_checked: int
    reference_name: str
    reference_value: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "construction": self.construction, "q": self.q, "n": self.n, "m": self.m,
            "state_count": self.state_count, "verified": self.verified,
            "words_checked": self.words_checked,
            "reference": {"name": self.reference_name, "value": self.reference_value},
            "bound_log2": math.log2(self.reference_value),
            **self.extra,
        }


def _finish(dfa: LayeredDFA, oracle: MembershipOracle, n: int, name: str) -> tuple[LayeredDFA, int]:
    dfa = dfa.canonical()
    rep = verify(dfa, oracle, n)
    if not rep.passed:
        raise ConstructionError(f"{name} automaton rejected by verification: {rep.to_dict()}")
    return dfa, rep.words_checked


# -------------------------------------------------------------------- squares

def build_squares_automaton(q: int, n: int, oracle: MembershipOracle | None = None
                            ) -> tuple[LayeredDFA, ConstructionReport]:
    """Two-tree automaton for the squares below q**n, q an odd prime, n = 2m.

    Reading LSB first, a word of length m+1 with nonzero lowest digit has at
    most one square continuation a < q**(m-1). The first tree reads those
    m+1 digits; each surviving leaf jumps into a countdown chain that accepts
    exactly when the remaining digits spell its continuation a. Words whose
    lowest digit is 0 go through a small gadget: "00" returns to the start
    (q**2 * v is a square iff v is), "0d" with d != 0 is never a square.
    """
    if q < 3 or not is_prime_u64(q):
        raise ValueError(f"squares construction needs an odd prime base, got {q}")
    if n < 2 or n % 2:
        raise ValueError(f"squares construction needs an even n >= 2, got {n}")
    check_u64(q, n)
    m = n // 2
    oracle = oracle or build_square_oracle(q**n)
    sq = oracle.bits

    # state ids: 0 start, 1 fail, 2 zero gadget, then tree nodes, then countdown states
    START, FAIL, ZERO = 0, 1, 2
    trans: list[list[int]] = [[0] * q for _ in range(3)]
    accept = [True, False, True]
    trans[FAIL] = [FAIL] * q
    trans[ZERO] = [START] + [FAIL] * (q - 1)

    countdown_base = None  # filled after tree nodes are known
    lo_len = m + 1
    hi_count = q ** (m - 1)

    def continuation(w: int) -> int | None:
        a = np.flatnonzero(sq[np.arange(hi_count, dtype=np.int64) * q**lo_len + w])
        if a.size > 1:
            raise ConstructionError(f"word value {w} has {a.size} square continuations")
        return int(a[0]) if a.size else None

    # leaves: words of length m+1 with nonzero lowest digit
    leaf_target: dict[int, int | None] = {}
    for w in range(q**lo_len):
        if w % q:
            leaf_target[w] = continuation(w)

    # alive[(L, v)]: some word through this node (within budget) is accepted
    alive: dict[tuple[int, int], bool] = {}
    for w, a in leaf_target.items():
        alive[(lo_len, w)] = a is not None
    for L in range(lo_len - 1, 0, -1):
        for v in range(q**L):
            if v % q == 0:
                continue
            alive[(L, v)] = bool(sq[v]) or any(alive[(L + 1, v + d * q**L)] for d in range(q))

    node_id: dict[tuple[int, int], int] = {}
    nodes: list[tuple[int, int]] = []
    for L in range(1, lo_len):
        for v in range(q**L):
            if v % q and alive[(L, v)]:
                node_id[(L, v)] = 3 + len(nodes)
                nodes.append((L, v))
    countdown_base = 3 + len(nodes)

    def target(L: int, v: int) -> int:
        if L == lo_len:
            a = leaf_target[v]
            return FAIL if a is None else countdown_base + a
        return node_id.get((L, v), FAIL)

    trans[START] = [ZERO] + [target(1, d) for d in range(1, q)]
    for L, v in nodes:
        trans.append([target(L + 1, v + d * q**L) for d in range(q)])
        accept.append(bool(sq[v]))
    for a in range(hi_count):
        r = a % q
        trans.append([countdown_base + a // q if d == r else FAIL for d in range(q)])
        accept.append(a == 0)

    dfa, checked = _finish(LayeredDFA(q, n, START, np.array(trans), np.array(accept)),
                           oracle, n, "squares")
    report = ConstructionReport(
        "squares", q, n, m, dfa.size, True, checked, "q**(n/2)", float(q**m),
        {"extra_states": 2, "tree_nodes": len(nodes) + 1},
    )
    return dfa, report


# --------------------------------------------------------------------- primes

def primes_automaton_bound(q: int, n: int, m: int, classes: int) -> int:
    """Trie over the first n-m digits plus one q**m-state acceptor per class."""
    return word_count(q, n - m) + q**m * classes


def build_primes_automaton(q: int, n: int, m: int, oracle: MembershipOracle | None = None
                           ) -> tuple[LayeredDFA, ConstructionReport]:
    """q-ary trie over the low n-m digits, then one shared acceptor per residual class.

    Acceptor nodes are hash-consed level by level (same remaining budget, same
    accept bit, same children), so acceptors of different classes share
    their lower parts.
    """
    if not 0 < m < n:
        raise ValueError(f"need 0 < m < n, got m={m}, n={n}")
    check_u64(q, n)
    oracle = oracle or build_prime_oracle(q**n, limit_cap=max(DEFAULT_LIMIT_CAP, q**n))
    cen = census(q, n, m, oracle, mode=FULL, word_filter=ALL_WORDS)
    C = cen.N
    lo = n - m
    reps = np.array([int(np.flatnonzero(cen.class_of == c)[0]) for c in range(C)], dtype=np.int64)
    R = residual_matrix(oracle, q, n, m, FULL, reps)  # R[c, a]

    # acceptor levels, bottom-up: j digits of a read, r = m - j remaining
    ids = R.astype(np.int64)  # j = m: node class is just its accept bit
    uniq_bits, leaf_ids = np.unique(ids, return_inverse=True)
    leaf_ids = leaf_ids.reshape(ids.shape)
    levels_children: list[np.ndarray] = [np.zeros((uniq_bits.size, 0), dtype=np.int64)]
    levels_accept: list[np.ndarray] = [uniq_bits.astype(bool)]
    cur = leaf_ids  # (C, q**j) local ids at current level
    for j in range(m - 1, -1, -1):
        width = q**j
        bits = R[:, :width].astype(np.int64)
        kids = [cur[:, d * width:(d + 1) * width] for d in range(q)]
        rows = np.stack([bits] + kids, axis=-1).reshape(-1, q + 1)
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
        levels_accept.append(uniq[:, 0].astype(bool))
        levels_children.append(uniq[:, 1:])
        cur = inv.reshape(C, width)
    roots_local = cur[:, 0]

    # global numbering: trie (words of length < lo), then acceptor levels top (j=0) to bottom
    T = word_count(q, lo - 1)
    sizes = [a.size for a in levels_accept]  # index 0 is j = m (leaves), last is j = 0
    base = {}
    pos = T
    for idx in range(len(sizes) - 1, -1, -1):
        base[idx] = pos
        pos += sizes[idx]
    S = pos
    trans = np.empty((S, q), dtype=np.int64)
    accept = np.empty(S, dtype=bool)

    off = level_offsets(q, lo)
    for L in range(lo):
        v = np.arange(q**L, dtype=np.int64)
        accept[off[L]:off[L + 1]] = oracle.bits[v]
        child_vals = v[:, None] + np.arange(q, dtype=np.int64)[None, :] * q**L
        if L + 1 < lo:
            trans[off[L]:off[L + 1]] = off[L + 1] + child_vals
        else:
            top = len(sizes) - 1
            trans[off[L]:off[L + 1]] = base[top] + roots_local[cen.class_of[child_vals]]
    for idx in range(len(sizes)):
        b = base[idx]
        accept[b:b + sizes[idx]] = levels_accept[idx]
        if idx == 0:
            trans[b:b + sizes[idx]] = np.arange(b, b + sizes[idx])[:, None]
        else:
            trans[b:b + sizes[idx]] = base[idx - 1] + levels_children[idx]

    dfa, checked = _finish(LayeredDFA(q, n, 0, trans, accept), oracle, n, "primes")
    bound = primes_automaton_bound(q, n, m, C)
    report = ConstructionReport(
        "primes", q, n, m, dfa.size, True, checked,
        "q**(n-m) trie + q**m * |A|", float(bound),
        {"distinct_residuals": C, "bound": bound, "within_bound": dfa.size <= bound},
    )
    return dfa, report


# --------------------------------------------------------------- subset count

@dataclass
class SubsetBound:
    q: int
    m: int
    y: int
    Q: int
    phi_Q: int
    bound_log2: int
    Q_exceeds_sqrt: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def subset_count_bound(q: int, m: int) -> SubsetBound:
    """Product Q of the primes below y not dividing q, with y maximal subject to Q < q**m.

    Returns log2 of the count bound 2**((floor(q**m / Q) + 1) * phi(Q)) and
    whether Q > q**(m/2).
    """
    if q < 2 or m < 1:
        raise ValueError("need q >= 2 and m >= 1")
    target = q**m
    Q, phi_Q = 1, 1
    bound = 64
    while True:
        primes = small_primes(bound).tolist()
        for p in primes:
            if q % p == 0:
                continue
            if Q * p >= target:
                y = p
                return SubsetBound(q, m, y, Q, phi_Q, (target // Q + 1) * phi_Q, Q * Q > target)
            Q *= p
            phi_Q *= p - 1
        Q, phi_Q = 1, 1
        bound *= 4


def theorem3_log2(q: int, n: int, m: int) -> float:
    """log2 of q**(n-m) + q**m * 2**bound_log2 for the subset-count bound."""
    sb = subset_count_bound(q, m)
    a = (n - m) * math.log2(q)
    b = m * math.log2(q) + sb.bound_log2
    hi, lo_ = max(a, b), min(a, b)
    return hi + math.log2(1 + 2 ** (lo_ - hi))
