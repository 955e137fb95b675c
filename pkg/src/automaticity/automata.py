"""Length-bounded DFA semantics over LSB-first digit words.

An automaton is *correct at budget N* for a set X when every word of length
<= N ends in an accepting state iff its value lies in X. Longer words are
unconstrained. Words of length <= N are laid out as a prefix trie in
level order: the word of length L and value v has id ``(q**L - 1)/(q - 1) + v``,
so ids are sorted by (length, value) and children always follow parents.

The central tool is the *residual label*: ``labels[b][i]`` identifies the
accept pattern of word ``i`` on all suffixes of length <= b. Two words u, v
with |u| <= |v| are distinguishable within the budget exactly when their
labels at ``b = N - |v|`` differ.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from .membership import MembershipOracle, ResourceError
from .numeral import format_digits, to_word, word_count

DEFAULT_MAX_STATES = 1 << 24
EXACT_MAX_WORDS = 4096
EXACT_MAX_STATES = 12
# exact max clique is used when the number of candidate classes is at most this
EXACT_CLIQUE_LIMIT = 60


@dataclass(eq=False)
class LayeredDFA:
    q: int
    N: int
    start: int
    transitions: np.ndarray = field(repr=False)  # (states, q) int64
    accepting: np.ndarray = field(repr=False)  # (states,) bool

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.int64)
        self.accepting = np.asarray(self.accepting, dtype=bool)
        S = self.accepting.shape[0]
        if self.transitions.shape != (S, self.q):
            raise ValueError(f"transition table has shape {self.transitions.shape}, "
                             f"expected {(S, self.q)}")
        if S and (self.transitions.min() < 0 or self.transitions.max() >= S):
            raise ValueError("transition targets must be valid state ids")
        if not 0 <= self.start < S:
            raise ValueError("start state out of range")

    @property
    def size(self) -> int:
        return int(self.accepting.shape[0])

    def depth(self) -> np.ndarray:
        """Minimal read length reaching each state (-1 if unreachable)."""
        dist = np.full(self.size, -1, dtype=np.int64)
        dist[self.start] = 0
        queue = deque([self.start])
        while queue:
            s = queue.popleft()
            for t in self.transitions[s].tolist():
                if dist[t] < 0:
                    dist[t] = dist[s] + 1
                    queue.append(t)
        return dist

    def run(self, digits) -> int:
        s = self.start
        for d in digits:
            s = int(self.transitions[s, d])
        return s

    def accepts(self, digits) -> bool:
        return bool(self.accepting[self.run(digits)])

    def canonical(self) -> LayeredDFA:
        """Drop unreachable states and renumber in BFS order (digits ascending)."""
        order = [self.start]
        new_id = {self.start: 0}
        queue = deque([self.start])
        while queue:
            s = queue.popleft()
            for t in self.transitions[s].tolist():
                if t not in new_id:
                    new_id[t] = len(order)
                    order.append(t)
                    queue.append(t)
        old = np.array(order, dtype=np.int64)
        remap = np.full(self.size, -1, dtype=np.int64)
        remap[old] = np.arange(old.size)
        return LayeredDFA(self.q, self.N, 0, remap[self.transitions[old]], self.accepting[old])

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "start": self.start,
            "accepting": np.flatnonzero(self.accepting).tolist(),
            "transitions": self.transitions.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> LayeredDFA:
        q = data["q"]
        trans = np.asarray(data["transitions"], dtype=np.int64).reshape(-1, q)
        acc = np.zeros(trans.shape[0], dtype=bool)
        acc[np.asarray(data["accepting"], dtype=np.int64)] = True
        return cls(q, data["N"], data["start"], trans, acc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> LayeredDFA:
        return cls.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- trie layout

def level_offsets(q: int, N: int) -> list[int]:
    """offsets[L] is the id of the first word of length L (L = 0..N+1)."""
    return [word_count(q, L - 1) if L else 0 for L in range(N + 2)]


def trie_layout(q: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """(level, value) of every word id of length <= N."""
    sizes = [q**L for L in range(N + 1)]
    level = np.repeat(np.arange(N + 1, dtype=np.int64), sizes)
    value = np.concatenate([np.arange(s, dtype=np.int64) for s in sizes])
    return level, value


def child_table(q: int, N: int) -> np.ndarray:
    """child[i, d] for every word i of length < N."""
    blocks = []
    off = level_offsets(q, N)
    for L in range(N):
        v = np.arange(q**L, dtype=np.int64)
        blocks.append(off[L + 1] + v[:, None] + np.arange(q, dtype=np.int64)[None, :] * q**L)
    if not blocks:
        return np.zeros((0, q), dtype=np.int64)
    return np.concatenate(blocks)


def word_of_id(i: int, q: int, N: int):
    off = level_offsets(q, N)
    L = max(k for k in range(N + 1) if off[k] <= i)
    return to_word(i - off[L], q, L)


def _check_budget(q: int, N: int, oracle: MembershipOracle | None, max_states: int) -> None:
    if N < 0:
        raise ValueError("budget N must be >= 0")
    if oracle is not None and oracle.limit < q**N:
        raise ValueError(f"oracle limit {oracle.limit} < q**N = {q ** N}")
    if word_count(q, N) > max_states:
        raise ResourceError(f"{word_count(q, N)} trie states exceed budget {max_states}")


def oracle_word_accepts(oracle: MembershipOracle, q: int, N: int) -> np.ndarray:
    _, value = trie_layout(q, N)
    return oracle.bits[value]


def build_trie(oracle: MembershipOracle, q: int, N: int, *,
               max_states: int = DEFAULT_MAX_STATES) -> LayeredDFA:
    """Prefix tree with one state per word of length <= N; depth-N states self-loop."""
    _check_budget(q, N, oracle, max_states)
    S = word_count(q, N)
    trans = np.empty((S, q), dtype=np.int64)
    inner = word_count(q, N - 1) if N else 0
    trans[:inner] = child_table(q, N)
    trans[inner:] = np.arange(inner, S, dtype=np.int64)[:, None]
    return LayeredDFA(q, N, 0, trans, oracle_word_accepts(oracle, q, N))


def word_states(dfa: LayeredDFA, N: int) -> np.ndarray:
    """State reached by every word of length <= N, indexed by word id."""
    blocks = [np.array([dfa.start], dtype=np.int64)]
    for _ in range(N):
        # children of a level are ordered by value v + d*q**L, i.e. digit-major
        blocks.append(dfa.transitions[blocks[-1]].T.reshape(-1))
    return np.concatenate(blocks)


def dfa_word_accepts(dfa: LayeredDFA, N: int) -> np.ndarray:
    return dfa.accepting[word_states(dfa, N)]


# ------------------------------------------------------------ residual labels

def residual_labels(word_accepts: np.ndarray, q: int, N: int) -> list[np.ndarray]:
    """Backward induction on the remaining budget.

    ``labels[b]`` covers the words of length <= N - b; equal labels mean equal
    accept behaviour on every suffix of length <= b.
    """
    acc = np.asarray(word_accepts, dtype=np.int64)
    children = child_table(q, N)
    labels = [acc.copy()]
    for b in range(1, N + 1):
        cnt = word_count(q, N - b)
        prev = labels[-1]
        rows = np.column_stack([acc[:cnt]] + [prev[children[:cnt, d]] for d in range(q)])
        _, inverse = np.unique(rows, axis=0, return_inverse=True)
        labels.append(inverse.reshape(-1).astype(np.int64))
    return labels


def distinguishable(labels: list[np.ndarray], levels: np.ndarray, N: int, u: int, v: int) -> bool:
    b = N - max(int(levels[u]), int(levels[v]))
    return bool(labels[b][u] != labels[b][v])


def _candidates(labels, q: int, N: int) -> list[tuple[int, int]]:
    """One representative word id per (level, residual class), as (id, level)."""
    off = level_offsets(q, N)
    out = []
    for L in range(N + 1):
        block = labels[N - L][off[L]:off[L + 1]]
        _, first = np.unique(block, return_index=True)
        out.extend((off[L] + int(i), L) for i in np.sort(first))
    return out


def _label_matrix(labels, ids, lvls, N):
    M = np.full((len(ids), N + 1), -1, dtype=np.int64)
    for b in range(N + 1):
        ok = lvls <= N - b
        if ok.any():
            M[ok, b] = labels[b][ids[ok]]
    return M


def _greedy_clique(labels, cands, N, seed_level):
    ids = np.array([c[0] for c in cands], dtype=np.int64)
    lvls = np.array([c[1] for c in cands], dtype=np.int64)
    M = _label_matrix(labels, ids, lvls, N)
    counts = np.bincount(lvls, minlength=N + 1)
    level_order = [seed_level] + [L for L in np.argsort(-counts, kind="stable").tolist()
                                  if L != seed_level]
    chosen: list[int] = []
    for L in level_order:
        for j in np.flatnonzero(lvls == L).tolist():
            if chosen:
                c = np.array(chosen)
                bc = N - np.maximum(lvls[c], L)
                if np.any(M[c, bc] == M[j, bc]):
                    continue
            chosen.append(j)
    return ids[chosen].tolist()


def distinguishing_words(oracle_or_accepts, q: int, N: int) -> list[int]:
    """Word ids that are pairwise distinguishable within budget N.

    Exact maximum clique when the candidate graph is small, otherwise a greedy
    clique seeded from the best levels. Always at least the largest number of
    residual classes found among words of a single length.
    """
    acc = (oracle_word_accepts(oracle_or_accepts, q, N)
           if isinstance(oracle_or_accepts, MembershipOracle) else oracle_or_accepts)
    labels = residual_labels(acc, q, N)
    cands = _candidates(labels, q, N)
    levels, _ = trie_layout(q, N)
    if len(cands) <= EXACT_CLIQUE_LIMIT:
        g = nx.Graph()
        g.add_nodes_from(c[0] for c in cands)
        for i, (u, _) in enumerate(cands):
            for v, _ in cands[i + 1:]:
                if distinguishable(labels, levels, N, u, v):
                    g.add_edge(u, v)
        clique, _ = nx.max_weight_clique(g, weight=None)
        return sorted(clique)
    counts = np.bincount([c[1] for c in cands], minlength=N + 1)
    seeds = np.argsort(-counts, kind="stable")[:3].tolist()
    best: list[int] = []
    for seed in seeds:
        got = _greedy_clique(labels, cands, N, seed)
        if len(got) > len(best):
            best = got
    return sorted(best)


def distinguishability_lower_bound(oracle: MembershipOracle, q: int, N: int, *,
                                   max_states: int = DEFAULT_MAX_STATES) -> int:
    _check_budget(q, N, oracle, max_states)
    return len(distinguishing_words(oracle, q, N))


def level_class_counts(oracle: MembershipOracle, q: int, N: int) -> list[int]:
    """Number of residual classes among the words of each exact length L = 0..N."""
    labels = residual_labels(oracle_word_accepts(oracle, q, N), q, N)
    off = level_offsets(q, N)
    return [int(np.unique(labels[N - L][off[L]:off[L + 1]]).size) for L in range(N + 1)]


# ------------------------------------------------------------- greedy merging

def greedy_minimize(dfa: LayeredDFA) -> LayeredDFA:
    """Merge trie states in BFS order into the first earlier compatible representative.

    State v at depth d joins representative u (depth <= d) when both agree on
    every suffix of length <= N - d. Following u's own transitions then keeps
    every word of length <= N correct, by induction on the read length.
    """
    q, N = dfa.q, dfa.N
    acc = dfa_word_accepts(dfa, N)
    labels = residual_labels(acc, q, N)
    levels, _ = trie_layout(q, N)
    total = word_count(q, N)
    rep_of = np.empty(total, dtype=np.int64)
    tables: list[dict[int, int]] = [dict() for _ in range(N + 1)]
    lab_lists = [lab.tolist() for lab in labels]
    lvl_list = levels.tolist()
    reps: list[int] = []
    for i in range(total):
        b = N - lvl_list[i]
        r = tables[b].get(lab_lists[b][i])
        if r is None:
            r = i
            reps.append(i)
            for bb in range(b + 1):
                tables[bb].setdefault(lab_lists[bb][i], i)
        rep_of[i] = r

    reps_arr = np.array(reps, dtype=np.int64)
    index = np.full(total, -1, dtype=np.int64)
    index[reps_arr] = np.arange(reps_arr.size)
    children = child_table(q, N)
    trans = np.empty((reps_arr.size, q), dtype=np.int64)
    inner = reps_arr < children.shape[0]
    trans[inner] = index[rep_of[children[reps_arr[inner]]]]
    trans[~inner] = np.flatnonzero(~inner)[:, None]
    merged = LayeredDFA(q, N, 0, trans, acc[reps_arr].astype(bool))
    result = merged.canonical()
    report = verify(result, acc, N)
    if not report.passed:
        raise AssertionError(f"greedy_minimize broke the contract: {report}")
    return result


# --------------------------------------------------------------- verification

@dataclass
class VerifyReport:
    passed: bool
    words_checked: int
    witness: str | None = None
    witness_value: int | None = None
    expected: bool | None = None
    got: bool | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify(dfa: LayeredDFA, oracle, N: int) -> VerifyReport:
    """Run every word of length <= N; ``oracle`` may also be a per-word accept array."""
    q = dfa.q
    if isinstance(oracle, MembershipOracle):
        if oracle.limit < q**N:
            raise ValueError(f"oracle limit {oracle.limit} < q**N = {q ** N}")
        expected = oracle_word_accepts(oracle, q, N)
    else:
        expected = np.asarray(oracle, dtype=bool)
    got = dfa_word_accepts(dfa, N)
    bad = np.flatnonzero(got != expected)
    total = word_count(q, N)
    if bad.size == 0:
        return VerifyReport(True, total)
    w = word_of_id(int(bad[0]), q, N)
    return VerifyReport(False, total, format_digits(w.digits, q), w.value,
                        bool(expected[bad[0]]), bool(got[bad[0]]))


# ----------------------------------------------------------------- exact size

@dataclass
class ExactGuard:
    max_states: int = EXACT_MAX_STATES
    max_words: int = EXACT_MAX_WORDS
    max_steps: int = 5_000_000


@dataclass
class ExactResult:
    status: str  # "exact", "not_attempted", "above_guard", "step_limit"
    size: int | None = None
    reason: str = ""
    witness: LayeredDFA | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"status": self.status, "size": self.size, "reason": self.reason}


class _StepLimit(Exception):
    pass


def _search(S, q, N, labels, levels, parent, digit, guard, counter):
    """Backtracking over transition tables; new states are numbered in first-use order."""
    total = len(parent)
    lab_lists = [lab.tolist() for lab in labels]
    lvl = levels.tolist()
    assign = [-1] * total
    delta = [[-1] * q for _ in range(S)]
    members: list[list[int]] = [[] for _ in range(S)]

    def compatible(i, s):
        Li = lvl[i]
        for j in members[s]:
            b = N - max(Li, lvl[j])
            if lab_lists[b][i] != lab_lists[b][j]:
                return False
        return True

    def place(i, s):
        assign[i] = s
        members[s].append(i)

    def unplace(i):
        members[assign[i]].pop()
        assign[i] = -1

    def go(i, used):
        counter[0] += 1
        if counter[0] > guard.max_steps:
            raise _StepLimit
        trail = []
        while i < total:
            s = assign[parent[i]]
            t = delta[s][digit[i]]
            if t < 0:
                break
            if not compatible(i, t):
                for j in reversed(trail):
                    unplace(j)
                return False
            place(i, t)
            trail.append(i)
            i += 1
        if i == total:
            return True
        s, d = assign[parent[i]], digit[i]
        for t in range(min(used + 1, S)):
            if compatible(i, t):
                delta[s][d] = t
                place(i, t)
                if go(i + 1, max(used, t + 1)):
                    return True
                unplace(i)
                delta[s][d] = -1
        for j in reversed(trail):
            unplace(j)
        return False

    place(0, 0)
    if not go(1, 1):
        return None
    trans = np.array([[t if t >= 0 else s for t in row] for s, row in enumerate(delta)],
                     dtype=np.int64)
    acc = np.zeros(S, dtype=bool)
    for s in range(S):
        if members[s]:
            acc[s] = bool(labels[0][members[s][0]])
    return LayeredDFA(q, N, 0, trans, acc)


def exact_minimal_size(oracle: MembershipOracle, q: int, N: int,
                       guard: ExactGuard | None = None) -> ExactResult:
    """Smallest number of states of any automaton correct at budget N.

    Refuses (status ``not_attempted``) outside the guard: more than 4096 words
    or a state ceiling above 12.
    """
    guard = guard or ExactGuard()
    total = word_count(q, N)
    if total > min(guard.max_words, EXACT_MAX_WORDS):
        return ExactResult("not_attempted", reason=f"{total} words exceed {guard.max_words}")
    if guard.max_states > EXACT_MAX_STATES:
        return ExactResult("not_attempted",
                           reason=f"max_states {guard.max_states} exceeds {EXACT_MAX_STATES}")
    if oracle.limit < q**N:
        raise ValueError(f"oracle limit {oracle.limit} < q**N = {q ** N}")
    acc = oracle_word_accepts(oracle, q, N)
    labels = residual_labels(acc, q, N)
    levels, value = trie_layout(q, N)
    off = level_offsets(q, N)
    parent = np.zeros(total, dtype=np.int64)
    digit = np.zeros(total, dtype=np.int64)
    for i in range(1, total):
        L, v = int(levels[i]), int(value[i])
        parent[i] = off[L - 1] + v % q ** (L - 1)
        digit[i] = v // q ** (L - 1)
    parent_l, digit_l = parent.tolist(), digit.tolist()
    counter = [0]
    for S in range(1, guard.max_states + 1):
        try:
            found = _search(S, q, N, labels, levels, parent_l, digit_l, guard, counter)
        except _StepLimit:
            return ExactResult("step_limit", reason=f"search exceeded {guard.max_steps} steps "
                                                    f"while testing {S} states")
        if found is not None:
            return ExactResult("exact", S, witness=found)
    return ExactResult("above_guard", reason=f"no automaton with <= {guard.max_states} states")


# ------------------------------------------------------------------- sandwich

@dataclass
class SizeSandwich:
    lower: int
    upper: int
    trie_size: int
    exact: int | None = None
    exact_status: str = "not_attempted"

    def consistent(self) -> bool:
        if self.exact is not None:
            return self.lower <= self.exact <= self.upper <= self.trie_size
        return self.lower <= self.upper <= self.trie_size

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def size_sandwich(oracle: MembershipOracle, q: int, N: int, *, exact: bool = False,
                  guard: ExactGuard | None = None) -> SizeSandwich:
    trie = build_trie(oracle, q, N)
    upper = greedy_minimize(trie).size
    lower = distinguishability_lower_bound(oracle, q, N)
    sw = SizeSandwich(lower, upper, trie.size)
    if exact:
        res = exact_minimal_size(oracle, q, N, guard)
        sw.exact, sw.exact_status = res.size, res.status
    return sw
