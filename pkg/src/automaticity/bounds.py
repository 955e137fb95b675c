"""Numerical evaluators for the analytic side: sieve products, C_k, parameter choice.

All logarithms are natural. Constants the theory leaves unspecified (c, D1,
D2, C0 and the r_k model) live in :class:`BoundsConfig`. Large x may be passed
as Python ints; everything is computed through logarithms where a direct
power would overflow.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .membership import small_primes
from .residuals import ResidualCensus, phi

EE = math.exp(math.e)


class DomainError(ValueError):
    """Inputs fall outside the domain where an expression is defined."""


@dataclass
class BoundsConfig:
    c: float = 1.0
    D1: float = 1.0
    D2: float = 1.0
    C0: float = 1.0
    rho: float = 1.0
    product_tolerance: float = 1e-6
    prime_cutoff_cap: int = 10_000_000

    def __post_init__(self):
        for name in ("c", "D1", "D2", "rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.C0 < 1:
            raise ValueError("C0 must be >= 1")
        if not 0 < self.product_tolerance <= 1e-6:
            raise ValueError("product_tolerance must lie in (0, 1e-6]")
        self.prime_cutoff_cap = int(self.prime_cutoff_cap)

    def replace(self, **changes) -> BoundsConfig:
        return BoundsConfig(**{**asdict(self), **changes})


def load_config(path: str | Path | None = None, **overrides) -> BoundsConfig:
    """Read ``key = value`` lines; ``#`` starts a comment. Keyword overrides win."""
    values: dict = {}
    known = {f.name: f.type for f in fields(BoundsConfig)}
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = int(float(val)) if key == "prime_cutoff_cap" else float(val)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return BoundsConfig(**values)


@lru_cache(maxsize=8)
def _primes(bound: int) -> np.ndarray:
    return small_primes(bound)


def primes_upto(bound: int) -> np.ndarray:
    # round up so that nearby requests share one cached sieve
    size = 1 << max(10, math.ceil(math.log2(max(bound, 2))))
    p = _primes(size)
    return p[: np.searchsorted(p, bound, side="right")]


def ln(x) -> float:
    return math.log(x)


def r_k(k: int, config: BoundsConfig) -> float:
    return config.rho * k * k * math.log(k + 1)


# ------------------------------------------------------------- sieve products

def omega_profile(words, q: int, n: int, m: int, p: int) -> int:
    """Number of residue classes mod p hit by the words; 0 when p divides q."""
    words = [int(w) for w in words]
    if len(set(words)) != len(words):
        raise ValueError("words must be distinct")
    if len(words) < 2:
        raise ValueError("need at least two words")
    if any(not 0 <= w < q ** (n - m) for w in words):
        raise ValueError(f"words must lie in [0, q**(n-m))")
    if q % p == 0:
        return 0
    return len({w % p for w in words})


def _omega_vector(words: np.ndarray, q: int, P: np.ndarray) -> np.ndarray:
    res = np.sort(words[:, None] % P[None, :], axis=0)
    omega = 1 + np.count_nonzero(np.diff(res, axis=0), axis=0)
    omega[q % P == 0] = 0
    return omega


def _tail_cutoff(k: int, tol: float, start: float) -> int:
    # |log factor| <= k^2/p^2 for p > 2k, and sum_{p>Z} 1/p^2 < 1.5/(Z ln Z)
    need = 1.5 * k * k / tol
    Z = max(int(start) + 1, 2 * k + 1, 16)
    while Z * math.log(Z) < need:
        Z *= 2
    return Z


def sieve_log_product(words, q: int, n: int, m: int, cutoff: int) -> float:
    """log of prod_{p <= cutoff} (1 - omega(p)/p)(1 - 1/p)^(-k), exact omega below x/y."""
    w = np.asarray(sorted(int(v) for v in words), dtype=np.int64)
    k = w.size
    P = primes_upto(cutoff).astype(np.int64)
    ratio = q ** (n - m)
    exact_upto = max(ratio, q)
    Pe, Pt = P[P <= exact_upto], P[P > exact_upto]
    om = _omega_vector(w, q, Pe)
    pe = Pe.astype(float)
    head = 1.0 - om / pe
    if np.any(head <= 0):
        return -math.inf
    terms = [np.log(head) - k * np.log1p(-1.0 / pe)]
    pt = Pt.astype(float)
    terms.append(np.log1p(-k / pt) - k * np.log1p(-1.0 / pt))
    return math.fsum(np.concatenate(terms).tolist())


@dataclass
class Lemma2Result:
    value: float
    product: float
    k: int
    r_k: float
    log_y: float
    vacuous: bool
    hypothesis_ok: bool  # y > e^(2 r_k)
    cutoff: int
    tail_truncated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def lemma2_rhs(words, q: int, n: int, m: int, config: BoundsConfig | None = None,
               tolerance: float | None = None) -> Lemma2Result:
    """3 * 2^k k! * prod_p (1 - w(p)/p)(1 - 1/p)^(-k) * y/ln^k y * (1 - r_k/ln y)^(-1)."""
    config = config or BoundsConfig()
    tol = tolerance or config.product_tolerance
    words = list(words)
    omega_profile(words, q, n, m, 2)  # argument validation
    k = len(words)
    Z = _tail_cutoff(k, tol, q ** (n - m))
    truncated = Z > config.prime_cutoff_cap
    Z = min(Z, config.prime_cutoff_cap)
    log_prod = sieve_log_product(words, q, n, m, Z)
    product = math.exp(log_prod)
    log_y = m * math.log(q)
    rk = r_k(k, config)
    vacuous = 1 - rk / log_y <= 0
    if vacuous or product == 0:
        value = math.inf if vacuous else 0.0
    else:
        log_val = (math.log(3) + k * math.log(2) + math.lgamma(k + 1) + log_prod
                   + log_y - k * math.log(log_y) - math.log(1 - rk / log_y))
        value = math.exp(log_val)
    return Lemma2Result(value, product, k, rk, log_y, vacuous, log_y > 2 * rk, Z, truncated)


def ck_bound(k: int, q: int, x, y, config: BoundsConfig | None = None, *,
             check_domain: bool = True) -> float:
    """D1 (q/phi(q)) (D2 k ln k)^k (ln ln(x/y))^(k-1)."""
    config = config or BoundsConfig()
    if k < 2:
        raise ValueError("ck_bound is defined for k >= 2")
    log_ratio = ln(x) - ln(y)
    if check_domain:
        if not log_ratio > math.log(max(k, EE)):
            raise DomainError(f"need x/y > max(k, e^e); ln(x/y) = {log_ratio:.6g}")
        if not log_ratio > q:
            raise DomainError(f"need ln(x/y) > q = {q}; ln(x/y) = {log_ratio:.6g}")
    if log_ratio <= 1:
        raise DomainError("ln ln(x/y) undefined or negative")
    return (config.D1 * q / phi(q) * (config.D2 * k * math.log(k)) ** k
            * math.log(log_ratio) ** (k - 1))


def mertens_product_exact(z: int) -> Fraction:
    """prod_{p <= z} (1 - 1/p)^(-1) as an exact fraction."""
    out = Fraction(1)
    for p in primes_upto(int(z)).tolist():
        out *= Fraction(p, p - 1)
    return out


def mertens_product(z) -> float:
    if z < 2:
        raise DomainError("mertens_product needs z >= 2")
    z = int(math.floor(z))
    if z <= 10_000:
        return float(mertens_product_exact(z))
    p = primes_upto(z).astype(float)
    return math.exp(-math.fsum(np.log1p(-1.0 / p).tolist()))


# ------------------------------------------------------- parameter selection

def E(k: int, config: BoundsConfig) -> float:
    return config.D1 * (config.C0 * config.D2 * k * math.log(k + 1)) ** k


def log_E(k: int, config: BoundsConfig) -> float:
    return math.log(config.D1) + k * math.log(config.C0 * config.D2 * k * math.log(k + 1))


@dataclass
class BoundsReport:
    name: str
    inputs: dict
    values: dict
    conditions: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def all_conditions_hold(self) -> bool:
        return all(self.conditions.values())

    def to_dict(self) -> dict:
        return {"evaluator": self.name, "log_base": "e", "inputs": self.inputs,
                "values": self.values, "conditions": self.conditions, "notes": self.notes}


def select_parameters(x, q: int, config: BoundsConfig | None = None) -> BoundsReport:
    """K = ceil(ln ln x) (>= 2), y0 from ln^K y0 = 4 E(K) ln x (ln ln x)^(K-1), y = q^m >= y0."""
    config = config or BoundsConfig()
    lx = ln(x)
    if lx <= math.e:
        raise DomainError("select_parameters needs x >= e^e")
    llx = math.log(lx)
    K = max(2, math.ceil(llx))
    # ln of the right side of the defining equation
    log_rhs = math.log(4) + log_E(K, config) + math.log(lx) + (K - 1) * math.log(llx)
    log_y0 = math.exp(log_rhs / K)
    m = math.ceil(log_y0 / math.log(q))
    while m * math.log(q) < log_y0:
        m += 1
    log_y = m * math.log(q)
    rK = r_k(K, config)
    log_ratio = lx - log_y
    conditions = {
        "y > exp(2 r_K)": log_y > 2 * rK,
        "y > ln x": log_y > math.log(lx),
        "x/y > max(K, e^e)": log_ratio > math.log(max(K, EE)),
        "ln(x/y) > q": log_ratio > q,
    }
    values = {
        "ln_x": lx, "K": K, "E": [E(k, config) for k in range(1, K + 1)],
        "ln_y0": log_y0, "m": m, "ln_y": log_y,
        "y": q**m if log_y < 700 else None,
        "r_K": rK,
        "y_ge_y0": log_y >= log_y0,
        "q_y0_gt_y": log_y0 + math.log(q) > log_y,
        "defining_inequality": K * math.log(log_y) >= log_rhs - 1e-12 * abs(log_rhs),
    }
    return BoundsReport("select", {"x": _jsonable(x), "q": q, "config": asdict(config)},
                        values, conditions)


def theorem1_lower(x, config: BoundsConfig | None = None, *, c: float | None = None) -> float:
    """x exp(-c (ln ln x)^2 ln ln ln x)."""
    c = c if c is not None else (config or BoundsConfig()).c
    return math.exp(theorem1_log(x, c))


def theorem1_log(x, c: float) -> float:
    lx = ln(x)
    if lx <= 1 or math.log(lx) <= 1:
        raise DomainError("theorem1_lower needs x > e^e")
    llx = math.log(lx)
    return lx - c * llx * llx * math.log(llx)


def lasteq_lower(x, q: int, config: BoundsConfig | None = None) -> BoundsReport:
    """q/(E0 K) ((ln ln x)/ln x)^(1-1/K) x exp(-(E(K) ln x/ln ln x)^(1/K) ln ln x), E0 = 4 D1."""
    config = config or BoundsConfig()
    sel = select_parameters(x, q, config)
    K = sel.values["K"]
    lx = ln(x)
    llx = math.log(lx)
    E0 = 4 * config.D1
    inner = math.exp((log_E(K, config) + math.log(lx) - math.log(llx)) / K)
    log_value = (math.log(q) - math.log(E0 * K) + (1 - 1 / K) * (math.log(llx) - math.log(lx))
                 + lx - inner * llx)
    value = math.exp(log_value) if log_value < 709 else math.inf
    report = BoundsReport(
        "lasteq", {"x": _jsonable(x), "q": q, "config": asdict(config)},
        {"value": value, "ln_value": log_value, "K": K, "E0": E0,
         "value_le_x": log_value <= lx, **{k: sel.values[k] for k in ("m", "ln_y")}},
        sel.conditions,
    )
    if not sel.all_conditions_hold:
        report.notes.append("formal evaluation only: some hypotheses fail at this x")
    return report


def eq1_check(cen: ResidualCensus, config: BoundsConfig | None = None) -> BoundsReport:
    """Evaluate both sides of the census inequality with C_1 = 2q/phi(q) and C_k from ck_bound."""
    config = config or BoundsConfig()
    if cen.word_filter != "coprime" or cen.mode != "paper":
        raise ValueError("eq1_check needs a paper-mode census over coprime words")
    q, n, m, K = cen.q, cen.n, cen.m, cen.K
    x, y = q**n, q**m
    lx, ly = n * math.log(q), m * math.log(q)
    domain_notes = []
    C = {1: 2 * q / phi(q)}
    for k in range(2, K + 1):
        try:
            C[k] = ck_bound(k, q, x, y, config)
        except DomainError as exc:
            domain_notes.append(f"C_{k}: {exc}")
            C[k] = ck_bound(k, q, x, y, config, check_domain=False)
    Nk = cen.N_k
    census_part = math.fsum(C[k] * Nk[k - 1] * y / ly**k for k in range(1, K))
    tail = C[K] * x / ly**K
    lhs = x / (2 * lx)
    rhs = census_part + tail
    line1 = census_part + C[K] * cen.R_K * y / ly**K
    line2 = cen.N * math.fsum(C[k] * y / ly**k for k in range(1, K)) + tail
    report = BoundsReport(
        "eq1", {"q": q, "n": n, "m": m, "K": K, "N_k": Nk, "R_K": cen.R_K, "N": cen.N,
                "config": asdict(config)},
        {"lhs": lhs, "rhs": rhs, "census_part": census_part, "tail": tail,
         "rhs_with_R_K": line1, "rhs_with_N": line2, "C": [C[k] for k in range(1, K + 1)]},
        {"lhs <= rhs": lhs <= rhs},
        domain_notes,
    )
    return report


def _jsonable(x):
    if isinstance(x, int) and abs(x) >= 2**53:
        return str(x)
    return x
