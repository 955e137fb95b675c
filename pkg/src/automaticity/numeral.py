"""Base-q digit words, read least-significant digit first.

A word ``w = d0 d1 ... d(L-1)`` denotes ``sum(d_i * q**i)``. Reading a word
``w`` of length ``L`` and then the digits of ``a`` yields ``a * q**L + value(w)``,
which is why prefixes of a word fix the *low-order* part of the integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

UINT64_LIMIT = 1 << 64


class RangeError(ValueError):
    """A value does not fit the requested word length or digit range."""


def check_base(q: int) -> None:
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"base must be an integer >= 2, got {q!r}")


def check_u64(q: int, length: int) -> None:
    if q**length > UINT64_LIMIT:
        raise RangeError(f"{q}**{length} exceeds the 64-bit unsigned range")


@dataclass(frozen=True)
class DigitWord:
    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        check_base(self.base)
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if not 0 <= d < self.base:
                raise RangeError(f"digit {d} outside [0, {self.base})")
        check_u64(self.base, len(self.digits))

    @property
    def length(self) -> int:
        return len(self.digits)

    @property
    def value(self) -> int:
        return value_of(self)

    def __len__(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return format_digits(self.digits, self.base)


def to_word(value: int, q: int, length: int) -> DigitWord:
    """Return the ``length``-digit LSB-first representation of ``value``."""
    check_base(q)
    if value < 0 or value >= q**length:
        raise RangeError(f"{value} does not fit in {length} base-{q} digits")
    digits = []
    for _ in range(length):
        value, d = divmod(value, q)
        digits.append(d)
    return DigitWord(q, tuple(digits))


def value_of(word: DigitWord) -> int:
    v = 0
    for d in reversed(word.digits):
        v = v * word.base + d
    return v


@dataclass(frozen=True)
class SplitNumber:
    """The integer ``high * q**(n-m) + value(low)`` with ``low`` of length n-m."""

    low: DigitWord
    high: int
    n: int
    m: int

    def __post_init__(self):
        if not 0 < self.m < self.n:
            raise ValueError(f"need 0 < m < n, got m={self.m}, n={self.n}")
        if self.low.length != self.n - self.m:
            raise ValueError(
                f"low word has length {self.low.length}, expected {self.n - self.m}"
            )
        check_u64(self.low.base, self.n)
        if not 0 <= self.high < self.low.base**self.m:
            raise RangeError(f"high part {self.high} outside [0, {self.low.base}**{self.m})")

    @property
    def base(self) -> int:
        return self.low.base


def compose(split: SplitNumber) -> int:
    return split.high * split.base ** (split.n - split.m) + value_of(split.low)


def format_digits(digits: Sequence[int], q: int) -> str:
    """Serialize LSB-first digits: a plain digit string for q <= 10, else a comma list."""
    if q <= 10:
        return "".join(str(d) for d in digits)
    return ",".join(str(d) for d in digits)


def parse_digits(text: str, q: int) -> DigitWord:
    if q <= 10:
        digits = [int(c) for c in text]
    else:
        digits = [int(c) for c in text.split(",")] if text else []
    return DigitWord(q, tuple(digits))


def word_count(q: int, max_length: int) -> int:
    """Number of words of length <= max_length, i.e. (q**(L+1) - 1) / (q - 1)."""
    return (q ** (max_length + 1) - 1) // (q - 1)
