"""Coalitions as bit sets over players 1..n, and payment vectors over players.

Player i corresponds to bit i-1, so the grand coalition over n players has
mask 2**n - 1.  Files and tables key coalitions by this integer mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum, isfinite
from typing import Iterable, Iterator

from .errors import EmptyCoalitionError


@dataclass(frozen=True)
class Coalition:
    """Immutable subset of the players {1..n}."""

    mask: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"player count must be >= 1, got {self.n}")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask {self.mask} out of range for n={self.n}")

    @classmethod
    def of(cls, members: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for i in members:
            if not 1 <= i <= n:
                raise ValueError(f"player {i} outside 1..{n}")
            mask |= 1 << (i - 1)
        return cls(mask, n)

    @classmethod
    def singleton(cls, i: int, n: int) -> "Coalition":
        return cls.of([i], n)

    @classmethod
    def full(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    def members(self) -> Iterator[int]:
        """Yield members in ascending order."""
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length()
            m ^= low

    def without(self, i: int) -> "Coalition":
        if i not in self:
            raise ValueError(f"player {i} not in coalition")
        return Coalition(self.mask ^ (1 << (i - 1)), self.n)

    def complement(self) -> "Coalition":
        return Coalition(self.mask ^ ((1 << self.n) - 1), self.n)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.n) - 1

    def require_nonempty(self) -> "Coalition":
        if self.mask == 0:
            raise EmptyCoalitionError("operation undefined for the empty coalition")
        return self

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.n and (self.mask >> (i - 1)) & 1 == 1

    def __repr__(self) -> str:
        return f"Coalition({{{','.join(map(str, self.members()))}}}, n={self.n})"


@dataclass(frozen=True, eq=True)
class Allocation:
    """Payment vector, one entry per player (player i pays payments[i-1]).

    Entries must be finite.  Negative entries are rebates: some stability
    concepts pay a player to stay so the remaining groups are kept whole.
    Round-off negatives above -1e-9 are clamped to zero so that concepts
    which charge everyone serialize cleanly.
    """

    payments: tuple[float, ...]

    def __post_init__(self) -> None:
        cleaned = []
        for p in self.payments:
            if not isfinite(p):
                raise ValueError(f"payment must be finite, got {p}")
            cleaned.append(0.0 if -1e-9 < p <= 0.0 else float(p))
        object.__setattr__(self, "payments", tuple(cleaned))

    @property
    def n(self) -> int:
        return len(self.payments)

    def pay(self, i: int) -> float:
        if not 1 <= i <= self.n:
            raise ValueError(f"player {i} outside 1..{self.n}")
        return self.payments[i - 1]

    def of_coalition(self, s: Coalition) -> float:
        """Total charged to the members of s (exactly rounded sum)."""
        return fsum(self.payments[i - 1] for i in s.members())

    def total(self) -> float:
        return fsum(self.payments)

    def as_list(self) -> list[float]:
        return list(self.payments)
