"""Counting fixed-size index subsets whose entry-sum exceeds a target.

The vectors handled here are rows of the column adjacency matrix of a sparse
parity-check matrix: long, nonnegative, and with very few distinct values.
Counting works on the run-length histogram of the vector, so the cost depends
on the number of distinct values and on the subset size, never on the length.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GuardError

BRUTEFORCE_MAX_LENGTH = 25


@lru_cache(maxsize=1 << 16)
def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class CompressedVector:
    """Histogram of a nonnegative integer vector.

    ``levels`` holds ``(value, multiplicity)`` pairs with strictly increasing
    values; multiplicities add up to ``length``.
    """

    length: int
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prev = -1
        total = 0
        for y, lam in self.levels:
            if y <= prev:
                raise DomainError("levels must have strictly increasing values")
            if y < 0 or lam < 1:
                raise DomainError(f"bad level ({y}, {lam})")
            prev = y
            total += lam
        if total != self.length:
            raise DomainError(f"multiplicities sum to {total}, expected {self.length}")

    @property
    def omega(self) -> int:
        return len(self.levels)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(y for y, _ in self.levels)

    def total(self) -> int:
        return sum(y * lam for y, lam in self.levels)

    def top_sum(self, z: int) -> int:
        """Sum of the ``z`` largest entries."""
        acc = 0
        for y, lam in reversed(self.levels):
            if z <= 0:
                break
            take = min(z, lam)
            acc += take * y
            z -= take
        return acc

    def expand(self) -> list[int]:
        return [y for y, lam in self.levels for _ in range(lam)]

    def with_extra_zeros(self, k: int) -> CompressedVector:
        """Histogram of the vector padded with ``k`` more zero entries."""
        if k == 0:
            return self
        levels = list(self.levels)
        if levels and levels[0][0] == 0:
            levels[0] = (0, levels[0][1] + k)
        else:
            levels.insert(0, (0, k))
        return CompressedVector(self.length + k, tuple(levels))


def compress(a: Iterable[int] | np.ndarray) -> CompressedVector:
    arr = np.asarray(list(a) if not isinstance(a, np.ndarray) else a, dtype=np.int64)
    if arr.ndim != 1:
        raise DomainError("expected a one-dimensional vector")
    if arr.size and arr.min() < 0:
        raise DomainError("entries must be nonnegative")
    values, counts = np.unique(arr, return_counts=True)
    return CompressedVector(int(arr.size), tuple(zip(values.tolist(), counts.tolist())))


def from_histogram(length: int, nonzero: dict[int, int] | Sequence[tuple[int, int]]) -> CompressedVector:
    """Build a histogram from nonzero levels; the remaining entries are zeros."""
    items = sorted(dict(nonzero).items())
    zeros = length - sum(lam for _, lam in items)
    if zeros < 0:
        raise DomainError("nonzero multiplicities exceed the length")
    levels = ([(0, zeros)] if zeros else []) + [(y, lam) for y, lam in items if y != 0]
    return CompressedVector(length, tuple(levels))


class CountStats:
    """Tally of enumerated configurations, for checking the work bound."""

    def __init__(self):
        self.configurations = 0

    @staticmethod
    def work_bound(omega: int, m: int) -> float:
        return omega * float(m) ** (omega - 1) * math.e ** omega


def count_not_exceeding(cv: CompressedVector, m: int, alpha: int,
                        stats: CountStats | None = None) -> int:
    """Number of size-``m`` index subsets whose entries sum to at most ``alpha``.

    The subsets are grouped by the number ``j`` of distinct values they pick.
    For ``j = 1`` all ``m`` entries share one value. For ``j >= 2`` the distinct
    values ``y[i0] < ... < y[i_{j-1}]`` are enumerated (skipping tuples whose
    minimal sum already exceeds ``alpha``), and for each tuple the multiplicities
    ``m_1..m_{j-1} >= 1`` of the larger values are enumerated with caps that keep
    the remaining budget feasible; the smallest value takes the rest, at least 1.
    """
    if m < 0 or m > cv.length:
        raise DomainError(f"subset size {m} outside [0, {cv.length}]")
    if alpha < 0:
        return 0
    if m == 0:
        return 1
    ys = [y for y, _ in cv.levels]
    lams = [lam for _, lam in cv.levels]
    omega = len(ys)
    total = 0
    configurations = 0

    for u in range(omega):
        if ys[u] * m > alpha:
            break
        configurations += 1
        total += binom(lams[u], m)

    for j in range(2, min(m, omega) + 1):
        for i0 in range(omega - j + 1):
            budget = alpha - m * ys[i0]
            if budget < 0:
                break
            for rest in _value_tuples(ys, i0, j - 1, budget):
                gaps = [ys[k] - ys[i0] for k in rest]
                lam_rest = [lams[k] for k in rest]
                count, leaves = _multiplicity_sum(lams[i0], lam_rest, gaps, m, budget)
                total += count
                configurations += leaves

    if stats is not None:
        stats.configurations += configurations
    return total


def _value_tuples(ys: list[int], i0: int, k: int, budget: int):
    """Increasing index tuples above ``i0`` whose gap sum fits in ``budget``."""
    omega = len(ys)
    y0 = ys[i0]

    def rec(start: int, need: int, used: int, prefix: tuple[int, ...]):
        if need == 0:
            yield prefix
            return
        for idx in range(start, omega - need + 1):
            gap = ys[idx] - y0
            # every later pick has a gap at least this large
            if used + gap * need > budget:
                break
            yield from rec(idx + 1, need - 1, used + gap, prefix + (idx,))

    yield from rec(i0 + 1, k, 0, ())


def _multiplicity_sum(lam0: int, lams: list[int], gaps: list[int], m: int,
                      budget: int) -> tuple[int, int]:
    """Weighted count of multiplicity assignments for one tuple of values.

    Returns the sum over ``m_1..m_{k}`` of
    ``C(lam0, m - sum m_u) * prod C(lams[u], m_u)`` together with the number of
    assignments visited.
    """
    k = len(gaps)
    # suffix[q] = sum of gaps[q:], the least budget the values from q onward need
    suffix = [0] * (k + 1)
    for q in range(k - 1, -1, -1):
        suffix[q] = suffix[q + 1] + gaps[q]
    leaves = 0

    def rec(q: int, left: int, picked: int, weight: int) -> int:
        nonlocal leaves
        if q == k:
            leaves += 1
            return weight * binom(lam0, m - picked)
        cap = min(lams[q], (left - suffix[q + 1]) // gaps[q],
                  m - 1 - picked - (k - 1 - q))
        acc = 0
        for mq in range(1, cap + 1):
            acc += rec(q + 1, left - mq * gaps[q], picked + mq,
                       weight * binom(lams[q], mq))
        return acc

    return rec(0, budget, 0, 1), leaves


def count_exceeding(cv: CompressedVector | Sequence[int], m: int, alpha: int,
                    stats: CountStats | None = None) -> int:
    """Number of size-``m`` index subsets whose entries sum to more than ``alpha``."""
    if not isinstance(cv, CompressedVector):
        cv = compress(cv)
    if m > cv.length or m < 0:
        raise DomainError(f"subset size {m} outside [0, {cv.length}]")
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    # cheap exits: nothing can exceed, or everything does
    if cv.top_sum(m) <= alpha:
        return 0
    return binom(cv.length, m) - count_not_exceeding(cv, m, alpha, stats)


def count_exceeding_bruteforce(a: Sequence[int], m: int, alpha: int) -> int:
    """Literal enumeration of all size-``m`` subsets; test oracle only."""
    a = list(a)
    if len(a) > BRUTEFORCE_MAX_LENGTH:
        raise GuardError(f"brute force refuses vectors longer than {BRUTEFORCE_MAX_LENGTH}")
    if m < 0 or m > len(a):
        raise DomainError(f"subset size {m} outside [0, {len(a)}]")
    return sum(1 for c in itertools.combinations(a, m) if sum(c) > alpha)


def theta(l: int, x: int, m: int, alpha: int) -> int:
    """Subsets of size ``x`` of a weight-``m`` binary vector of length ``l`` with sum > ``alpha``."""
    if alpha >= m or x <= alpha:
        return 0
    return sum(binom(m, j) * binom(l - m, x - j) for j in range(alpha + 1, min(m, x) + 1))
