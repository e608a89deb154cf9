"""Guaranteed correction radii and certified failure-rate bounds for one BF iteration.

All counts are exact integers. A bound is carried as a numerator over
``C(n, t)``; the base-2 logarithm is only computed for presentation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .codes import QC2, GammaRow, ParityCheckMatrix, distinct_row_profiles, qc2_adjacency_rows
from .errors import DomainError, GuardError
from .subset import binom, count_exceeding, theta

Profiles = Sequence[tuple[GammaRow, int]]

DELTA_Z_MAX_N = 64
DELTA_Z_MAX_Z = 4
BSC_TAIL = 2.0 ** -128


def log2_int(x: int) -> float:
    """``log2`` of a positive integer of any size, accurate to double precision."""
    if x <= 0:
        raise ValueError("log2 of a nonpositive integer")
    shift = max(x.bit_length() - 60, 0)
    return shift + math.log2(x >> shift)


@dataclass(frozen=True)
class BoundReport:
    t: int
    thresholds: int | tuple[int, ...]
    numerator: int
    denominator: int
    method: str

    @property
    def bound(self) -> Fraction:
        if self.denominator == 0:
            return Fraction(0)
        return min(Fraction(1), Fraction(self.numerator, self.denominator))

    @property
    def log2_bound(self) -> float:
        if self.numerator == 0:
            return -math.inf
        return min(0.0, log2_int(self.numerator) - log2_int(self.denominator))

    @property
    def numerator_bits(self) -> int:
        return self.numerator.bit_length()

    def as_row(self) -> dict:
        b = self.thresholds if isinstance(self.thresholds, int) else "vector"
        return {"t": self.t, "b": b, "numerator_bits": self.numerator_bits,
                "log2_bound": self.log2_bound, "method": self.method}


@dataclass
class CapabilityReport:
    delta: int
    t_majority: int | None
    t_mu: int
    mu_values: list[int]
    threshold_range: dict[int, tuple[int, int]]
    v_star: int
    notes: list[str] = field(default_factory=list)


# column union / intersection -------------------------------------------------

def mu_z(profiles: Profiles, z: int) -> int:
    """Largest sum of ``z`` entries taken from one punctured adjacency row."""
    if z <= 0:
        return 0
    return max(row.punctured().top_sum(z) for row, _ in profiles)


def max_col_intersection(H_or_profiles) -> int:
    profiles = _profiles(H_or_profiles)
    return max(row.max_value for row, _ in profiles)


def delta_z(H: ParityCheckMatrix, z: int) -> int:
    """Largest weight of an XOR of ``z`` other columns restricted to the rows of one column.

    Exhaustive, so restricted to ``n <= 64`` and ``z <= 4``.
    """
    if H.n > DELTA_Z_MAX_N or z > DELTA_Z_MAX_Z:
        raise GuardError(f"delta_z enumerates column subsets; needs n <= {DELTA_Z_MAX_N}, z <= {DELTA_Z_MAX_Z}")
    if z <= 0:
        return 0
    D = H.dense()
    best = 0
    for i in range(H.n):
        rows = list(H.col_supports[i])
        sub = D[rows]
        masks = []
        zero_cols = 0
        for j in range(H.n):
            if j == i:
                continue
            mask = int(sum(int(x) << k for k, x in enumerate(sub[:, j])))
            if mask:
                masks.append(mask)
            else:
                zero_cols += 1
        # padding with all-zero restricted columns leaves the XOR unchanged
        for k in range(max(0, z - zero_cols), min(z, len(masks)) + 1):
            for combo in itertools.combinations(masks, k):
                acc = 0
                for m in combo:
                    acc ^= m
                best = max(best, acc.bit_count())
    return best


# correction radii ----------------------------------------------------------------

def t_majority(v_star: int, delta: int, cap: int | None = None) -> int | None:
    """Majority-logic radius ``floor(v / (2 delta))``; ``cap`` (or None) when columns are disjoint."""
    if delta <= 0:
        return cap
    return v_star // (2 * delta)


def t_mu(profiles: Profiles, v_star: int | None = None, cap: int | None = None):
    """Largest ``t`` with ``v* > mu(t) + mu(t-1)`` and the admissible thresholds for each ``t <= t_M``.

    The intervals are ``[mu(t) + 1, v* - mu(t-1)]``; per-bit thresholds may use
    the bit's own weight in place of ``v*``.
    """
    if v_star is None:
        v_star = min(row.weight for row, _ in profiles)
    length = max(row.length for row, _ in profiles)
    cap = length + 1 if cap is None else cap
    mus = [0]
    ranges = {}
    t = 0
    while t < cap:
        nxt = mu_z(profiles, t + 1)
        if not v_star > nxt + mus[t]:
            break
        mus.append(nxt)
        t += 1
        ranges[t] = (mus[t] + 1, v_star - mus[t - 1])
    return t, ranges


def theorem2_radius(H: ParityCheckMatrix, z_max: int = DELTA_Z_MAX_Z) -> int:
    """Largest ``t <= z_max`` such that ``v* > delta(t) + delta(t-1)`` holds for every ``1..t``."""
    v_star = H.v_star
    prev = 0
    t = 0
    for z in range(1, z_max + 1):
        cur = delta_z(H, z)
        if not v_star > cur + prev:
            break
        t = z
        prev = cur
    return t


def capability(H: ParityCheckMatrix, profiles: Profiles | None = None) -> CapabilityReport:
    profiles = profiles if profiles is not None else distinct_row_profiles(H)
    v_star = H.v_star
    delta = max_col_intersection(profiles)
    tm, ranges = t_mu(profiles, v_star, cap=H.n)
    mus = [mu_z(profiles, z) for z in range(0, tm + 2)]
    notes = []
    if delta == 0:
        notes.append("columns are pairwise disjoint; radius capped at n")
    if delta >= v_star:
        notes.append("some column is covered by another one; no radius can be certified")
    return CapabilityReport(delta, t_majority(v_star, delta, H.n), tm, mus, ranges, v_star, notes)


def chilappagari_bound(v: int, g: int) -> int:
    """Largest weight strictly below the expander-style guarantee for girth ``g``.

    For ``g = 4k + 2`` the guarantee is ``1/2 + v/4 * S`` and for ``g = 4k`` it is
    ``S``, with ``S = sum_{i<k} ((v - 2) / 2) ** i``.
    """
    if g not in (4, 6, 8, 10):
        raise DomainError("girth must be 4, 6, 8 or 10")
    k = g // 4
    S = sum(Fraction(v - 2, 2) ** i for i in range(k))
    limit = Fraction(1, 2) + Fraction(v, 4) * S if g % 4 == 2 else S
    return math.ceil(limit) - 1


# failure-rate bounds ------------------------------------------------------------

def _profiles(H_or_profiles) -> Profiles:
    if isinstance(H_or_profiles, ParityCheckMatrix):
        return distinct_row_profiles(H_or_profiles)
    return H_or_profiles


def _threshold_for(thresholds, row: GammaRow) -> int:
    if isinstance(thresholds, (int, np.integer)):
        return int(thresholds)
    return int(thresholds[row.owner_col])


def _bit_terms(row: GammaRow, t: int, b: int, cache: dict | None = None) -> int:
    """Upper bounds on the wrong-decision sets of one bit: missed flip plus false flip."""
    key = (row.signature(), t, b)
    if cache is not None and key in cache:
        return cache[key]
    gamma = row.punctured()
    v = row.weight
    total = 0
    if 1 <= t <= gamma.length + 1:
        total += count_exceeding(gamma, t - 1, v - b)
    if t <= gamma.length:
        total += count_exceeding(gamma, t, b - 1)
    if cache is not None:
        cache[key] = total
    return total


def dfr_bound(profiles: Profiles, t: int, thresholds, method: str = "th4",
              cache: dict | None = None) -> BoundReport:
    """Union bound over bits of the error sets leading to a wrong decision.

    ``thresholds`` is one integer or a per-bit sequence indexed by column. A
    row standing for several columns uses the threshold of its owner column.
    ``cache`` may be shared across calls to reuse counts for identical rows.
    """
    profiles = _profiles(profiles)
    n = profiles[0][0].length + 1
    if not 0 <= t <= n:
        raise DomainError(f"t = {t} outside [0, {n}]")
    cache = {} if cache is None else cache
    numerator = 0
    for row, mult in profiles:
        b = _threshold_for(thresholds, row)
        if not 1 <= b <= row.weight:
            raise DomainError(f"threshold {b} outside [1, {row.weight}] for column {row.owner_col}")
        numerator += mult * _bit_terms(row, t, b, cache)
    b_rep = thresholds if isinstance(thresholds, (int, np.integer)) else tuple(thresholds)
    return BoundReport(t, int(b_rep) if isinstance(b_rep, (int, np.integer)) else b_rep,
                       numerator, binom(n, t), method)


def dfr_bound_regular_odd(profiles: Profiles, v: int, t: int) -> BoundReport:
    """Regular odd-``v`` form with ``b = (v + 1) / 2``, counting on full adjacency rows."""
    profiles = _profiles(profiles)
    if v % 2 == 0:
        raise DomainError("the single-count form needs odd column weight")
    if any(row.weight != v for row, _ in profiles):
        raise DomainError("the single-count form needs a column-regular matrix")
    n = profiles[0][0].length + 1
    if not 0 <= t <= n:
        raise DomainError(f"t = {t} outside [0, {n}]")
    numerator = sum(mult * count_exceeding(row.full(), t, (v - 1) // 2) for row, mult in profiles)
    return BoundReport(t, (v + 1) // 2, numerator, binom(n, t), "th4bis")


def dfr_bound_girth6_regular(n: int, v: int, w: int, t: int) -> BoundReport:
    """Closed form for ``(v, w)``-regular matrices without 4-cycles, odd ``v``, ``b = (v + 1) / 2``."""
    if v % 2 == 0 or v < 1 or w < 2:
        raise DomainError("needs odd v >= 1 and w >= 2")
    if v * (w - 1) > n - 1:
        raise DomainError("v(w-1) exceeds n-1: not a valid girth-6 regular matrix")
    half = (v - 1) // 2
    numerator = 0 if t <= half else n * theta(n, t, v * (w - 1), half)
    return BoundReport(t, (v + 1) // 2, numerator, binom(n, t), "th5")


def dfr_bound_qc(H: ParityCheckMatrix | QC2, t: int, b: int) -> BoundReport:
    """Two-circulant shortcut: rows ``0`` and ``p`` stand for their whole block.

    Accepts the matrix or just its ``QC2`` description; the two rows come from
    support differences, so the matrix is not needed.
    """
    s = H.structure if isinstance(H, ParityCheckMatrix) else H
    if not isinstance(s, QC2):
        raise DomainError("the quasi-cyclic shortcut needs a two-circulant matrix")
    p, v = s.p, s.v
    if not 1 <= b <= v:
        raise DomainError(f"threshold {b} outside [1, {v}]")
    n_tot = 0
    for row in qc2_adjacency_rows(p, *s.supports):
        gamma = row.punctured()
        if t >= 1:
            n_tot += count_exceeding(gamma, t - 1, v - b)
        if t <= gamma.length:
            n_tot += count_exceeding(gamma, t, b - 1)
    return BoundReport(t, b, p * n_tot, binom(2 * p, t), "qc")


def optimize_threshold(profiles: Profiles, v: int, t: int, cache: dict | None = None):
    """Scalar threshold in ``[1, v]`` minimising the bound; ties go to the smaller one."""
    profiles = _profiles(profiles)
    cache = {} if cache is None else cache
    best = None
    for b in range(1, v + 1):
        rep = dfr_bound(profiles, t, b, cache=cache)
        if best is None or rep.numerator < best.numerator:
            best = rep
    return best.thresholds, best


def bsc_failure_bound(H_or_profiles, rho: float, thresholds, tail: float = BSC_TAIL) -> float:
    """Failure probability over a BSC: per-weight bounds weighted by the binomial law.

    Weights whose combined probability is below ``tail`` on either side are not
    evaluated; their mass is added instead, so the result stays an upper bound.
    """
    if not 0.0 <= rho <= 1.0:
        raise DomainError("crossover probability must lie in [0, 1]")
    profiles = _profiles(H_or_profiles)
    n = profiles[0][0].length + 1
    if rho == 0.0:
        return float(dfr_bound(profiles, 0, thresholds).bound)
    if rho == 1.0:
        return float(dfr_bound(profiles, n, thresholds).bound)
    dist = stats.binom(n, rho)
    lo = int(dist.ppf(tail / 2))
    while lo > 0 and dist.cdf(lo - 1) > tail / 2:
        lo -= 1
    hi = int(dist.isf(tail / 2))
    while hi < n and dist.sf(hi) > tail / 2:
        hi += 1
    outside = (dist.cdf(lo - 1) if lo > 0 else 0.0) + (dist.sf(hi) if hi < n else 0.0)
    cache: dict = {}
    total = 0.0
    for l in range(lo, hi + 1):
        bound = dfr_bound(profiles, l, thresholds, cache=cache).bound
        if bound:
            total += float(bound) * dist.pmf(l)
    return min(1.0, total + outside)
