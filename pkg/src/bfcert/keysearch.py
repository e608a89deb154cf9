"""Rejection sampling of two-circulant parity-check matrices with certified failure rate.

Attempt ``k`` of a search draws its supports from
``SeedSequence(seed, spawn_key=(k,))``, so the accepted key depends only on
the policy and seed, whatever the number of workers.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import BoundReport, dfr_bound, optimize_threshold
from .codes import qc2_adjacency_rows
from .errors import ConfigError, DomainError, NoKeyFound

log = logging.getLogger(__name__)

OPTIMIZE = "optimize"


@dataclass(frozen=True)
class KeygenPolicy:
    """Parameters of a key search.

    ``threshold`` is a fixed integer ``b`` or ``"optimize"`` for the best
    scalar threshold in ``[1, v]``.
    """

    p: int
    v: int
    t: int
    target_log2_dfr: float
    max_attempts: int = 100
    seed: int = 0
    threshold: int | str = OPTIMIZE

    def __post_init__(self):
        if not 1 <= self.v <= self.p:
            raise ConfigError(f"need 1 <= v <= p, got v={self.v}, p={self.p}")
        if self.target_log2_dfr > 0:
            raise ConfigError("target log2 failure rate must not be positive")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be positive")
        if not 0 <= self.t <= 2 * self.p:
            raise ConfigError(f"t = {self.t} outside [0, {2 * self.p}]")
        if self.threshold != OPTIMIZE:
            b = self.threshold
            if not isinstance(b, (int, np.integer)) or not 1 <= b <= self.v:
                raise ConfigError(f"threshold must be 'optimize' or an integer in [1, {self.v}]")


@dataclass(frozen=True)
class KeyRecord:
    p: int
    v: int
    t: int
    S0: tuple[int, ...]
    S1: tuple[int, ...]
    b: int | None
    numerator: int | None
    log2_bound: float
    attempts: int
    seed: int
    accepted: bool

    def as_dict(self) -> dict:
        d = asdict(self)
        d["S0"], d["S1"] = list(self.S0), list(self.S1)
        # big integers travel as decimal strings, infinities as null
        d["numerator"] = None if self.numerator is None else str(self.numerator)
        d["log2_bound"] = None if math.isinf(self.log2_bound) else self.log2_bound
        return d

    @classmethod
    def from_dict(cls, d: dict) -> KeyRecord:
        d = dict(d)
        d["S0"], d["S1"] = tuple(d["S0"]), tuple(d["S1"])
        d["numerator"] = None if d["numerator"] is None else int(d["numerator"])
        d["log2_bound"] = -math.inf if d["log2_bound"] is None else d["log2_bound"]
        return cls(**d)


def sample_circulant_support(p: int, v: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform ``v``-subset of ``range(p)``, sorted."""
    if not 0 <= v <= p:
        raise DomainError(f"cannot pick {v} positions out of {p}")
    return tuple(sorted(rng.choice(p, size=v, replace=False).tolist()))


def certify_supports(p: int, t: int, S0, S1, threshold: int | str = OPTIMIZE) -> BoundReport | None:
    """Failure-rate bound of the matrix ``[H0 | H1]``; ``None`` if some column is repeated."""
    profiles = [(row, p) for row in qc2_adjacency_rows(p, S0, S1)]
    v = len(S0)
    # a repeated column shares all v rows with its copy; no bound can help
    if max(row.max_value for row, _ in profiles) >= v:
        return None
    if threshold == OPTIMIZE:
        _, rep = optimize_threshold(profiles, v, t)
    else:
        rep = dfr_bound(profiles, t, int(threshold))
    return BoundReport(rep.t, rep.thresholds, rep.numerator, rep.denominator, "qc")


def _attempt_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


def _attempt(policy: KeygenPolicy, k: int) -> KeyRecord:
    rng = _attempt_rng(policy.seed, k)
    S0 = sample_circulant_support(policy.p, policy.v, rng)
    S1 = sample_circulant_support(policy.p, policy.v, rng)
    rep = certify_supports(policy.p, policy.t, S0, S1, policy.threshold)
    if rep is None:
        return KeyRecord(policy.p, policy.v, policy.t, S0, S1, None, None, 0.0,
                         k + 1, policy.seed, False)
    accepted = rep.log2_bound < policy.target_log2_dfr
    return KeyRecord(policy.p, policy.v, policy.t, S0, S1, int(rep.thresholds), rep.numerator,
                     rep.log2_bound, k + 1, policy.seed, accepted)


def _attempts(policy: KeygenPolicy, indices, workers: int):
    """Attempt records in index order, computed by up to ``workers`` processes."""
    if workers <= 1:
        for k in indices:
            yield _attempt(policy, k)
        return
    with ProcessPoolExecutor(workers) as pool:
        it = iter(indices)
        while True:
            batch = list(itertools.islice(it, 2 * workers))
            if not batch:
                return
            yield from pool.map(_attempt, [policy] * len(batch), batch)


def rejection_sample_key(policy: KeygenPolicy, workers: int = 1, raise_on_failure: bool = False) -> KeyRecord:
    """First accepted key in attempt order.

    When every attempt is rejected, the last attempt's record comes back with
    ``accepted=False`` (or :class:`NoKeyFound` is raised if requested).
    """
    last = None
    for rec in _attempts(policy, range(policy.max_attempts), workers):
        log.debug("attempt %d: b=%s log2 bound %.2f", rec.attempts, rec.b, rec.log2_bound)
        if rec.accepted:
            return rec
        last = rec
    if raise_on_failure:
        raise NoKeyFound(f"no key below 2^{policy.target_log2_dfr} in {policy.max_attempts} attempts")
    return last


def acceptance_rate_experiment(policy: KeygenPolicy, n_keys: int, workers: int = 1) -> tuple[float, list[KeyRecord]]:
    """Certify ``n_keys`` independent draws; fraction accepted and every record."""
    if n_keys < 1:
        raise ConfigError("n_keys must be positive")
    records = list(_attempts(policy, range(n_keys), workers))
    return sum(r.accepted for r in records) / n_keys, records


def verify_key(record: KeyRecord) -> bool:
    """Recompute the bound from the supports and compare the exact numerator."""
    rep = certify_supports(record.p, record.t, record.S0, record.S1,
                           OPTIMIZE if record.b is None else record.b)
    if rep is None:
        return record.numerator is None
    return rep.numerator == record.numerator and int(rep.thresholds) == record.b
