"""Seeded Monte Carlo estimation of the single-iteration failure rate.

Trials are grouped in fixed-size blocks; block ``k`` draws from its own
stream ``SeedSequence(seed, spawn_key=(t, k))``. Results therefore depend on
the seed and the plan, not on how many workers process the blocks.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .codes import ParityCheckMatrix
from .decoder import BfConfig, batch_failures
from .errors import ConfigError, DomainError, GuardError
from .subset import binom

log = logging.getLogger(__name__)

BLOCK_TRIALS = 2048
EXHAUSTIVE_LIMIT = 10 ** 7
_CHUNK_NNZ = 4_000_000


def default_workers() -> int:
    return max(1, int(os.environ.get("BF_CERT_WORKERS", "1")))


@dataclass(frozen=True)
class TrialPlan:
    t: int
    stop_failures: int = 100
    max_trials: int = 10 ** 9
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.stop_failures < 1:
            raise ConfigError("stop_failures must be at least 1")
        if self.max_trials < self.stop_failures:
            raise ConfigError("max_trials must be at least stop_failures")
        if self.t < 0:
            raise ConfigError("t must be nonnegative")


@dataclass(frozen=True)
class DfrEstimate:
    t: int
    trials: int
    failures: int
    seed: int
    exhausted: bool = False

    @property
    def p_hat(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def std_err(self) -> float:
        if not self.trials:
            return 0.0
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(dfr=self.p_hat, stderr=self.std_err)
        return d


def sample_support(n: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ``t``-subset of ``range(n)`` by a partial Fisher-Yates shuffle."""
    if not 0 <= t <= n:
        raise DomainError(f"weight {t} outside [0, {n}]")
    pool = np.arange(n)
    for k in range(t):
        j = int(rng.integers(k, n))
        pool[k], pool[j] = pool[j], pool[k]
    return np.sort(pool[:t])


def sample_error(n: int, t: int, rng: np.random.Generator) -> np.ndarray:
    e = np.zeros(n, dtype=np.uint8)
    e[sample_support(n, t, rng)] = 1
    return e


def sample_supports(n: int, t: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform ``t``-subsets, one per row."""
    if not 0 <= t <= n:
        raise DomainError(f"weight {t} outside [0, {n}]")
    if t == 0:
        return np.zeros((count, 0), dtype=np.int64)
    if t * (t - 1) > n:
        # random keys: the t smallest of n iid uniforms form a uniform t-subset
        keys = rng.random((count, n))
        return np.sort(np.argpartition(keys, t - 1, axis=1)[:, :t], axis=1)
    # iid draws conditioned on being distinct are uniform over t-subsets
    out = np.sort(rng.integers(0, n, size=(count, t)), axis=1)
    bad = np.flatnonzero((np.diff(out, axis=1) == 0).any(axis=1))
    while bad.size:
        redo = np.sort(rng.integers(0, n, size=(bad.size, t)), axis=1)
        out[bad] = redo
        bad = bad[(np.diff(redo, axis=1) == 0).any(axis=1)]
    return out


def _block_rng(seed: int, t: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t, block)))


def _run_block(H: ParityCheckMatrix, b: np.ndarray, t: int, seed: int, block: int,
               size: int) -> np.ndarray:
    """Failure flags of the trials in one block, in trial order."""
    supports = sample_supports(H.n, t, size, _block_rng(seed, t, block))
    # keep the sparse counter matrix bounded in memory
    per_trial = max(1, t * H.column_weights.max() * H.w_max)
    step = max(1, _CHUNK_NNZ // per_trial)
    flags = [batch_failures(H, supports[k:k + step], b) for k in range(0, size, step)]
    return np.concatenate(flags) if flags else np.zeros(0, dtype=bool)


_worker_state: dict = {}


def _init_worker(H, b):
    _worker_state["H"] = H
    _worker_state["b"] = b


def _worker_block(args):
    t, seed, block, size = args
    return _run_block(_worker_state["H"], _worker_state["b"], t, seed, block, size)


def estimate_dfr(H: ParityCheckMatrix, plan: TrialPlan, thresholds) -> DfrEstimate:
    """Decode random weight-``t`` errors once each until enough failures are seen.

    Stops exactly at the trial producing the ``stop_failures``-th failure, or
    after ``max_trials``.
    """
    cfg = thresholds if isinstance(thresholds, BfConfig) else BfConfig(thresholds)
    b = cfg.vector(H)
    if plan.t > H.n:
        raise DomainError(f"weight {plan.t} exceeds n = {H.n}")
    n_blocks = -(-plan.max_trials // BLOCK_TRIALS)

    def sizes(start):
        for k in itertools.count(start):
            if k >= n_blocks:
                return
            yield k, min(BLOCK_TRIALS, plan.max_trials - k * BLOCK_TRIALS)

    trials = failures = 0
    workers = max(1, plan.workers)

    def consume(flags) -> bool:
        nonlocal trials, failures
        need = plan.stop_failures - failures
        hits = np.flatnonzero(flags)
        if hits.size >= need:
            trials += int(hits[need - 1]) + 1
            failures += need
            return True
        trials += flags.size
        failures += hits.size
        return False

    if workers == 1:
        for k, size in sizes(0):
            if consume(_run_block(H, b, plan.t, plan.seed, k, size)):
                return DfrEstimate(plan.t, trials, failures, plan.seed)
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(H, b)) as pool:
            it = sizes(0)
            while True:
                batch = list(itertools.islice(it, workers * 2))
                if not batch:
                    break
                args = [(plan.t, plan.seed, k, size) for k, size in batch]
                for flags in pool.map(_worker_block, args):
                    if consume(flags):
                        return DfrEstimate(plan.t, trials, failures, plan.seed)
    return DfrEstimate(plan.t, trials, failures, plan.seed, exhausted=True)


def exhaustive_dfr(H: ParityCheckMatrix, t: int, thresholds, limit: int = EXHAUSTIVE_LIMIT) -> tuple[int, int]:
    """Exact count of weight-``t`` errors decoded wrongly, with the total ``C(n, t)``."""
    total = binom(H.n, t)
    if total > limit:
        raise GuardError(f"C({H.n}, {t}) = {total} exceeds the enumeration limit {limit}")
    cfg = thresholds if isinstance(thresholds, BfConfig) else BfConfig(thresholds)
    b = cfg.vector(H)
    if t == 0:
        return 0, 1
    failures = 0
    combos = itertools.combinations(range(H.n), t)
    while True:
        chunk = np.array(list(itertools.islice(combos, 50_000)), dtype=np.int64)
        if chunk.size == 0:
            break
        failures += int(batch_failures(H, chunk.reshape(-1, t), b).sum())
    return failures, total


def simulate_bsc(H: ParityCheckMatrix, rho: float, thresholds, trials: int, seed: int = 0) -> DfrEstimate:
    """Single-iteration failure rate when every bit flips independently with probability ``rho``."""
    cfg = thresholds if isinstance(thresholds, BfConfig) else BfConfig(thresholds)
    b = cfg.vector(H)
    rng = np.random.default_rng(seed)
    failures = 0
    done = 0
    while done < trials:
        size = min(BLOCK_TRIALS, trials - done)
        weights = rng.binomial(H.n, rho, size=size)
        for t in np.unique(weights):
            count = int((weights == t).sum())
            supports = sample_supports(H.n, int(t), count, rng)
            if t == 0:
                continue
            failures += int(batch_failures(H, supports, b).sum())
        done += size
    return DfrEstimate(-1, trials, failures, seed)
