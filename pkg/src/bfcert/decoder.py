"""Parallel bit-flipping decoding with per-bit thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import ParityCheckMatrix
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class BfConfig:
    """Flip thresholds (scalar or one per bit) and the iteration cap.

    Only ``max_iterations == 1`` matches the certified analysis; more
    iterations are an exploratory extension.
    """

    thresholds: int | tuple[int, ...]
    max_iterations: int = 1

    def __post_init__(self):
        if not isinstance(self.thresholds, (int, np.integer)):
            object.__setattr__(self, "thresholds", tuple(int(b) for b in self.thresholds))
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")

    def vector(self, H: ParityCheckMatrix) -> np.ndarray:
        """Per-bit thresholds, validated against the column weights of ``H``."""
        if isinstance(self.thresholds, tuple):
            b = np.array(self.thresholds, dtype=np.int64)
            if b.shape != (H.n,):
                raise ConfigError(f"{b.size} thresholds for {H.n} bits")
        else:
            b = np.full(H.n, int(self.thresholds), dtype=np.int64)
        bad = np.flatnonzero((b < 1) | (b > H.column_weights))
        if bad.size:
            i = int(bad[0])
            raise ConfigError(f"threshold {b[i]} for bit {i} outside [1, {H.column_weights[i]}]")
        return b

    @property
    def certified(self) -> bool:
        return self.max_iterations == 1


@dataclass(frozen=True)
class DecodeOutcome:
    e_prime: np.ndarray
    counters: np.ndarray
    iterations_run: int
    syndrome_zero: bool

    @property
    def flips(self) -> list[int]:
        return np.flatnonzero(self.e_prime).tolist()


def unsatisfied_counts(H: ParityCheckMatrix, s) -> np.ndarray:
    """Number of unsatisfied checks each bit takes part in."""
    s = np.asarray(s)
    if s.shape != (H.r,):
        raise DimensionError(f"syndrome has shape {s.shape}, expected ({H.r},)")
    return H.csc.T.dot((s & 1).astype(np.int32)).astype(np.int64)


def bf_decode(H: ParityCheckMatrix, s, cfg: BfConfig | int | Sequence[int]) -> DecodeOutcome:
    """Flip every bit whose unsatisfied-check count reaches its threshold.

    With ``max_iterations > 1`` the flip/update pass repeats until the syndrome
    vanishes; the syndrome is updated by XOR-ing the columns of flipped bits.
    """
    if not isinstance(cfg, BfConfig):
        cfg = BfConfig(cfg)
    b = cfg.vector(H)
    s = (np.asarray(s) & 1).astype(np.uint8)
    if s.shape != (H.r,):
        raise DimensionError(f"syndrome has shape {s.shape}, expected ({H.r},)")
    e_prime = np.zeros(H.n, dtype=np.uint8)
    sigma = np.zeros(H.n, dtype=np.int64)
    it = 0
    while it < cfg.max_iterations:
        it += 1
        sigma = unsatisfied_counts(H, s)
        flip = np.flatnonzero(sigma >= b)
        e_prime[flip] ^= 1
        if flip.size:
            rows = H.csc[:, flip].indices
            s = s ^ (np.bincount(rows, minlength=H.r) & 1).astype(np.uint8)
        if not s.any():
            break
    return DecodeOutcome(e_prime, sigma, it, not s.any())


def decision_flags(e, e_prime) -> np.ndarray:
    """1 where the decoder took a wrong decision on that bit."""
    e, e_prime = np.asarray(e), np.asarray(e_prime)
    if e.shape != e_prime.shape:
        raise DimensionError("vectors differ in length")
    return (e ^ e_prime).astype(np.uint8)


def batch_failures(H: ParityCheckMatrix, supports: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single-iteration failure flags for a batch of error supports.

    ``supports`` is a ``(batch, t)`` index array, one error pattern per row.
    Failure means the flip set differs from the error support.
    """
    supports = np.ascontiguousarray(supports, dtype=np.int64)
    if supports.ndim != 2:
        raise DimensionError("supports must be a (batch, t) array")
    if _failures_kernel is None:
        return batch_failures_sparse(H, supports, b)
    return _failures_kernel(*H.index_arrays, np.ascontiguousarray(b, dtype=np.int64),
                            supports, H.n, H.r)


def batch_failures_sparse(H: ParityCheckMatrix, supports: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same contract as :func:`batch_failures`, through sparse matrix products."""
    supports = np.asarray(supports, dtype=np.int64)
    B, t = supports.shape
    if t == 0:
        return np.zeros(B, dtype=bool)
    E = _pattern_matrix(supports, H.n)
    S = E @ H.csc.T
    S.data &= 1
    S.eliminate_zeros()
    sigma = (S @ H.csc).tocsr()
    sigma.sort_indices()
    rows = np.repeat(np.arange(B), np.diff(sigma.indptr))
    flipped = sigma.data >= b[sigma.indices]
    # flips per pattern, and how many of those hit a true error position
    flip_rows = rows[flipped]
    flip_cols = sigma.indices[flipped]
    nflips = np.bincount(flip_rows, minlength=B)
    key_err = np.sort(supports, axis=1) + (np.arange(B)[:, None] * H.n)
    hits = np.isin(flip_rows * H.n + flip_cols, key_err.ravel(), assume_unique=False)
    nhits = np.bincount(flip_rows[hits], minlength=B)
    return (nflips != t) | (nhits != t)


def _pattern_matrix(supports: np.ndarray, n: int):
    import scipy.sparse as sp

    B, t = supports.shape
    indptr = np.arange(0, B * t + 1, t, dtype=np.int64)
    data = np.ones(B * t, dtype=np.int32)
    return sp.csr_matrix((data, supports.ravel(), indptr), shape=(B, n))


def _make_kernel():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        return None

    @njit(cache=True)
    def kernel(row_ptr, row_idx, col_ptr, col_idx, b, supports, n, r):
        B, t = supports.shape
        out = np.zeros(B, dtype=np.bool_)
        s = np.zeros(r, dtype=np.uint8)
        listed = np.zeros(r, dtype=np.bool_)
        sigma = np.zeros(n, dtype=np.int64)
        is_err = np.zeros(n, dtype=np.bool_)
        rows = np.empty(r, dtype=np.int64)
        cols = np.empty(n, dtype=np.int64)
        for k in range(B):
            nrows = 0
            for a in range(t):
                i = supports[k, a]
                is_err[i] = True
                for q in range(col_ptr[i], col_ptr[i + 1]):
                    row = col_idx[q]
                    s[row] ^= 1
                    if not listed[row]:
                        listed[row] = True
                        rows[nrows] = row
                        nrows += 1
            ncols = 0
            for x in range(nrows):
                row = rows[x]
                if s[row]:
                    for q in range(row_ptr[row], row_ptr[row + 1]):
                        c = row_idx[q]
                        if sigma[c] == 0:
                            cols[ncols] = c
                            ncols += 1
                        sigma[c] += 1
            fail = False
            for a in range(t):
                i = supports[k, a]
                if sigma[i] < b[i]:
                    fail = True
            for x in range(ncols):
                c = cols[x]
                if not is_err[c] and sigma[c] >= b[c]:
                    fail = True
            out[k] = fail
            for x in range(ncols):
                sigma[cols[x]] = 0
            for x in range(nrows):
                s[rows[x]] = 0
                listed[rows[x]] = False
            for a in range(t):
                is_err[supports[k, a]] = False
        return out

    return kernel


_failures_kernel = _make_kernel()
