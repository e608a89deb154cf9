"""Sparse parity-check matrices and the quasi-cyclic families used for certification."""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, InvalidSpecError
from .subset import CompressedVector, from_histogram

GIRTH_CUTOFFS = (4, 6, 8, 10, 12)
BUILTIN_CODES = tuple(f"C{k}" for k in range(9))


@dataclass(frozen=True)
class Explicit:
    kind = "explicit"


@dataclass(frozen=True)
class QC2:
    p: int
    v: int
    supports: tuple[tuple[int, ...], tuple[int, ...]]
    kind = "qc2"


@dataclass(frozen=True)
class Monomial:
    p: int
    v: int
    w: int
    shifts: tuple[tuple[int, ...], ...]
    kind = "monomial"


class ParityCheckMatrix:
    """Binary ``r x n`` matrix kept as compressed column and row index arrays.

    ``col_supports`` / ``row_supports`` give the sorted supports as tuples.
    Instances are treated as immutable; derived views are cached.
    """

    def __init__(self, r: int, n: int, col_ptr, col_idx, structure=None, name: str | None = None):
        col_ptr = np.asarray(col_ptr, dtype=np.int64)
        col_idx = np.asarray(col_idx, dtype=np.int64)
        if col_ptr.shape != (n + 1,) or col_ptr[-1] != col_idx.size:
            raise InvalidSpecError("inconsistent column index arrays")
        if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= r):
            raise InvalidSpecError("row index out of range")
        csc = sp.csc_matrix((np.ones(col_idx.size, dtype=np.int32), col_idx, col_ptr), shape=(r, n))
        csc.sort_indices()
        within = np.diff(csc.indices) == 0
        within &= np.diff(np.repeat(np.arange(n), np.diff(col_ptr))) == 0
        if within.any():
            raise InvalidSpecError("duplicate row index inside a column")
        for arr in (csc.indptr, csc.indices, csc.data):
            arr.flags.writeable = False
        self.n = n
        self.r = r
        self.csc = csc
        self.structure = structure or Explicit()
        self.name = name

    def __repr__(self):
        return f"ParityCheckMatrix({self.r}x{self.n}, {self.structure.kind}, name={self.name!r})"

    @classmethod
    def from_columns(cls, r: int, columns, structure=None, name=None) -> ParityCheckMatrix:
        if isinstance(columns, np.ndarray) and columns.ndim == 2:
            n, v = columns.shape
            ptr = np.arange(0, n * v + 1, v, dtype=np.int64)
            return cls(r, n, ptr, columns.ravel(), structure, name)
        lens = [len(c) for c in columns]
        ptr = np.zeros(len(lens) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(lens)
        idx = np.fromiter((j for c in columns for j in c), dtype=np.int64, count=int(ptr[-1]))
        return cls(r, len(lens), ptr, idx, structure, name)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], n: int | None = None, name=None):
        rows = [sorted(set(rw)) for rw in rows]
        if n is None:
            n = 1 + max((c for rw in rows for c in rw), default=-1)
        cols: list[list[int]] = [[] for _ in range(n)]
        for j, rw in enumerate(rows):
            for c in rw:
                if not 0 <= c < n:
                    raise InvalidSpecError(f"column index {c} out of range in row {j}")
                cols[c].append(j)
        return cls.from_columns(len(rows), cols, Explicit(), name)

    @classmethod
    def from_dense(cls, dense, name=None) -> ParityCheckMatrix:
        dense = np.asarray(dense) % 2
        return cls.from_rows([np.flatnonzero(row).tolist() for row in dense],
                             n=dense.shape[1], name=name)

    # views -----------------------------------------------------------------

    @cached_property
    def col_supports(self) -> tuple[tuple[int, ...], ...]:
        ptr, idx = self.csc.indptr, self.csc.indices.tolist()
        return tuple(tuple(idx[ptr[i]:ptr[i + 1]]) for i in range(self.n))

    @cached_property
    def row_supports(self) -> tuple[tuple[int, ...], ...]:
        ptr, idx = self.csr.indptr, self.csr.indices.tolist()
        return tuple(tuple(idx[ptr[j]:ptr[j + 1]]) for j in range(self.r))

    @cached_property
    def csr(self) -> sp.csr_matrix:
        csr = self.csc.tocsr()
        csr.sort_indices()
        return csr

    @cached_property
    def index_arrays(self) -> tuple[np.ndarray, ...]:
        """``(row_ptr, row_idx, col_ptr, col_idx)`` as int64, for compiled loops."""
        csr, csc = self.csr, self.csc
        return tuple(np.ascontiguousarray(x, dtype=np.int64)
                     for x in (csr.indptr, csr.indices, csc.indptr, csc.indices))

    def dense(self) -> np.ndarray:
        return self.csr.toarray().astype(np.uint8)

    @cached_property
    def column_weights(self) -> np.ndarray:
        return np.diff(self.csc.indptr).astype(np.int64)

    @cached_property
    def row_weights(self) -> np.ndarray:
        return np.diff(self.csr.indptr).astype(np.int64)

    @property
    def v_star(self) -> int:
        return int(self.column_weights.min())

    @property
    def w_max(self) -> int:
        return int(self.row_weights.max())

    @property
    def design_rate(self) -> float:
        return 1.0 - self.r / self.n

    @property
    def is_regular(self) -> bool:
        return (self.column_weights.min() == self.column_weights.max()
                and self.row_weights.min() == self.row_weights.max())

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256(f"{self.r}x{self.n}".encode())
        h.update(np.ascontiguousarray(self.csc.indptr, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.csc.indices, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]

    def check_transpose(self) -> bool:
        """Row supports rebuilt from the column supports match the stored rows."""
        rebuilt: list[list[int]] = [[] for _ in range(self.r)]
        for i, col in enumerate(self.col_supports):
            for j in col:
                rebuilt[j].append(i)
        return tuple(map(tuple, rebuilt)) == self.row_supports

    def duplicate_columns(self) -> list[tuple[int, int]]:
        w = self.column_weights
        if self.n and w.min() == w.max():
            cols = np.asarray(self.csc.indices).reshape(self.n, int(w[0]))
            _, first, inverse = np.unique(cols, axis=0, return_index=True, return_inverse=True)
            inverse = inverse.ravel()
            idx = np.flatnonzero(first[inverse] != np.arange(self.n))
            return [(int(first[inverse[i]]), int(i)) for i in idx]
        seen: dict[tuple[int, ...], int] = {}
        dups = []
        for i, col in enumerate(self.col_supports):
            if col in seen:
                dups.append((seen[col], i))
            else:
                seen[col] = i
        return dups

    def summary(self) -> dict:
        s = self.structure
        out = {"name": self.name, "type": s.kind, "n": self.n, "r": self.r,
               "design_rate": round(self.design_rate, 6),
               "v_min": self.v_star, "v_max": int(self.column_weights.max()),
               "w_min": int(self.row_weights.min()), "w_max": self.w_max,
               "fingerprint": self.fingerprint}
        if isinstance(s, (QC2, Monomial)):
            out["p"] = s.p
        return out


# constructions ----------------------------------------------------------------

def _check_support(support, p, what):
    support = [int(x) for x in support]
    if not support:
        raise InvalidSpecError(f"{what} is empty")
    if len(set(support)) != len(support):
        raise InvalidSpecError(f"{what} has duplicate entries")
    if min(support) < 0 or max(support) >= p:
        raise InvalidSpecError(f"{what} has entries outside [0, {p - 1}]")
    return tuple(sorted(support))


def build_qc2(p: int, S0: Sequence[int], S1: Sequence[int], name=None) -> ParityCheckMatrix:
    """``[H0 | H1]`` with ``p x p`` circulants whose first columns have supports ``S0``, ``S1``.

    Column ``j`` of block ``k`` has support ``{(s + j) mod p : s in S_k}``.
    """
    if p < 1:
        raise InvalidSpecError("block size must be positive")
    S0 = _check_support(S0, p, "S0")
    S1 = _check_support(S1, p, "S1")
    if len(S0) != len(S1):
        raise InvalidSpecError(f"|S0| = {len(S0)} differs from |S1| = {len(S1)}")
    shifts = np.arange(p, dtype=np.int64)[:, None]
    cols = np.vstack([np.sort((np.array(S, dtype=np.int64)[None, :] + shifts) % p, axis=1)
                      for S in (S0, S1)])
    return ParityCheckMatrix.from_columns(p, cols, QC2(p, len(S0), (S0, S1)), name)


def build_monomial(p: int, shifts: Sequence[Sequence[int]], name=None) -> ParityCheckMatrix:
    """Array of shifted identities; block ``(j, k)`` is ``I`` with columns shifted down by ``shifts[j][k]``."""
    shifts = np.asarray(shifts, dtype=np.int64)
    if shifts.ndim != 2 or shifts.size == 0:
        raise InvalidSpecError("shifts must be a nonempty v x w matrix")
    if shifts.min() < 0 or shifts.max() >= p:
        raise InvalidSpecError(f"shifts must lie in [0, {p - 1}]")
    v, w = shifts.shape
    offsets = np.arange(v, dtype=np.int64)[None, :] * p
    c = np.arange(p, dtype=np.int64)[:, None]
    # row blocks are disjoint and increasing, so each column is already sorted
    cols = np.vstack([offsets + (c + shifts[None, :, k]) % p for k in range(w)])
    structure = Monomial(p, v, w, tuple(tuple(int(x) for x in row) for row in shifts))
    return ParityCheckMatrix.from_columns(v * p, cols, structure, name)


def build_explicit(rows: Sequence[Sequence[int]], n: int | None = None, name=None) -> ParityCheckMatrix:
    for j, rw in enumerate(rows):
        if len(set(rw)) != len(rw):
            raise InvalidSpecError(f"row {j} has duplicate entries")
    H = ParityCheckMatrix.from_rows(rows, n=n, name=name)
    if min(H.column_weights, default=0) < 1:
        raise InvalidSpecError("every column needs weight at least 1")
    dups = H.duplicate_columns()
    if dups:
        warnings.warn(f"duplicate columns {dups[:5]}: max column intersection equals the column weight",
                      stacklevel=2)
    return H


def array_shifts(p: int, v: int, w: int) -> list[list[int]]:
    """Shifts ``j * k mod p``; for prime ``p >= max(v, w)`` every 4-cycle is excluded."""
    return [[(j * k) % p for k in range(w)] for j in range(v)]


def random_monomial_girth6(p: int, v: int, w: int, rng: np.random.Generator,
                           max_restarts: int = 200) -> list[list[int]]:
    """Random shift matrix without 4-cycles, built column by column with restarts.

    A 4-cycle exists iff ``s[a][c] - s[b][c] == s[a][d] - s[b][d] (mod p)`` for
    some rows ``a != b`` and columns ``c != d``; each new column must therefore
    avoid all row differences already used.
    """
    for _ in range(max_restarts):
        used = [[set() for _ in range(v)] for _ in range(v)]
        cols = []
        for _k in range(w):
            col = _extend_column(p, v, used, rng)
            if col is None:
                break
            cols.append(col)
        else:
            return [[cols[k][j] for k in range(w)] for j in range(v)]
    raise InvalidSpecError(f"no girth-6 monomial shifts found for p={p}, v={v}, w={w}")


def _extend_column(p, v, used, rng, tries=64):
    for _ in range(tries):
        col = [int(rng.integers(p))]
        for j in range(1, v):
            cand = rng.permutation(p)
            for s in cand:
                s = int(s)
                if all((col[a] - s) % p not in used[a][j] for a in range(j)):
                    col.append(s)
                    break
            else:
                break
        if len(col) == v:
            for a in range(v):
                for b in range(a + 1, v):
                    used[a][b].add((col[a] - col[b]) % p)
            return col
    return None


def random_qc2_girth6(p: int, v: int, rng: np.random.Generator,
                      max_steps: int = 50_000) -> tuple[list[int], list[int]]:
    """Random circulant supports giving a ``[H0 | H1]`` matrix free of 4-cycles.

    Needs every nonzero difference inside ``S0`` and inside ``S1`` to be distinct
    modulo ``p``, and the two difference sets to be disjoint. Starts from random
    supports and repeatedly moves one entry to the position creating the fewest
    repeated differences (min-conflicts local search with a short tabu list).
    """
    if 2 * v * (v - 1) > p - 1:
        raise InvalidSpecError(f"p={p} is too small for girth-6 supports of weight {v}")
    sets = [rng.choice(p, v, replace=False) for _ in range(2)]
    cnt = np.zeros(p, dtype=np.int64)
    for S in sets:
        d = (S[:, None] - S[None, :]) % p
        np.add.at(cnt, d[~np.eye(v, dtype=bool)], 1)
    zs = np.arange(p)
    tabu = np.full((2, p), -1)
    for step in range(max_steps):
        if not (cnt > 1).any():
            return sorted(sets[0].tolist()), sorted(sets[1].tolist())
        k = int(rng.integers(2))
        S = sets[k]
        i = int(rng.integers(v))
        others = np.delete(S, i)
        d = (zs[:, None] - others[None, :]) % p
        D = np.concatenate([d, (-d) % p], axis=1)
        np.subtract.at(cnt, D[S[i]], 1)
        # collisions with differences already present, plus those among the new ones
        Ds = np.sort(D, axis=1)
        score = (cnt[D] >= 1).sum(axis=1) + (Ds[:, 1:] == Ds[:, :-1]).sum(axis=1)
        score[others] = 1 << 30
        score[tabu[k] > step] += 1 << 20
        tabu[k, S[i]] = step + 8
        S[i] = rng.choice(np.flatnonzero(score == score.min()))
        np.add.at(cnt, D[S[i]], 1)
    raise InvalidSpecError(f"no girth-6 supports found for p={p}, v={v}")


# spec files -------------------------------------------------------------------

def load_spec(source: str | Path | dict) -> ParityCheckMatrix:
    """Build a matrix from a JSON spec file, a parsed spec, or ``builtin:<name>``."""
    if isinstance(source, dict):
        doc, default_name = source, None
    else:
        text = str(source)
        if text.startswith("builtin:"):
            name = text.split(":", 1)[1]
            if name not in BUILTIN_CODES:
                raise InvalidSpecError(f"unknown builtin code {name!r}; known: {', '.join(BUILTIN_CODES)}")
            raw = resources.files("bfcert").joinpath("data").joinpath(f"{name}.json").read_text()
            doc, default_name = json.loads(raw), name
        else:
            try:
                doc = json.loads(Path(text).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidSpecError(f"cannot read spec {text}: {exc}") from exc
            default_name = Path(text).stem
    return spec_to_matrix(doc, default_name)


def spec_to_matrix(doc: dict, default_name=None) -> ParityCheckMatrix:
    kind = doc.get("type")
    name = doc.get("name", default_name)
    try:
        if kind == "qc2":
            supports = doc["supports"]
            if len(supports) != 2:
                raise InvalidSpecError("qc2 needs exactly two supports")
            return build_qc2(int(doc["p"]), supports[0], supports[1], name=name)
        if kind == "monomial":
            return build_monomial(int(doc["p"]), doc["shifts"], name=name)
        if kind == "explicit":
            return build_explicit(doc["rows"], doc.get("n"), name=name)
    except KeyError as exc:
        raise InvalidSpecError(f"spec of type {kind!r} lacks field {exc}") from exc
    raise InvalidSpecError(f"unknown spec type {kind!r}")


def matrix_to_spec(H: ParityCheckMatrix) -> dict:
    s = H.structure
    doc: dict = {"name": H.name} if H.name else {}
    if isinstance(s, QC2):
        doc.update(type="qc2", p=s.p, supports=[list(s.supports[0]), list(s.supports[1])])
    elif isinstance(s, Monomial):
        doc.update(type="monomial", p=s.p, shifts=[list(r) for r in s.shifts])
    else:
        doc.update(type="explicit", n=H.n, rows=[list(rw) for rw in H.row_supports])
    return doc


# syndromes, adjacency, girth ---------------------------------------------------

def syndrome(H: ParityCheckMatrix, e) -> np.ndarray:
    e = np.asarray(e)
    if e.shape != (H.n,):
        raise DimensionError(f"error vector has shape {e.shape}, expected ({H.n},)")
    idx = np.flatnonzero(e & 1)
    if idx.size == 0:
        return np.zeros(H.r, dtype=np.uint8)
    rows = H.csc.indices[np.concatenate([np.arange(H.csc.indptr[i], H.csc.indptr[i + 1]) for i in idx])]
    return (np.bincount(rows, minlength=H.r) & 1).astype(np.uint8)


@dataclass(frozen=True)
class GammaRow:
    """Row ``i`` of the column adjacency matrix with the diagonal removed.

    ``entries`` lists the nonzero values with their multiplicities; the other
    ``length - sum(mult)`` entries are zero.
    """

    owner_col: int
    length: int
    entries: tuple[tuple[int, int], ...]
    weight: int

    @property
    def nonzeros(self) -> int:
        return sum(lam for _, lam in self.entries)

    @property
    def max_value(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def punctured(self) -> CompressedVector:
        return from_histogram(self.length, self.entries)

    def full(self) -> CompressedVector:
        """The row including its zero diagonal entry (length ``n``)."""
        return from_histogram(self.length + 1, self.entries)

    def signature(self) -> tuple:
        return (self.length, self.entries, self.weight)


def adjacency_values(H: ParityCheckMatrix, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Columns overlapping column ``i`` and the overlap sizes (diagonal excluded)."""
    if not 0 <= i < H.n:
        raise DimensionError(f"column {i} outside [0, {H.n - 1}]")
    csr, csc = H.csr, H.csc
    rows = csc.indices[csc.indptr[i]:csc.indptr[i + 1]]
    parts = [csr.indices[csr.indptr[j]:csr.indptr[j + 1]] for j in rows]
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    cols, counts = np.unique(np.concatenate(parts), return_counts=True)
    keep = cols != i
    return cols[keep], counts[keep]


def adjacency_row(H: ParityCheckMatrix, i: int) -> GammaRow:
    _, counts = adjacency_values(H, i)
    values, mult = np.unique(counts, return_counts=True)
    return GammaRow(i, H.n - 1, tuple(zip(values.tolist(), mult.tolist())), int(H.column_weights[i]))


def qc2_adjacency_rows(p: int, S0: Sequence[int], S1: Sequence[int]) -> list[GammaRow]:
    """Adjacency rows of columns ``0`` and ``p`` of a QC2 matrix, from the supports alone.

    Column ``j`` of block ``c`` meets column ``0`` of block ``a`` in as many rows
    as there are pairs ``x in S_a, y in S_c`` with ``x - y = j (mod p)``, so each
    row is a histogram of cyclic differences; the matrix itself is never built.
    """
    sets = [np.asarray(S, dtype=np.int64) for S in (S0, S1)]
    rows = []
    for a in (0, 1):
        counts = []
        for c in (0, 1):
            diffs = (sets[a][:, None] - sets[c][None, :]).ravel() % p
            hist = np.bincount(diffs, minlength=p)
            if a == c:
                hist[0] = 0  # the column itself
            counts.append(hist[hist > 0])
        values, mult = np.unique(np.concatenate(counts), return_counts=True)
        rows.append(GammaRow(a * p, 2 * p - 1, tuple(zip(values.tolist(), mult.tolist())), len(sets[a])))
    return rows


def dense_adjacency(H: ParityCheckMatrix) -> np.ndarray:
    """Full ``n x n`` adjacency matrix by pairwise intersection; small codes only."""
    D = H.dense().astype(np.int64)
    G = D.T @ D
    np.fill_diagonal(G, 0)
    return G


def representative_columns(H: ParityCheckMatrix) -> list[int]:
    s = H.structure
    if isinstance(s, QC2):
        return [0, s.p]
    if isinstance(s, Monomial):
        return [k * s.p for k in range(s.w)]
    return list(range(H.n))


def distinct_row_profiles(H: ParityCheckMatrix, use_structure: bool = True) -> list[tuple[GammaRow, int]]:
    """Adjacency rows with multiplicities covering all ``n`` columns.

    Quasi-cyclic matrices need one row per circulant block-column, each standing
    for ``p`` rows; otherwise every row is returned with multiplicity 1.
    """
    s = H.structure
    if use_structure and isinstance(s, QC2):
        return [(row, s.p) for row in qc2_adjacency_rows(s.p, *s.supports)]
    if use_structure and isinstance(s, Monomial):
        return [(adjacency_row(H, i), s.p) for i in representative_columns(H)]
    return [(adjacency_row(H, i), 1) for i in range(H.n)]


def max_gamma(H: ParityCheckMatrix) -> int:
    return max(row.max_value for row, _ in distinct_row_profiles(H))


def girth(H: ParityCheckMatrix, cutoff: int = 8) -> int | None:
    """Tanner-graph girth if it is at most ``cutoff``, else ``None``.

    Runs a breadth-first search from variable nodes, stopping at depth
    ``cutoff / 2``. The first level at which two frontier edges land on the
    same node closes a cycle of length ``2 * level``. For quasi-cyclic
    matrices the search only starts from one column per circulant block, since
    the cyclic shift is a graph automorphism.
    """
    if cutoff not in GIRTH_CUTOFFS:
        raise ValueError(f"cutoff must be one of {GIRTH_CUTOFFS}")
    if max_gamma(H) >= 2:
        return 4
    if cutoff == 4:
        return None
    csr, csc = H.csr, H.csc
    best = None
    for root in representative_columns(H):
        found = _bfs_cycle(csr, csc, H.n, H.r, root, cutoff if best is None else best - 2)
        if found is not None and (best is None or found < best):
            best = found
            if best == 4:
                break
    return best


def _bfs_cycle(csr, csc, n, r, root, limit):
    # nodes: variables 0..n-1, checks n..n+r-1; parent pointers avoid backtracking
    visited = np.zeros(n + r, dtype=bool)
    visited[root] = True
    frontier = np.array([root], dtype=np.int64)
    parent = np.array([-1], dtype=np.int64)
    level = 0
    while frontier.size and 2 * (level + 1) <= limit:
        on_var = level % 2 == 0
        mat, ptr, off_src, off_dst = (csc, csc.indptr, 0, n) if on_var else (csr, csr.indptr, n, 0)
        local = frontier - off_src
        lens = ptr[local + 1] - ptr[local]
        starts = np.repeat(ptr[local], lens)
        within = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
        targets = mat.indices[starts + within].astype(np.int64) + off_dst
        srcs = np.repeat(frontier, lens)
        par = np.repeat(parent, lens)
        keep = targets != par
        targets, srcs = targets[keep], srcs[keep]
        level += 1
        if visited[targets].any() or np.unique(targets).size != targets.size:
            return 2 * level
        visited[targets] = True
        frontier, parent = targets, srcs
    return None
