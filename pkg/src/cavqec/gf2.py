"""Sparse-friendly linear algebra over GF(2).

Vectors and matrices are stored by the index sets of their nonzero entries,
which is the natural representation for parity checks of LDPC codes.  The
elimination routines convert to dense uint8 arrays internally; every code we
handle fits comfortably in a few megabytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BitVector:
    """A vector over GF(2), stored as the sorted tuple of its 1-positions."""

    length: int
    support: tuple = ()

    def __post_init__(self):
        sup = tuple(sorted(set(int(i) for i in self.support)))
        object.__setattr__(self, "support", sup)
        if sup and (sup[0] < 0 or sup[-1] >= self.length):
            raise ValueError("support index out of range")

    @classmethod
    def from_dense(cls, arr) -> "BitVector":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        return cls(len(arr), tuple(np.flatnonzero(arr)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.uint8)
        if self.support:
            out[list(self.support)] = 1
        return out

    @property
    def weight(self) -> int:
        return len(self.support)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, set(self.support) ^ set(other.support))


@dataclass(frozen=True)
class BitMatrix:
    """A matrix over GF(2), stored as per-row sorted index sets."""

    rows: int
    cols: int
    row_supports: tuple = field(default_factory=tuple)

    def __post_init__(self):
        sups = tuple(tuple(sorted(set(int(i) for i in row))) for row in self.row_supports)
        object.__setattr__(self, "row_supports", sups)
        if len(sups) != self.rows:
            raise ValueError("row_supports does not match row count")
        for row in sups:
            if row and (row[0] < 0 or row[-1] >= self.cols):
                raise ValueError("column index out of range")

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.uint8)) & 1
        return cls(arr.shape[0], arr.shape[1],
                   tuple(tuple(np.flatnonzero(r)) for r in arr))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple((i,) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, tuple(() for _ in range(rows)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, row in enumerate(self.row_supports):
            if row:
                out[i, list(row)] = 1
        return out

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_supports[i])

    def transpose(self) -> "BitMatrix":
        cols = [[] for _ in range(self.cols)]
        for i, row in enumerate(self.row_supports):
            for j in row:
                cols[j].append(i)
        return BitMatrix(self.cols, self.rows, tuple(tuple(c) for c in cols))

    def matvec(self, v: BitVector) -> BitVector:
        if v.length != self.cols:
            raise ValueError("dimension mismatch")
        vs = set(v.support)
        out = [i for i, row in enumerate(self.row_supports)
               if len(vs.intersection(row)) % 2 == 1]
        return BitVector(self.rows, out)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        prod = (self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)) & 1
        return BitMatrix.from_dense(prod.astype(np.uint8))

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ValueError("dimension mismatch")
        return BitMatrix(self.rows + other.rows, self.cols,
                         self.row_supports + other.row_supports)

    def to_text(self) -> str:
        """Serialize: header "rows cols", then one line of 1-indices per row."""
        lines = [f"{self.rows} {self.cols}"]
        for row in self.row_supports:
            lines.append(" ".join(str(j) for j in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = text.splitlines()
        rows, cols = (int(x) for x in lines[0].split())
        sups = []
        for line in lines[1:1 + rows]:
            sups.append(tuple(int(x) for x in line.split()))
        if len(sups) != rows:
            raise ValueError("truncated matrix text")
        return cls(rows, cols, tuple(sups))


def _eliminate(dense: np.ndarray):
    """Column-pivot Gaussian elimination, reducing to RREF in place.

    Pivot selection within a column prefers the sparsest eligible row, ties
    broken by lowest row index, so the result is deterministic.

    Returns (pivot_rows, pivot_cols): parallel lists mapping pivot k to the
    row and column it lives in after elimination.
    """
    m, n = dense.shape
    weights = dense.sum(axis=1).astype(np.int64)
    used = np.zeros(m, dtype=bool)
    pivot_rows, pivot_cols = [], []
    for col in range(n):
        cand = np.flatnonzero((dense[:, col] == 1) & ~used)
        if cand.size == 0:
            continue
        r = cand[np.argmin(weights[cand])]
        used[r] = True
        others = np.flatnonzero(dense[:, col] == 1)
        others = others[others != r]
        if others.size:
            dense[others] ^= dense[r]
            weights[others] = dense[others].sum(axis=1)
        pivot_rows.append(int(r))
        pivot_cols.append(col)
        if len(pivot_rows) == m:
            break
    return pivot_rows, pivot_cols


def rank(M: BitMatrix) -> int:
    """GF(2) row rank."""
    if M.rows == 0 or M.cols == 0:
        return 0
    dense = M.to_dense()
    pivot_rows, _ = _eliminate(dense)
    return len(pivot_rows)


def kernel_basis(M: BitMatrix) -> BitMatrix:
    """Basis of the right null space {v : M v = 0}, one vector per row."""
    dense = M.to_dense()
    pivot_rows, pivot_cols = _eliminate(dense)
    col_of_pivot = dict(zip(pivot_cols, pivot_rows))
    free_cols = [j for j in range(M.cols) if j not in col_of_pivot]
    basis = []
    for j in free_cols:
        sup = [j]
        for pc, pr in col_of_pivot.items():
            if dense[pr, j]:
                sup.append(pc)
        basis.append(tuple(sorted(sup)))
    return BitMatrix(len(basis), M.cols, tuple(basis))


def solve(M: BitMatrix, s: BitVector):
    """Return some x with M x = s, or None when the system is infeasible."""
    if s.length != M.rows:
        raise ValueError("syndrome length must equal row count")
    dense = M.to_dense()
    aug = np.concatenate([dense, s.to_dense()[:, None]], axis=1)
    # Eliminate on the coefficient columns only; the augmented column rides along.
    m, n = M.rows, M.cols
    weights = aug[:, :n].sum(axis=1).astype(np.int64)
    used = np.zeros(m, dtype=bool)
    col_of_pivot = {}
    for col in range(n):
        cand = np.flatnonzero((aug[:, col] == 1) & ~used)
        if cand.size == 0:
            continue
        r = cand[np.argmin(weights[cand])]
        used[r] = True
        others = np.flatnonzero(aug[:, col] == 1)
        others = others[others != r]
        if others.size:
            aug[others] ^= aug[r]
            weights[others] = aug[others, :n].sum(axis=1)
        col_of_pivot[col] = int(r)
    if np.any(aug[~used, n] == 1):
        return None
    sup = [col for col, r in col_of_pivot.items() if aug[r, n]]
    return BitVector(M.cols, sup)


def in_rowspace(M: BitMatrix, v: BitVector) -> bool:
    """True iff v is a GF(2) combination of the rows of M."""
    if v.length != M.cols:
        raise ValueError("vector length must equal column count")
    if not v.support:
        return True
    return solve(M.transpose(), v) is not None
