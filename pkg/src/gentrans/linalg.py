"""Scalar backends and rank-revealing linear algebra.

Every defect in this package reduces to a matrix rank.  Two backends are
supported: exact rational arithmetic (fraction-free elimination on Python
integers) and IEEE doubles (singular values with a relative threshold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ScalarBackend",
    "EXACT",
    "FLOAT",
    "Matrix",
    "rank",
    "dim_span_union",
    "kernel_basis",
    "independent_rows",
]


@dataclass(frozen=True)
class ScalarBackend:
    """Arithmetic used for evaluation and rank decisions.

    ``kind`` is ``"exact"`` or ``"float"``.  Only the float kind uses
    ``rank_tol`` (relative singular value cut) and ``mem_tol`` (absolute
    tolerance for "equals zero" and "is positive" decisions).
    """

    kind: str = "exact"
    rank_tol: float = 1e-10
    mem_tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "float" and not (self.rank_tol > 0 and self.mem_tol > 0):
            raise ValueError("float backend tolerances must be strictly positive")

    @property
    def exact(self) -> bool:
        return self.kind == "exact"

    def coerce(self, value):
        """Convert a user value (int, Fraction, str, float) to a backend scalar."""
        if self.exact:
            if isinstance(value, float):
                if not math.isfinite(value):
                    raise ValueError(f"non-finite value {value!r} under exact backend")
                return Fraction(value)
            return Fraction(value)
        return float(Fraction(value)) if isinstance(value, str) else float(value)

    def is_zero(self, value) -> bool:
        return value == 0 if self.exact else abs(value) <= self.mem_tol

    def is_positive(self, value) -> bool:
        return value > 0 if self.exact else value > self.mem_tol


EXACT = ScalarBackend("exact")
FLOAT = ScalarBackend("float")


@dataclass(frozen=True)
class Matrix:
    """Dense matrix with row-major entries; zero rows or columns are legal."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = [tuple(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(v for r in rows for v in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "Matrix":
        return cls.from_rows(list(zip(*columns)) if columns else [()] * rows, len(columns))

    @classmethod
    def zeros(cls, rows: int, cols: int, zero=0) -> "Matrix":
        return cls(rows, cols, (zero,) * (rows * cols))

    @classmethod
    def identity(cls, n: int, one=1, zero=0) -> "Matrix":
        return cls.from_rows([[one if i == j else zero for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix.from_rows([self.column(j) for j in range(self.cols)], self.rows)

    def select_rows(self, idx: Iterable[int]) -> "Matrix":
        return Matrix.from_rows([self.row(i) for i in idx], self.cols)

    def select_cols(self, idx: Iterable[int]) -> "Matrix":
        idx = list(idx)
        return Matrix.from_rows([[r[j] for j in idx] for r in self.to_rows()], len(idx))

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError(f"row mismatch: {self.rows} vs {other.rows}")
        return Matrix.from_rows(
            [self.row(i) + other.row(i) for i in range(self.rows)], self.cols + other.cols
        )

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError(f"column mismatch: {self.cols} vs {other.cols}")
        return Matrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            r = self.row(i)
            out.append([sum((r[k] * other[k, j] for k in range(self.cols)), 0)
                        for j in range(other.cols)])
        return Matrix.from_rows(out, other.cols)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(v) for v in self.entries], dtype=float).reshape(self.rows, self.cols)


# -- exact kernels ---------------------------------------------------------


def _integer_rows(M: Matrix) -> list[list[int]]:
    """Scale each row by the lcm of its denominators; rank is unchanged."""
    out = []
    for r in M.to_rows():
        fr = [Fraction(v) for v in r]
        den = math.lcm(*(v.denominator for v in fr)) if fr else 1
        out.append([int(v * den) for v in fr])
    return out


def _bareiss_rank(A: list[list[int]]) -> int:
    """Rank by fraction-free (Bareiss) elimination with row pivoting."""
    if not A or not A[0]:
        return 0
    A = [row[:] for row in A]
    nrows, ncols = len(A), len(A[0])
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        for i in range(r + 1, nrows):
            f = A[i][c]
            row_i, row_r = A[i], A[r]
            for j in range(c + 1, ncols):
                # Sylvester's identity guarantees exact division
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r


def _rref(M: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and its pivot columns."""
    A = [[Fraction(v) for v in r] for r in M.to_rows()]
    pivots: list[int] = []
    r = 0
    for c in range(M.cols):
        piv = next((i for i in range(r, M.rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(M.rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == M.rows:
            break
    return A, pivots


# -- float kernels ---------------------------------------------------------


def _float_threshold(s: np.ndarray, shape: tuple[int, int], backend: ScalarBackend) -> float:
    return backend.rank_tol * max(shape) * (s[0] if s.size else 0.0)


def _float_rank(M: Matrix, backend: ScalarBackend) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    s = np.linalg.svd(M.to_numpy(), compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > _float_threshold(s, M.shape, backend)))


# -- public operations -----------------------------------------------------


def rank(M: Matrix, backend: ScalarBackend = EXACT) -> int:
    """Rank of ``M`` under the given backend.

    Exact: fraction-free elimination over the integers after clearing
    denominators row by row.  Float: number of singular values above
    ``rank_tol * max(rows, cols) * sigma_max``.
    """
    if backend.exact:
        return _bareiss_rank(_integer_rows(M))
    return _float_rank(M, backend)


def dim_span_union(B1: Matrix, B2: Matrix, backend: ScalarBackend = EXACT) -> int:
    """Dimension of span(cols B1) + span(cols B2)."""
    if B1.rows != B2.rows:
        raise ValueError(
            f"ambient dimension mismatch: {B1.rows} rows vs {B2.rows} rows"
        )
    return rank(B1.hstack(B2), backend)


def kernel_basis(M: Matrix, backend: ScalarBackend = EXACT) -> Matrix:
    """Columns spanning the null space of ``M`` (``cols - rank`` of them)."""
    if backend.exact:
        R, pivots = _rref(M)
        free = [j for j in range(M.cols) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * M.cols
            v[f] = Fraction(1)
            for i, pc in enumerate(pivots):
                v[pc] = -R[i][f]
            basis.append(v)
        return Matrix.from_columns(basis, M.cols)
    if M.cols == 0:
        return Matrix.zeros(0, 0)
    if M.rows == 0:
        return Matrix.identity(M.cols, 1.0, 0.0)
    _, s, vh = np.linalg.svd(M.to_numpy(), full_matrices=True)
    k = 0 if s[0] == 0.0 else int(np.count_nonzero(s > _float_threshold(s, M.shape, backend)))
    null = vh[k:].T
    return Matrix.from_rows(null.tolist(), M.cols - k)


def independent_rows(M: Matrix, backend: ScalarBackend = EXACT) -> list[int]:
    """Indices of a maximal linearly independent set of rows.

    The earliest rows are preferred (pivot rows of ``M`` in order), so the
    choice is deterministic.
    """
    if backend.exact:
        _, pivots = _rref(M.transpose())
        return pivots
    chosen: list[int] = []
    for i in range(M.rows):
        if _float_rank(M.select_rows(chosen + [i]), backend) > len(chosen):
            chosen.append(i)
    return chosen
