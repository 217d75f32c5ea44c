"""Sparse symmetric matrices in CSR form and a Jacobi-preconditioned CG solver."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

__all__ = ["SparseSymMatrix", "CGResult", "LinearSolverError", "spmv", "cg_solve"]


class LinearSolverError(RuntimeError):
    """Raised when an iterative solve cannot reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SparseSymMatrix:
    """Symmetric matrix in compressed sparse row storage.

    Column indices are strictly increasing within each row.  Symmetry is
    a contract of the assembly routines that produce these matrices and
    is not re-verified on construction.
    """

    __slots__ = ("row_offsets", "col_indices", "values", "dim", "_csr")

    def __init__(self, row_offsets, col_indices, values, dim: int | None = None):
        row_offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if dim is None:
            dim = len(row_offsets) - 1
        dim = int(dim)
        if row_offsets.ndim != 1 or len(row_offsets) != dim + 1:
            raise ValueError("row_offsets must have length dim + 1")
        if len(row_offsets) == 0 or row_offsets[0] != 0 or row_offsets[-1] != len(col_indices):
            raise ValueError("malformed row offsets")
        if len(values) != len(col_indices):
            raise ValueError("values and col_indices differ in length")
        if np.any(np.diff(row_offsets) < 0):
            raise ValueError("row offsets must be non-decreasing")
        if len(col_indices) and (col_indices.min() < 0 or col_indices.max() >= dim):
            raise ValueError("column index out of range")
        _check_sorted_columns(row_offsets, col_indices)
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.values = values
        self.dim = dim
        self._csr = sp.csr_matrix((values, col_indices, row_offsets), shape=(dim, dim))

    @classmethod
    def from_scipy(cls, a) -> "SparseSymMatrix":
        a = sp.csr_matrix(a)
        a.sort_indices()
        return cls(a.indptr, a.indices, a.data, a.shape[0])

    def to_scipy(self) -> sp.csr_matrix:
        return self._csr

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    @property
    def nnz(self) -> int:
        return len(self.values)

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return spmv(self, x)

    def __repr__(self) -> str:
        return f"SparseSymMatrix(dim={self.dim}, nnz={self.nnz})"


def _check_sorted_columns(row_offsets: np.ndarray, col_indices: np.ndarray) -> None:
    if len(col_indices) < 2:
        return
    diffs = np.diff(col_indices)
    within_row = np.ones(len(col_indices) - 1, dtype=bool)
    starts = row_offsets[1:-1]
    starts = starts[(starts > 0) & (starts < len(col_indices))]
    within_row[starts - 1] = False
    if np.any(diffs[within_row] <= 0):
        raise ValueError("column indices must be strictly increasing within each row")


class CGResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def spmv(a: SparseSymMatrix, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product A @ x, accumulated row by row in stored-column order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.dim,):
        raise ValueError(f"dimension mismatch: matrix is {a.dim}, vector has shape {x.shape}")
    return a._csr @ x


def cg_solve(a: SparseSymMatrix, b: np.ndarray, rel_tol: float = 1e-12,
             max_iter: int | None = None) -> CGResult:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Conjugate gradients with Jacobi (diagonal) preconditioning, iterated
    until ``||b - A x||_2 <= rel_tol * ||b||_2``.  Deterministic: identical
    inputs produce identical iterates.

    Raises
    ------
    LinearSolverError
        If the tolerance is not met within ``max_iter`` iterations
        (default ``10 * dim``) or a non-finite value appears; the error
        carries the last residual norm.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (a.dim,):
        raise ValueError(f"dimension mismatch: matrix is {a.dim}, vector has shape {b.shape}")
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    if a.dim == 0:
        return CGResult(np.zeros(0), 0, 0.0)
    if not np.isfinite(b).all():
        raise LinearSolverError("right-hand side contains non-finite entries")
    if max_iter is None:
        max_iter = 10 * a.dim

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0)
    target = rel_tol * b_norm

    diag = a.diagonal()
    inv_diag = 1.0 / np.where(diag > 0.0, diag, 1.0)

    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    residual = b_norm
    for it in range(1, max_iter + 1):
        ap = spmv(a, p)
        pap = float(p @ ap)
        if not math.isfinite(pap):
            raise LinearSolverError("non-finite values encountered",
                                    residual=residual, iterations=it)
        if pap < 0.0:
            raise LinearSolverError(
                "matrix is not positive definite on the Krylov subspace",
                residual=residual, iterations=it)
        if pap == 0.0:
            # search direction underflowed to zero: no representable progress
            raise LinearSolverError(
                f"stagnated at residual {residual:.3e} (target {target:.3e})",
                residual=residual, iterations=it)
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        residual = float(np.linalg.norm(r))
        if not math.isfinite(residual):
            raise LinearSolverError("non-finite residual encountered",
                                    residual=residual, iterations=it)
        if residual <= target:
            return CGResult(x, it, residual)
        z = inv_diag * r
        rz_next = float(r @ z)
        if rz_next <= 0.0:
            raise LinearSolverError(
                f"stagnated at residual {residual:.3e} (target {target:.3e})",
                residual=residual, iterations=it)
        beta = rz_next / rz
        rz = rz_next
        p = z + beta * p
    raise LinearSolverError(
        f"no convergence in {max_iter} iterations "
        f"(residual {residual:.3e}, target {target:.3e})",
        residual=residual, iterations=max_iter)
