"""Dense symmetric linear algebra.

Symmetric matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``
that have passed through :func:`sym_matrix`. Factorizations are delegated
to LAPACK via numpy/scipy; this module fixes the error semantics (no jitter,
typed exceptions) and the output conventions (lower factors, descending
eigenvalues, deterministic eigenvector signs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .exceptions import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite

__all__ = [
    "CholFactor",
    "EigDecomp",
    "sym_matrix",
    "symmetrize",
    "cholesky",
    "solve",
    "inverse",
    "logdet",
    "frobenius_norm",
    "sym_eig",
]


def sym_matrix(data, symmetrize: bool = False) -> np.ndarray:
    """Validate ``data`` as a symmetric matrix and return it as a float array.

    With ``symmetrize=False`` any asymmetry, however small, is rejected.
    With ``symmetrize=True`` the result is ``(a + a.T) / 2``.
    """
    a = np.array(data, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionMismatch("matrix must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if symmetrize:
        return 0.5 * (a + a.T)
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class CholFactor:
    """Lower Cholesky factor ``L`` of ``A = L L^T`` with ``log det A``."""

    lower: np.ndarray
    logdet: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class EigDecomp:
    """``A = P^T diag(values) P``; rows of ``vectors`` are eigenvectors."""

    vectors: np.ndarray
    values: np.ndarray

    def reconstruct(self) -> np.ndarray:
        p = self.vectors
        return p.T @ (self.values[:, None] * p)


def cholesky(a: np.ndarray) -> CholFactor:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    try:
        lower = la.cholesky(a, lower=True, check_finite=True)
    except la.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    diag = np.diag(lower)
    # LAPACK stops on a non-positive pivot; a zero pivot can still slip through
    if not np.all(diag > 0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return CholFactor(lower=lower, logdet=2.0 * float(np.sum(np.log(diag))))


def solve(f: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` given the Cholesky factor of ``A``."""
    b = np.asarray(b, dtype=float)
    if b.ndim not in (1, 2) or b.shape[0] != f.n:
        raise DimensionMismatch(
            f"right-hand side of shape {b.shape} does not conform to n={f.n}"
        )
    return la.cho_solve((f.lower, True), b, check_finite=False)


def inverse(a: np.ndarray) -> np.ndarray:
    f = cholesky(a)
    return symmetrize(solve(f, np.eye(f.n)))


def logdet(a: np.ndarray) -> float:
    return cholesky(a).logdet


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float), "fro"))


def sym_eig(a: np.ndarray) -> EigDecomp:
    """Symmetric eigendecomposition with descending eigenvalues.

    Each eigenvector is signed so that its first component with magnitude
    above round-off is positive.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    try:
        values, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    rows = vecs[:, order].T.copy()
    for row in rows:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return EigDecomp(vectors=rows, values=values)
