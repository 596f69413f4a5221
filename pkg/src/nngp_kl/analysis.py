"""How adding a nugget shrinks the Vecchia precision error.

With ``P = C^-1``, ``Pt`` the Vecchia precision and ``E = P - Pt``, the
observed-data precision difference ``(C + t I)^-1 - (Ct + t I)^-1`` has
leading term ``B = S E S`` with ``S = (I + t Pt)^-1``. Every eigenvalue of
``S`` lies in ``(0, 1]``, so ``||B||_F <= ||E||_F`` with equality only at
``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import cholesky, frobenius_norm, inverse, solve, symmetrize
from .vecchia import NeighborDag, cov_from_factor, precision_from_factor, vecchia_factor

BOUND_SLACK = 1e-12


def error_matrix(c, dag: NeighborDag) -> np.ndarray:
    """``C^-1 - Ct^-1`` for the Vecchia approximation of ``c`` on ``dag``."""
    return symmetrize(inverse(c) - precision_from_factor(vecchia_factor(c, dag)))


def leading_term(c_tilde_prec, tau2: float, e) -> np.ndarray:
    if not tau2 >= 0:
        raise ValueError("tau2 must be >= 0")
    e = np.asarray(e, dtype=float)
    if tau2 == 0:
        return e.copy()
    n = e.shape[0]
    f = cholesky(np.eye(n) + tau2 * np.asarray(c_tilde_prec))
    half = solve(f, e)  # S E
    return symmetrize(solve(f, half.T))  # S (S E)^T = S E S


def spectral_identity_check(c_tilde_prec, tau2: float) -> float:
    """Max-entry gap between ``I - Pt M*^-1`` and ``(I + tau2 Pt)^-1``,
    where ``M* = Pt + I / tau2``."""
    if not tau2 > 0:
        raise ValueError("tau2 must be > 0")
    pt = np.asarray(c_tilde_prec, dtype=float)
    eye = np.eye(pt.shape[0])
    m_star = pt + eye / tau2
    lhs = eye - pt @ inverse(m_star)
    rhs = inverse(eye + tau2 * pt)
    return float(np.max(np.abs(lhs - rhs)))


def exact_difference(c, tau2: float, dag: NeighborDag) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    eye = np.eye(c.shape[0])
    c_tilde = cov_from_factor(vecchia_factor(c, dag))
    return symmetrize(inverse(c + tau2 * eye) - inverse(c_tilde + tau2 * eye))


def second_order_remainder(c, c_tilde_prec, tau2: float, e) -> np.ndarray:
    """``Delta - B`` in closed form: ``-tau2 S E S E (I + tau2 C^-1)^-1``.

    Agrees with subtracting :func:`leading_term` from :func:`exact_difference`
    but has no cancellation, so it stays accurate when ``E`` is tiny.
    """
    if tau2 == 0:
        return np.zeros_like(np.asarray(e, dtype=float))
    e = np.asarray(e, dtype=float)
    eye = np.eye(e.shape[0])
    fs = cholesky(eye + tau2 * np.asarray(c_tilde_prec))
    ft = cholesky(eye + tau2 * inverse(c))
    ses = solve(fs, solve(fs, e).T)  # S E S
    right = solve(ft, e).T  # E T
    return -tau2 * ses @ right


@dataclass(frozen=True, eq=False)
class ShrinkageIntermediates:
    """Matrices of one shrinkage configuration.

    ``m_true`` and ``m_star`` involve ``1 / tau2`` and are ``None`` when
    ``tau2 == 0``.
    """

    e: np.ndarray
    m_true: Optional[np.ndarray]
    m_star: Optional[np.ndarray]
    b: np.ndarray
    delta: np.ndarray
    c_tilde_prec: np.ndarray


def shrinkage_intermediates(c, tau2: float, dag: NeighborDag) -> ShrinkageIntermediates:
    if not tau2 >= 0:
        raise ValueError("tau2 must be >= 0")
    c = np.asarray(c, dtype=float)
    eye = np.eye(c.shape[0])
    fac = vecchia_factor(c, dag)
    c_inv = inverse(c)
    pt = precision_from_factor(fac)
    e = symmetrize(c_inv - pt)
    c_tilde = cov_from_factor(fac)
    delta = symmetrize(inverse(c + tau2 * eye) - inverse(c_tilde + tau2 * eye))
    if tau2 > 0:
        m_true, m_star = c_inv + eye / tau2, pt + eye / tau2
    else:
        m_true = m_star = None
    return ShrinkageIntermediates(
        e=e, m_true=m_true, m_star=m_star, b=leading_term(pt, tau2, e), delta=delta, c_tilde_prec=pt
    )


@dataclass(frozen=True)
class ShrinkageReport:
    norm_e: float
    norm_b: float
    norm_delta: float
    norm_remainder: float
    ratio_shrink: float
    ratio_remainder: float
    bound_holds: bool
    # observational columns, never asserted
    norm_k_error: float = float("nan")
    norm2_e: float = float("nan")
    norm2_b: float = float("nan")
    logabsdet_e: float = float("nan")
    logabsdet_b: float = float("nan")


def _ratio(num, den):
    return num / den if den > 0 else float("nan")


def shrinkage_report(c, tau2: float, dag: NeighborDag) -> ShrinkageReport:
    """Norms of ``E``, ``B``, the exact difference and its remainder.

    Ratios are NaN when ``||E||_F`` is exactly zero.
    """
    c = np.asarray(c, dtype=float)
    it = shrinkage_intermediates(c, tau2, dag)
    norm_e = frobenius_norm(it.e)
    norm_b = frobenius_norm(it.b)
    norm_rem = frobenius_norm(second_order_remainder(c, it.c_tilde_prec, tau2, it.e))

    k = c + tau2 * np.eye(c.shape[0])
    k_err = inverse(k) - precision_from_factor(vecchia_factor(k, dag))

    return ShrinkageReport(
        norm_e=norm_e,
        norm_b=norm_b,
        norm_delta=frobenius_norm(it.delta),
        norm_remainder=norm_rem,
        ratio_shrink=_ratio(norm_b, norm_e),
        ratio_remainder=_ratio(norm_rem, norm_e**2),
        bound_holds=bool(norm_b <= norm_e * (1.0 + BOUND_SLACK)),
        norm_k_error=frobenius_norm(k_err),
        norm2_e=float(np.linalg.norm(it.e, 2)),
        norm2_b=float(np.linalg.norm(it.b, 2)),
        logabsdet_e=float(np.linalg.slogdet(it.e)[1]),
        logabsdet_b=float(np.linalg.slogdet(it.b)[1]),
    )
