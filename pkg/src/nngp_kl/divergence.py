"""Gaussian Kullback-Leibler divergence, the hierarchical toy comparison and a
Monte Carlo oracle."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .exceptions import DimensionMismatch
from .models import GaussianModel
from .numerics import cholesky, solve

TIE_TOL = 1e-12


class Order(str, enum.Enum):
    Q1_CLOSER = "Q1_closer"
    Q2_CLOSER = "Q2_closer"
    TIE = "tie"


def compare(kl_q1: float, kl_q2: float, tol: float = TIE_TOL) -> Order:
    if abs(kl_q1 - kl_q2) < tol:
        return Order.TIE
    return Order.Q1_CLOSER if kl_q1 < kl_q2 else Order.Q2_CLOSER


def kl_gaussian(p: GaussianModel, q: GaussianModel) -> float:
    """KL(P || Q) in nats.

    Written as 0.5 * {tr(Sq^-1 Sp) + dmu' Sq^-1 dmu - N + logdet Sq - logdet Sp},
    i.e. the usual -0.5 * {logdet Sp - logdet Sq + N - tr(.) - dmu'(.)dmu}
    with the minus sign distributed over the braces.
    A precision-shaped ``q`` is used as is, never inverted.
    """
    if p.n != q.n:
        raise DimensionMismatch(f"models of dimension {p.n} and {q.n}")
    sigma_p = p.covariance()
    dmu = p.mean - q.mean
    if q.prec is not None:
        trace = float(np.sum(q.prec * sigma_p))
        maha = float(dmu @ q.prec @ dmu)
    else:
        trace = float(np.trace(solve(q.factor, sigma_p)))
        maha = float(dmu @ solve(q.factor, dmu))
    return 0.5 * (trace + maha - p.n + q.logdet_cov - p.logdet_cov)


def joint_from_hierarchy(cond_var: float, latent_var: float) -> np.ndarray:
    """Joint covariance of ``(y, w)`` for ``y | w ~ N(w, cond_var)``, ``w ~ N(0, latent_var)``."""
    u, v = latent_var, cond_var
    return np.array([[u + v, u], [u, u]])


# (conditional variance, latent variance) of each hierarchical model
TOY_TRUTH = (1.0, 1.0)
TOY_MODEL1 = (0.5, 0.5)
TOY_MODEL2 = {"one": (2.5, 0.5), "two": (1.5, 1.5)}


@dataclass(frozen=True)
class KlReport:
    kl_joint_q1: float
    kl_joint_q2: float
    kl_marginal_q1: float
    kl_marginal_q2: float
    joint_order: Order
    marginal_order: Order

    def as_dict(self) -> dict:
        return {
            "kl_joint_q1": self.kl_joint_q1,
            "kl_joint_q2": self.kl_joint_q2,
            "kl_marginal_q1": self.kl_marginal_q1,
            "kl_marginal_q2": self.kl_marginal_q2,
            "joint_order": self.joint_order.value,
            "marginal_order": self.marginal_order.value,
        }


def toy_example(variant: str = "one") -> KlReport:
    """Compare two hierarchical models to the truth on the joint and collapsed spaces."""
    variant = {"1": "one", "2": "two"}.get(str(variant), str(variant))
    if variant not in TOY_MODEL2:
        raise ValueError(f"variant must be 'one' or 'two', got {variant!r}")
    joints = [joint_from_hierarchy(*h) for h in (TOY_TRUTH, TOY_MODEL1, TOY_MODEL2[variant])]
    p, q1, q2 = (GaussianModel.from_covariance(j) for j in joints)
    # integrating out w leaves y ~ N(0, latent_var + cond_var)
    pm, q1m, q2m = (GaussianModel.from_covariance(j[:1, :1]) for j in joints)
    kj1, kj2 = kl_gaussian(p, q1), kl_gaussian(p, q2)
    km1, km2 = kl_gaussian(pm, q1m), kl_gaussian(pm, q2m)
    return KlReport(kj1, kj2, km1, km2, compare(kj1, kj2), compare(km1, km2))


def mc_kl_estimate(p: GaussianModel, q: GaussianModel, samples: int = 1_000_000, seed: int = 0):
    """Monte Carlo estimate of KL(P || Q) from draws of P.

    Returns ``(estimate, stderr)`` where ``stderr`` is the sample standard
    deviation of ``log p(x) - log q(x)`` over ``sqrt(samples)``.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if p.n != q.n:
        raise DimensionMismatch(f"models of dimension {p.n} and {q.n}")
    n = p.n
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, n))
    fp = p.factor if p.cov is not None else cholesky(p.covariance())
    x = p.mean + z @ fp.lower.T
    xq = x - q.mean
    if q.cov is not None:
        w = la.solve_triangular(q.factor.lower, xq.T, lower=True)
        quad_q = np.sum(w * w, axis=0)
    else:
        w = xq @ q.factor.lower
        quad_q = np.sum(w * w, axis=1)
    quad_p = np.sum(z * z, axis=1)
    # normalizing constants cancel except for the log determinants
    terms = 0.5 * (quad_q - quad_p) + 0.5 * (q.logdet_cov - p.logdet_cov)
    return float(terms.mean()), float(terms.std(ddof=1) / np.sqrt(samples))
