"""Observed-data models: parent GP, response NNGP and latent NNGP."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .covariance import ThreePointCorr, three_point_corr_matrix
from .exceptions import DimensionMismatch
from .numerics import CholFactor, cholesky, inverse, sym_matrix
from .vecchia import NeighborDag, cov_from_factor, precision_from_factor, vecchia_factor


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Multivariate normal stored either by covariance or by precision.

    Exactly one of ``cov`` / ``prec`` is set. ``logdet_cov`` is the log
    determinant of the covariance in both cases (``-logdet(prec)`` for the
    precision shape). Build instances with :meth:`from_covariance` or
    :meth:`from_precision`, which validate positive definiteness.
    """

    mean: np.ndarray
    cov: Optional[np.ndarray]
    prec: Optional[np.ndarray]
    logdet_cov: float
    factor: CholFactor

    @classmethod
    def from_covariance(cls, cov, mean=None) -> "GaussianModel":
        cov = sym_matrix(cov)
        f = cholesky(cov)
        return cls(_mean(mean, f.n), cov, None, f.logdet, f)

    @classmethod
    def from_precision(cls, prec, mean=None) -> "GaussianModel":
        prec = sym_matrix(prec)
        f = cholesky(prec)
        return cls(_mean(mean, f.n), None, prec, -f.logdet, f)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def shape(self) -> str:
        return "covariance" if self.cov is not None else "precision"

    def covariance(self) -> np.ndarray:
        return self.cov if self.cov is not None else inverse(self.prec)

    def precision(self) -> np.ndarray:
        return self.prec if self.prec is not None else inverse(self.cov)


def _mean(mean, n):
    if mean is None:
        return np.zeros(n)
    mean = np.asarray(mean, dtype=float).reshape(-1)
    if mean.shape[0] != n:
        raise DimensionMismatch(f"mean of length {mean.shape[0]} for dimension {n}")
    return mean


@dataclass(frozen=True, eq=False)
class ModelTriple:
    parent: GaussianModel
    response: GaussianModel
    latent: GaussianModel


def _check_tau2(tau2):
    if not tau2 >= 0:
        raise ValueError(f"tau2 must be >= 0, got {tau2}")


def parent_model(c, tau2: float) -> GaussianModel:
    _check_tau2(tau2)
    c = np.asarray(c, dtype=float)
    return GaussianModel.from_covariance(c + tau2 * np.eye(c.shape[0]))


def response_model(c, tau2: float, dag: NeighborDag) -> GaussianModel:
    """Vecchia approximation applied to the observed covariance ``c + tau2 I``."""
    _check_tau2(tau2)
    c = np.asarray(c, dtype=float)
    k = c + tau2 * np.eye(c.shape[0])
    return GaussianModel.from_precision(precision_from_factor(vecchia_factor(k, dag)))


def latent_model(c, tau2: float, dag: NeighborDag) -> GaussianModel:
    """Vecchia approximation applied to ``c``, nugget added afterwards."""
    _check_tau2(tau2)
    c = np.asarray(c, dtype=float)
    c_tilde = cov_from_factor(vecchia_factor(c, dag))
    return GaussianModel.from_covariance(c_tilde + tau2 * np.eye(c.shape[0]))


def model_triple(c, tau2: float, dag: NeighborDag) -> ModelTriple:
    return ModelTriple(
        parent=parent_model(c, tau2),
        response=response_model(c, tau2, dag),
        latent=latent_model(c, tau2, dag),
    )


def three_point_closed_forms(sigma2: float, delta2: float, c: ThreePointCorr):
    """Closed-form observed covariances of the two NNGP models on three points.

    The DAG is the chain s1 -> s2 -> s3. Returns ``(sigma_response, sigma_latent)``;
    they differ only in the (s1, s3) entry, which is ``rho12 rho23 / (1 + delta2)``
    for the response model and ``rho12 rho23`` for the latent model (times sigma2).
    """
    three_point_corr_matrix(c)
    if not sigma2 > 0:
        raise ValueError("sigma2 must be > 0")
    if not delta2 >= 0:
        raise ValueError("delta2 must be >= 0")
    v = 1.0 + delta2
    base = np.array(
        [
            [v, c.rho12, 0.0],
            [c.rho12, v, c.rho23],
            [0.0, c.rho23, v],
        ]
    )
    resp = base.copy()
    resp[0, 2] = resp[2, 0] = c.rho12 * c.rho23 / v
    lat = base.copy()
    lat[0, 2] = lat[2, 0] = c.rho12 * c.rho23
    return sigma2 * resp, sigma2 * lat
