"""Locations, isotropic covariance kernels and three-point correlation matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import InvalidCorrelation

FAMILIES = ("exponential", "matern32", "matern52", "gaussian")


@dataclass(frozen=True, eq=False)
class LocationSet:
    """Ordered set of ``n`` distinct points in ``R^d``, ``d`` in {1, 2, 3}."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("need at least one location")
        if pts.shape[1] not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("location coordinates must be finite")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("duplicate locations")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def take(self, perm) -> "LocationSet":
        return LocationSet(self.points[np.asarray(perm)])


def uniform_locations(n: int, seed: int, d: int = 2) -> LocationSet:
    """``n`` points drawn uniformly on the unit cube ``[0, 1]^d``."""
    rng = np.random.default_rng(seed)
    return LocationSet(rng.uniform(size=(n, d)))


def read_locations_csv(path) -> LocationSet:
    """Read a headed CSV with columns ``x1..xd``, one row per point."""
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        expected = [f"x{k + 1}" for k in range(len(header))]
        if header != expected:
            raise ValueError(f"location CSV header must be {expected}, got {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no locations")
    return LocationSet(np.array(rows))


def write_locations_csv(path, locs: LocationSet) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(locs.d)])
        for p in locs.points:
            w.writerow([f"{v:.17g}" for v in p])


@dataclass(frozen=True)
class KernelSpec:
    family: str = "exponential"
    sigma2: float = 1.0
    phi: float = 0.3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if not self.phi > 0:
            raise ValueError("phi must be > 0")

    def correlation(self, d):
        """Correlation at distance ``d`` (scalar or array)."""
        r = np.asarray(d, dtype=float) / self.phi
        if self.family == "exponential":
            return np.exp(-r)
        if self.family == "matern32":
            s = np.sqrt(3.0) * r
            return (1.0 + s) * np.exp(-s)
        if self.family == "matern52":
            s = np.sqrt(5.0) * r
            return (1.0 + s + s * s / 3.0) * np.exp(-s)
        return np.exp(-r * r)

    def covariance(self, d):
        return self.sigma2 * self.correlation(d)


@dataclass(frozen=True)
class NoiseSpec:
    """Nugget variance ``tau2`` and its ratio ``delta2 = tau2 / sigma2``."""

    tau2: float
    delta2: float = field(init=False)
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.tau2 >= 0:
            raise ValueError("tau2 must be >= 0")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        object.__setattr__(self, "delta2", self.tau2 / self.sigma2)

    @classmethod
    def for_kernel(cls, kernel: KernelSpec, tau2: float) -> "NoiseSpec":
        return cls(tau2=tau2, sigma2=kernel.sigma2)

    @classmethod
    def from_delta2(cls, kernel: KernelSpec, delta2: float) -> "NoiseSpec":
        return cls(tau2=delta2 * kernel.sigma2, sigma2=kernel.sigma2)


def three_point_determinant(rho12: float, rho13: float, rho23: float) -> float:
    """Determinant of the unit-diagonal 3x3 correlation matrix."""
    return 1.0 - (rho12**2 + rho13**2 + rho23**2) + 2.0 * rho12 * rho13 * rho23


@dataclass(frozen=True)
class ThreePointCorr:
    rho12: float
    rho13: float
    rho23: float

    def __post_init__(self):
        for name in ("rho12", "rho13", "rho23"):
            v = getattr(self, name)
            if not -1.0 < v < 1.0:
                raise InvalidCorrelation(f"{name}={v} outside (-1, 1)")
        det = three_point_determinant(self.rho12, self.rho13, self.rho23)
        # both leading minors beyond the first must be positive
        if not (det > 0 and 1.0 - self.rho12**2 > 0):
            raise InvalidCorrelation(
                f"({self.rho12}, {self.rho13}, {self.rho23}) is not positive definite "
                f"(determinant {det:.6g})"
            )

    @property
    def determinant(self) -> float:
        return three_point_determinant(self.rho12, self.rho13, self.rho23)


def distance_matrix(locs: LocationSet) -> np.ndarray:
    d = cdist(locs.points, locs.points)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def cov_matrix(kernel: KernelSpec, locs: LocationSet) -> np.ndarray:
    c = kernel.covariance(distance_matrix(locs))
    np.fill_diagonal(c, kernel.sigma2)
    return c


def three_point_corr_matrix(c: ThreePointCorr) -> np.ndarray:
    # re-validate: the dataclass may have been bypassed with object.__setattr__
    ThreePointCorr(c.rho12, c.rho13, c.rho23)
    return np.array(
        [
            [1.0, c.rho12, c.rho13],
            [c.rho12, 1.0, c.rho23],
            [c.rho13, c.rho23, 1.0],
        ]
    )
