"""Orderings, nearest-neighbor DAGs and the Vecchia factorization.

All DAG positions refer to the *ordered* sequence of points: node ``i`` is the
point ``perm[i]`` of the original location set, and a covariance matrix passed
to :func:`vecchia_factor` must already be expressed in that order (see
:func:`permute`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .covariance import LocationSet
from .exceptions import DimensionMismatch, InvalidPermutation, NotPositiveDefinite
from .numerics import cholesky, solve, symmetrize


@dataclass(frozen=True)
class Ordering:
    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise InvalidPermutation(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        object.__setattr__(self, "perm", perm)

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        return cls(tuple(range(n)))


def build_ordering(locs: LocationSet, strategy: str = "coordinate", *, seed=None, perm=None) -> Ordering:
    """Order the points of ``locs``.

    ``coordinate`` sorts by the first coordinate, then the second, then the
    original index. ``random`` is a uniform shuffle from ``seed``. ``given``
    validates and returns ``perm``.
    """
    n = locs.n
    if strategy == "coordinate":
        pts = locs.points
        keys = [np.arange(n)]
        if pts.shape[1] > 1:
            keys.append(pts[:, 1])
        keys.append(pts[:, 0])
        # lexsort: last key is primary
        return Ordering(tuple(np.lexsort(keys)))
    if strategy == "random":
        if seed is None:
            raise ValueError("random ordering requires a seed")
        return Ordering(tuple(np.random.default_rng(seed).permutation(n)))
    if strategy == "given":
        if perm is None or len(perm) != n:
            raise InvalidPermutation(f"given ordering must have length {n}")
        return Ordering(tuple(perm))
    raise ValueError(f"unknown ordering strategy {strategy!r}")


@dataclass(frozen=True)
class NeighborDag:
    """Predecessor sets ``neighbors[i]`` (ordered positions, each ``< i``)."""

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    m: int

    def __post_init__(self):
        nbrs = tuple(tuple(sorted(int(j) for j in s)) for s in self.neighbors)
        if len(nbrs) != self.n:
            raise ValueError(f"expected {self.n} neighbor sets, got {len(nbrs)}")
        for i, s in enumerate(nbrs):
            if len(set(s)) != len(s):
                raise ValueError(f"duplicate neighbors for node {i}")
            if any(j < 0 or j >= i for j in s):
                raise ValueError(f"node {i} has a non-predecessor neighbor: {s}")
            if len(s) > self.m:
                raise ValueError(f"node {i} has {len(s)} neighbors, cap is {self.m}")
        object.__setattr__(self, "neighbors", nbrs)

    @classmethod
    def from_sets(cls, sets) -> "NeighborDag":
        sets = [tuple(s) for s in sets]
        return cls(len(sets), tuple(sets), max((len(s) for s in sets), default=0))

    @classmethod
    def saturated(cls, n: int) -> "NeighborDag":
        return cls(n, tuple(tuple(range(i)) for i in range(n)), max(n - 1, 0))

    @classmethod
    def empty(cls, n: int) -> "NeighborDag":
        return cls(n, tuple(() for _ in range(n)), 0)

    @classmethod
    def chain(cls, n: int) -> "NeighborDag":
        """``N(i) = {i - 1}``: each node conditions on its immediate predecessor."""
        return cls(n, tuple(() if i == 0 else (i - 1,) for i in range(n)), 1 if n > 1 else 0)

    def is_saturated(self) -> bool:
        return all(len(s) == i for i, s in enumerate(self.neighbors))

    def adjacency(self) -> np.ndarray:
        """Boolean ``(n, n)`` matrix of the moralized (undirected) graph."""
        adj = np.eye(self.n, dtype=bool)
        for i, s in enumerate(self.neighbors):
            for j in s:
                adj[i, j] = adj[j, i] = True
            for a in s:
                for b in s:
                    adj[a, b] = True
        return adj


def build_neighbor_dag(locs: LocationSet, ordering: Ordering, m: int) -> NeighborDag:
    """Each ordered point conditions on its ``m`` nearest predecessors.

    Distances are Euclidean; ties go to the smaller ordered position.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if ordering.n != locs.n:
        raise DimensionMismatch("ordering and location set differ in size")
    pts = locs.points[np.asarray(ordering.perm)]
    sets = []
    for i in range(locs.n):
        k = min(i, m)
        if k == 0:
            sets.append(())
            continue
        dist = np.sqrt(np.sum((pts[:i] - pts[i]) ** 2, axis=1))
        # stable sort keeps smaller positions first among equal distances
        sets.append(tuple(np.argsort(dist, kind="stable")[:k]))
    return NeighborDag(locs.n, tuple(sets), m)


def permute(c: np.ndarray, ordering: Ordering) -> np.ndarray:
    """Express a matrix indexed by original points in ordered positions."""
    p = np.asarray(ordering.perm)
    return np.asarray(c)[np.ix_(p, p)]


@dataclass(frozen=True, eq=False)
class VecchiaFactor:
    """``precision = (I - a)^T diag(d)^{-1} (I - a)`` with ``a`` strictly lower."""

    a: np.ndarray
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]


def vecchia_factor(c: np.ndarray, dag: NeighborDag) -> VecchiaFactor:
    c = np.asarray(c, dtype=float)
    n = dag.n
    if c.shape != (n, n):
        raise DimensionMismatch(f"matrix shape {c.shape} does not match DAG of size {n}")
    a = np.zeros((n, n))
    d = np.empty(n)
    for i, nb in enumerate(dag.neighbors):
        if not nb:
            d[i] = c[i, i]
        else:
            idx = list(nb)
            try:
                f = cholesky(c[np.ix_(idx, idx)])
            except NotPositiveDefinite as exc:
                raise NotPositiveDefinite(f"neighbor submatrix of node {i}: {exc}") from exc
            cross = c[idx, i]
            w = solve(f, cross)
            a[i, idx] = w
            d[i] = c[i, i] - cross @ w
        if not d[i] > 0:
            raise NotPositiveDefinite(f"non-positive conditional variance at node {i}: {d[i]}")
    return VecchiaFactor(a=a, d=d)


def precision_from_factor(f: VecchiaFactor) -> np.ndarray:
    u = np.eye(f.n) - f.a
    return symmetrize(u.T @ (u / f.d[:, None]))


def cov_from_factor(f: VecchiaFactor) -> np.ndarray:
    """Implied covariance ``(I - a)^{-1} diag(d) (I - a)^{-T}``.

    Computed by a unit-triangular solve, which is the inverse of
    :func:`precision_from_factor` without forming the precision.
    """
    u = np.eye(f.n) - f.a
    g = la.solve_triangular(u, np.diag(np.sqrt(f.d)), lower=True, unit_diagonal=True)
    return symmetrize(g @ g.T)
