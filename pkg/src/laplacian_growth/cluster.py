"""Lattice cluster container shared by the growth engines and the analysis suite.

Clusters live on the square (2D) or cubic (3D) lattice, start from a seed at
the origin, and stay connected by construction: each added site must touch an
existing one. Growth order is retained so mass-radius fitting needs no
re-simulation. Membership checks are O(1) (hash set), which the growth hot
paths rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LatticePoint = tuple  # int coordinates, length == ambient dimension

NEIGHBOR_STEPS = {
    2: ((1, 0), (-1, 0), (0, 1), (0, -1)),
    3: ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)),
}


def _as_point(p, dim):
    q = tuple(int(c) for c in p)
    if len(q) != dim:
        raise ValueError(f"point arity {len(q)} != cluster dimension {dim}")
    return q


class Cluster:
    """Connected set of lattice sites with growth order and a seed at the origin."""

    __slots__ = ("dim", "_sites", "_order", "_max_r2")

    def __init__(self, dim: int):
        if dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {dim}")
        self.dim = dim
        seed = (0,) * dim
        self._sites = {seed}
        self._order = [seed]
        self._max_r2 = 0

    @property
    def seed(self) -> LatticePoint:
        return (0,) * self.dim

    @property
    def order(self) -> list:
        """Sites in growth order (seed first)."""
        return list(self._order)

    @property
    def sites(self) -> frozenset:
        return frozenset(self._sites)

    def __len__(self):
        return len(self._sites)

    def __contains__(self, p):
        return tuple(p) in self._sites

    def is_adjacent(self, p) -> bool:
        """True if p touches the cluster by a unit L1 step."""
        for step in NEIGHBOR_STEPS[self.dim]:
            if tuple(c + s for c, s in zip(p, step)) in self._sites:
                return True
        return False

    def add_site(self, p) -> "Cluster":
        """Append one site; it must be new and lattice-adjacent to the cluster."""
        q = _as_point(p, self.dim)
        if q in self._sites:
            raise ValueError(f"duplicate site {q}")
        if not self.is_adjacent(q):
            raise ValueError(f"site {q} is not adjacent to the cluster")
        self._sites.add(q)
        self._order.append(q)
        self._max_r2 = max(self._max_r2, sum(c * c for c in q))
        return self

    def bounding_radius(self) -> float:
        """Max Euclidean norm over sites; 0 for the seed-only cluster."""
        return math.sqrt(self._max_r2)

    def radius_of_gyration(self) -> float:
        """RMS distance of sites to their centroid."""
        coords = self.to_array()
        centroid = coords.mean(axis=0)
        return float(np.sqrt(((coords - centroid) ** 2).sum(axis=1).mean()))

    def to_array(self) -> np.ndarray:
        """(N, dim) int64 array of sites in growth order."""
        return np.asarray(self._order, dtype=np.int64)

    @classmethod
    def from_order(cls, dim: int, coords, validate: bool = True) -> "Cluster":
        """Rebuild a cluster from an ordered (N, dim) coordinate array.

        With validate=False the adjacency scan is skipped (trusted engine
        output); duplicates and a wrong seed still raise.
        """
        coords = np.asarray(coords, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] != dim:
            raise ValueError(f"expected (N, {dim}) coordinates, got {coords.shape}")
        if coords.shape[0] == 0 or tuple(coords[0]) != (0,) * dim:
            raise ValueError("growth order must start with the origin seed")
        c = cls(dim)
        steps = NEIGHBOR_STEPS[dim]
        for row in coords[1:]:
            q = tuple(int(v) for v in row)
            if q in c._sites:
                raise ValueError(f"duplicate site {q}")
            if validate and not c.is_adjacent(q):
                raise ValueError(f"site {q} is not adjacent to the cluster")
            c._sites.add(q)
            c._order.append(q)
            r2 = sum(v * v for v in q)
            if r2 > c._max_r2:
                c._max_r2 = r2
        return c


def new_cluster(dim: int) -> Cluster:
    return Cluster(dim)


@dataclass(frozen=True)
class GrowthHistory:
    """Per-particle record: (n, R_g after n particles, R_max after n particles)."""

    n: np.ndarray
    rg: np.ndarray
    rmax: np.ndarray

    def __len__(self):
        return len(self.n)


def history_from_order(coords) -> GrowthHistory:
    """Recompute the growth history from an ordered coordinate array.

    Record k (1-based) describes the cluster made of the seed plus the first
    k particles. Uses exact integer prefix sums, so engines and snapshot
    re-analysis produce bit-identical values.
    """
    coords = np.asarray(coords, dtype=np.int64)
    m = coords.shape[0]
    if m < 2:
        return GrowthHistory(
            n=np.zeros(0, dtype=np.int64),
            rg=np.zeros(0),
            rmax=np.zeros(0),
        )
    s1 = np.cumsum(coords, axis=0, dtype=np.int64)
    s2 = np.cumsum((coords * coords).sum(axis=1), axis=0, dtype=np.int64)
    counts = np.arange(1, m + 1, dtype=np.int64)
    # R_g^2 = S2/m - |S1/m|^2, clipped against rounding at zero
    rg2 = s2 / counts - ((s1 / counts[:, None]) ** 2).sum(axis=1)
    rg = np.sqrt(np.maximum(rg2, 0.0))
    rmax = np.sqrt(np.maximum.accumulate((coords * coords).sum(axis=1)).astype(np.float64))
    return GrowthHistory(n=counts[1:] - 1, rg=rg[1:], rmax=rmax[1:])
