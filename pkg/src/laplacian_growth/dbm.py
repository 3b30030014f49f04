"""Dielectric-breakdown growth: explicit Laplace solves plus weighted site selection.

The potential satisfies the discrete Laplace equation with u = 0 pinned on
the cluster and u = 1 on a far circular/spherical shell; empty perimeter
sites then grow with probability proportional to (k * u_site)^eta. With unit
lattice spacing and u = 0 on the cluster, the potential value at a perimeter
site IS the one-sided normal gradient, so eta = 1 is the linear growth law
and eta = 0 degenerates to Eden growth. The overall k^eta factor scales all
weights uniformly and cancels in the normalized selection probabilities, so
the growth loop samples with k left out; selections are therefore
bit-identical for any k > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .cluster import Cluster, GrowthHistory, history_from_order
from .errors import ConvergenceError, DegenerateFieldError
from .walker import make_rng

MASK_INTERIOR = 0
MASK_CLUSTER = 1
MASK_FAR = 2
MASK_EXTERIOR = 3

_FAR_SHELL = 2.0  # shell thickness; one norm unit is enough to block axis steps, two is safe
_MIN_FAR_RADIUS = 6.0  # keeps a working annulus around the bare seed


@dataclass
class PotentialGrid:
    """Discretized potential on a centered box, with Dirichlet masks."""

    dim: int
    u: np.ndarray  # float64, shape (S,)*dim
    mask: np.ndarray  # uint8, same shape
    origin: int  # array index of lattice coordinate 0
    far_radius: float

    @property
    def extent(self) -> tuple:
        return self.u.shape

    def site_index(self, p) -> tuple:
        return tuple(int(c) + self.origin for c in p)


@dataclass(frozen=True)
class DbmParams:
    n_particles: int
    dim: int = 2
    grid_margin: float = 2.0  # far-boundary radius = grid_margin * current R_max
    eta: float = 1.0
    k: float = 1.0
    sor_omega: float = 1.8
    tol: float = 1e-6
    max_sweeps: int = 50_000
    seed: int = 0

    def validate(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not self.grid_margin > 1.2:
            raise ValueError("grid_margin must be > 1.2")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if not self.k > 0:
            raise ValueError("k must be > 0")
        if not 1.0 < self.sor_omega < 2.0:
            raise ValueError("sor_omega must lie in (1, 2)")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SolveInfo:
    sweeps: int
    residual: float
    checkpoints: list = field(default_factory=list)  # max update at sweeps 50, 100, ...


def _norm2_grid(shape, origin) -> np.ndarray:
    axes = [(np.arange(s) - origin) ** 2 for s in shape]
    if len(shape) == 2:
        return axes[0][:, None] + axes[1][None, :]
    return axes[0][:, None, None] + axes[1][None, :, None] + axes[2][None, None, :]


def _build_mask(shape, origin, occupied_idx, far_radius) -> np.ndarray:
    r2 = _norm2_grid(shape, origin)
    mask = np.full(shape, MASK_EXTERIOR, dtype=np.uint8)
    mask[r2 < far_radius**2] = MASK_INTERIOR
    shell = (r2 >= far_radius**2) & (r2 < (far_radius + _FAR_SHELL) ** 2)
    mask[shell] = MASK_FAR
    mask[occupied_idx] = MASK_CLUSTER
    return mask


def grid_from_cluster(cluster: Cluster, far_radius: float, headroom: int = 8) -> PotentialGrid:
    """Fresh grid for a cluster: u = 0 on sites, 1 elsewhere, far shell at far_radius."""
    origin = int(math.ceil(far_radius + _FAR_SHELL)) + headroom
    shape = (2 * origin + 1,) * cluster.dim
    coords = cluster.to_array()
    occupied_idx = tuple((coords + origin).T)
    mask = _build_mask(shape, origin, occupied_idx, far_radius)
    u = np.ones(shape, dtype=np.float64)
    u[occupied_idx] = 0.0
    return PotentialGrid(dim=cluster.dim, u=u, mask=mask, origin=origin, far_radius=far_radius)


def make_shell_grid(dim: int, r_inner: float, r_outer: float, headroom: int = 4) -> PotentialGrid:
    """Annulus/spherical-shell test grid: filled ball of radius r_inner at u = 0,
    far shell at r_outer at u = 1."""
    if not 0 <= r_inner < r_outer:
        raise ValueError("need 0 <= r_inner < r_outer")
    origin = int(math.ceil(r_outer + _FAR_SHELL)) + headroom
    shape = (2 * origin + 1,) * dim
    r2 = _norm2_grid(shape, origin)
    inner = r2 <= r_inner**2
    mask = _build_mask(shape, origin, inner, r_outer)
    u = np.ones(shape, dtype=np.float64)
    u[inner] = 0.0
    return PotentialGrid(dim=dim, u=u, mask=mask, origin=origin, far_radius=float(r_outer))


@njit(cache=True)
def _sor_sweep_2d(u, mask, omega):
    n0, n1 = u.shape
    max_delta = 0.0
    max_u = 1.0
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            if mask[i, j] == 0:
                avg = 0.25 * (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1])
                new = u[i, j] + omega * (avg - u[i, j])
                delta = abs(new - u[i, j])
                if delta > max_delta:
                    max_delta = delta
                u[i, j] = new
                if abs(new) > max_u:
                    max_u = abs(new)
    return max_delta, max_u


@njit(cache=True)
def _sor_sweep_3d(u, mask, omega):
    n0, n1, n2 = u.shape
    max_delta = 0.0
    max_u = 1.0
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for l in range(1, n2 - 1):
                if mask[i, j, l] == 0:
                    avg = (
                        u[i + 1, j, l]
                        + u[i - 1, j, l]
                        + u[i, j + 1, l]
                        + u[i, j - 1, l]
                        + u[i, j, l + 1]
                        + u[i, j, l - 1]
                    ) / 6.0
                    new = u[i, j, l] + omega * (avg - u[i, j, l])
                    delta = abs(new - u[i, j, l])
                    if delta > max_delta:
                        max_delta = delta
                    u[i, j, l] = new
                    if abs(new) > max_u:
                        max_u = abs(new)
    return max_delta, max_u


def solve_laplace(
    grid: PotentialGrid,
    tol: float = 1e-6,
    max_sweeps: int = 50_000,
    omega: float = 1.8,
) -> SolveInfo:
    """SOR sweeps (lexicographic, sequential, hence deterministic) until the
    max per-site update drops to tol * max(1, max|u|). Mutates grid.u."""
    if not np.any(grid.mask == MASK_CLUSTER) or not np.any(grid.mask == MASK_FAR):
        raise ValueError("grid needs at least one cluster site and one far-boundary site")
    sweep = _sor_sweep_2d if grid.dim == 2 else _sor_sweep_3d
    checkpoints = []
    delta = math.inf
    for s in range(1, max_sweeps + 1):
        delta, umax = sweep(grid.u, grid.mask, omega)
        if s % 50 == 0:
            checkpoints.append(delta)
        if delta <= tol * max(1.0, umax):
            return SolveInfo(sweeps=s, residual=delta, checkpoints=checkpoints)
    raise ConvergenceError(
        f"no convergence after {max_sweeps} sweeps (residual {delta:.3e})",
        residual=delta,
        sweeps=max_sweeps,
    )


def _perimeter_indices(grid: PotentialGrid) -> np.ndarray:
    """Empty interior sites lattice-adjacent to the cluster, lexicographic order."""
    cl = grid.mask == MASK_CLUSTER
    near = np.zeros_like(cl)
    for axis in range(grid.dim):
        near |= np.roll(cl, 1, axis=axis)
        near |= np.roll(cl, -1, axis=axis)
    return np.argwhere(near & (grid.mask == MASK_INTERIOR))


def growth_candidates(cluster: Cluster, grid: PotentialGrid, eta: float = 1.0, k: float = 1.0):
    """Empty perimeter sites with weight (k * u_site)^eta.

    u_site over unit spacing is the one-sided normal derivative (u = 0 on the
    cluster). Raises DegenerateFieldError when every weight vanishes.
    """
    idx = _perimeter_indices(grid)
    if idx.shape[0] == 0:
        raise DegenerateFieldError("cluster has no empty perimeter sites")
    uvals = grid.u[tuple(idx.T)]
    if eta == 0:
        weights = np.ones(len(uvals))
    else:
        weights = (k * np.maximum(uvals, 0.0)) ** eta
    if not np.any(weights > 0):
        raise DegenerateFieldError("all growth weights are zero")
    sites = idx - grid.origin
    return [(tuple(int(c) for c in s), float(w)) for s, w in zip(sites, weights)]


def select_growth_site(candidates, rng) -> tuple:
    """Draw one site with probability weight / sum(weights)."""
    if not candidates:
        raise ValueError("empty candidate list")
    weights = np.array([w for _, w in candidates], dtype=np.float64)
    total = weights.sum()
    if not total > 0:
        raise DegenerateFieldError("all growth weights are zero")
    r = rng.random() * total
    cum = np.cumsum(weights)
    i = int(np.searchsorted(cum, r, side="right"))
    if i >= len(candidates):  # r == total after rounding
        i = len(candidates) - 1
    return candidates[i][0]


def _far_radius_for(r_max: float, margin: float) -> float:
    return max(margin * r_max, r_max + 2.0, _MIN_FAR_RADIUS)


def run_dbm(params: DbmParams) -> tuple:
    """Full DBM loop: solve, weight, select, add, re-solve (warm-started).

    The far shell tracks grid_margin * R_max; the array is re-meshed (old u
    copied, new sites start at 1) whenever the shell outgrows it. Returns
    (Cluster, GrowthHistory); deterministic for a fixed seed.
    """
    params.validate()
    rng = make_rng(params.seed)
    cluster = Cluster(params.dim)
    far = _far_radius_for(cluster.bounding_radius(), params.grid_margin)
    grid = grid_from_cluster(cluster, far)
    for _ in range(params.n_particles):
        solve_laplace(grid, tol=params.tol, max_sweeps=params.max_sweeps, omega=params.sor_omega)
        # k^eta scales every weight alike and cancels in the normalization;
        # sampling with k = 1 keeps selections bit-identical across k.
        cands = growth_candidates(cluster, grid, eta=params.eta, k=1.0)
        site = select_growth_site(cands, rng)
        cluster.add_site(site)
        grid.u[grid.site_index(site)] = 0.0
        grid.mask[grid.site_index(site)] = MASK_CLUSTER
        far = _far_radius_for(cluster.bounding_radius(), params.grid_margin)
        if far > grid.far_radius:
            grid = _remesh(grid, cluster, far)
    return cluster, history_from_order(cluster.to_array())


def _remesh(grid: PotentialGrid, cluster: Cluster, far_radius: float) -> PotentialGrid:
    """Move the far shell out to far_radius, enlarging the array if needed.

    The old potential is copied; sites new to the array start at 1.
    """
    need_origin = int(math.ceil(far_radius + _FAR_SHELL)) + 2
    if need_origin > grid.origin:
        new = grid_from_cluster(cluster, far_radius, headroom=8)
        off = new.origin - grid.origin
        sl = tuple(slice(off, off + s) for s in grid.u.shape)
        new.u[sl] = grid.u
        coords = cluster.to_array()
        new.u[tuple((coords + new.origin).T)] = 0.0
        return new
    coords = cluster.to_array()
    occupied_idx = tuple((coords + grid.origin).T)
    mask = _build_mask(grid.u.shape, grid.origin, occupied_idx, far_radius)
    # sites leaving the old far shell keep their u (about 1) as warm start
    grid.u[(mask == MASK_FAR) | (mask == MASK_EXTERIOR)] = 1.0
    grid.u[occupied_idx] = 0.0
    grid.mask = mask
    grid.far_radius = far_radius
    return grid
