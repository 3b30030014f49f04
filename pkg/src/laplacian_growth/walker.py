"""Random-walker DLA engine.

Walkers are injected on a circle/sphere just outside the cluster, diffuse by
unit lattice steps, and stick on first contact; first-contact statistics
sample the harmonic measure of the Laplace field around the aggregate, so no
field is ever solved here. Far from the cluster the walk is accelerated by
long jumps that provably cannot enter the occupied region (the jump length
keeps the walker strictly outside the cluster's bounding sphere).

`grow` runs a numba kernel; `launch_position`/`walk_step` are the same logic
in plain Python, consuming the identical RNG stream, which lets tests replay
trajectories and cross-check the kernel step for step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cluster import Cluster, GrowthHistory, NEIGHBOR_STEPS, history_from_order
from .errors import GrowthStalledError

RELAUNCH_BUDGET = 10_000  # per-particle relaunch cap before growth is declared stalled

# outcome tags shared by the python stepper and the kernels
_WALKING, _STUCK, _KILLED, _EXHAUSTED = 0, 1, 2, 3

KILLED = "killed"


@dataclass(frozen=True)
class Stuck:
    at: tuple


@dataclass(frozen=True)
class WalkerParams:
    """Walker-DLA run parameters.

    launch radius = launch_factor * max(R_max, 1) + 5 lattice units;
    kill radius = kill_factor * launch radius.
    """

    n_particles: int
    dim: int = 2
    launch_factor: float = 2.0
    kill_factor: float = 4.0
    max_steps_per_walker: int = 1_000_000
    seed: int = 0

    def validate(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not self.launch_factor > 1:
            raise ValueError("launch_factor must be > 1")
        if self.kill_factor < 2 * self.launch_factor:
            raise ValueError("kill_factor must be >= 2 * launch_factor")
        if self.max_steps_per_walker < 1:
            raise ValueError("max_steps_per_walker must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def launch_radius(cluster_or_r, launch_factor: float = 2.0) -> float:
    r = cluster_or_r.bounding_radius() if isinstance(cluster_or_r, Cluster) else float(cluster_or_r)
    return launch_factor * max(r, 1.0) + 5.0


def _direction(dim: int, rng):
    if dim == 2:
        phi = 2.0 * math.pi * rng.random()
        return (math.cos(phi), math.sin(phi))
    z = 1.0 - 2.0 * rng.random()
    phi = 2.0 * math.pi * rng.random()
    rho = math.sqrt(max(0.0, 1.0 - z * z))
    return (rho * math.cos(phi), rho * math.sin(phi), z)


def _round_point(vec) -> tuple:
    # floor(x + 0.5): one fixed rounding rule, mirrored in the kernels
    return tuple(int(math.floor(v + 0.5)) for v in vec)


def launch_position(cluster: Cluster, rng, launch_factor: float = 2.0) -> tuple:
    """Unoccupied lattice point near the launch radius, direction uniform."""
    r = launch_radius(cluster, launch_factor)
    u = _direction(cluster.dim, rng)
    return _round_point(tuple(r * c for c in u))


def walk_step(pos: tuple, cluster: Cluster, rng, kill_radius: float):
    """One walker update: stick if already adjacent, else move, else kill.

    Far from the cluster (distance to the bounding radius > 4) the move is a
    long jump of length floor(d - R - 2) in a uniform direction; otherwise a
    unit step to one of the 2*dim neighbors. Returns Stuck(pos), KILLED, or
    the new position.
    """
    if cluster.is_adjacent(pos):
        return Stuck(at=tuple(pos))
    d = math.sqrt(sum(c * c for c in pos))
    big_r = cluster.bounding_radius()
    if d - big_r > 4.0:
        jump = math.floor(d - big_r - 2.0)
        u = _direction(cluster.dim, rng)
        new = _round_point(tuple(p + jump * c for p, c in zip(pos, u)))
    else:
        j = int(rng.integers(0, 2 * cluster.dim))
        step = NEIGHBOR_STEPS[cluster.dim][j]
        new = tuple(p + s for p, s in zip(pos, step))
    if sum(c * c for c in new) > kill_radius * kill_radius:
        return KILLED
    return new


@njit(cache=True)
def _grow_2d(rng, occ, half, order, start, n_total, max_r2, launch_factor, kill_factor, max_steps):
    idx = start
    while idx < n_total:
        big_r = math.sqrt(max_r2)
        if big_r + 4.0 >= half:
            return 1, idx, max_r2  # occupancy window too small, caller regrows it
        launch_r = launch_factor * max(big_r, 1.0) + 5.0
        kr2 = (kill_factor * launch_r) * (kill_factor * launch_r)
        adj2 = (big_r + 1.0001) * (big_r + 1.0001)
        relaunches = 0
        while True:
            if relaunches > RELAUNCH_BUDGET:
                return 2, idx, max_r2
            phi = 2.0 * math.pi * rng.random()
            x = np.int64(math.floor(launch_r * math.cos(phi) + 0.5))
            y = np.int64(math.floor(launch_r * math.sin(phi) + 0.5))
            steps = 0
            outcome = _WALKING
            while steps < max_steps:
                d2 = x * x + y * y
                if d2 <= adj2:
                    if (
                        occ[x + 1 + half, y + half]
                        or occ[x - 1 + half, y + half]
                        or occ[x + half, y + 1 + half]
                        or occ[x + half, y - 1 + half]
                    ):
                        outcome = _STUCK
                        break
                d = math.sqrt(d2)
                if d - big_r > 4.0:
                    jump = math.floor(d - big_r - 2.0)
                    phi = 2.0 * math.pi * rng.random()
                    x = np.int64(math.floor(x + jump * math.cos(phi) + 0.5))
                    y = np.int64(math.floor(y + jump * math.sin(phi) + 0.5))
                else:
                    j = rng.integers(0, 4)
                    if j == 0:
                        x += 1
                    elif j == 1:
                        x -= 1
                    elif j == 2:
                        y += 1
                    else:
                        y -= 1
                steps += 1
                if x * x + y * y > kr2:
                    outcome = _KILLED
                    break
            if outcome == _STUCK:
                break
            relaunches += 1
        occ[x + half, y + half] = 1
        idx += 1
        order[idx, 0] = x
        order[idx, 1] = y
        r2 = x * x + y * y
        if r2 > max_r2:
            max_r2 = r2
    return 0, idx, max_r2


@njit(cache=True)
def _grow_3d(rng, occ, half, order, start, n_total, max_r2, launch_factor, kill_factor, max_steps):
    idx = start
    while idx < n_total:
        big_r = math.sqrt(max_r2)
        if big_r + 4.0 >= half:
            return 1, idx, max_r2
        launch_r = launch_factor * max(big_r, 1.0) + 5.0
        kr2 = (kill_factor * launch_r) * (kill_factor * launch_r)
        adj2 = (big_r + 1.0001) * (big_r + 1.0001)
        relaunches = 0
        while True:
            if relaunches > RELAUNCH_BUDGET:
                return 2, idx, max_r2
            z0 = 1.0 - 2.0 * rng.random()
            phi = 2.0 * math.pi * rng.random()
            rho = math.sqrt(max(0.0, 1.0 - z0 * z0))
            x = np.int64(math.floor(launch_r * rho * math.cos(phi) + 0.5))
            y = np.int64(math.floor(launch_r * rho * math.sin(phi) + 0.5))
            z = np.int64(math.floor(launch_r * z0 + 0.5))
            steps = 0
            outcome = _WALKING
            while steps < max_steps:
                d2 = x * x + y * y + z * z
                if d2 <= adj2:
                    if (
                        occ[x + 1 + half, y + half, z + half]
                        or occ[x - 1 + half, y + half, z + half]
                        or occ[x + half, y + 1 + half, z + half]
                        or occ[x + half, y - 1 + half, z + half]
                        or occ[x + half, y + half, z + 1 + half]
                        or occ[x + half, y + half, z - 1 + half]
                    ):
                        outcome = _STUCK
                        break
                d = math.sqrt(d2)
                if d - big_r > 4.0:
                    jump = math.floor(d - big_r - 2.0)
                    w = 1.0 - 2.0 * rng.random()
                    phi = 2.0 * math.pi * rng.random()
                    rho = math.sqrt(max(0.0, 1.0 - w * w))
                    x = np.int64(math.floor(x + jump * rho * math.cos(phi) + 0.5))
                    y = np.int64(math.floor(y + jump * rho * math.sin(phi) + 0.5))
                    z = np.int64(math.floor(z + jump * w + 0.5))
                else:
                    j = rng.integers(0, 6)
                    if j == 0:
                        x += 1
                    elif j == 1:
                        x -= 1
                    elif j == 2:
                        y += 1
                    elif j == 3:
                        y -= 1
                    elif j == 4:
                        z += 1
                    else:
                        z -= 1
                steps += 1
                if x * x + y * y + z * z > kr2:
                    outcome = _KILLED
                    break
            if outcome == _STUCK:
                break
            relaunches += 1
        occ[x + half, y + half, z + half] = 1
        idx += 1
        order[idx, 0] = x
        order[idx, 1] = y
        order[idx, 2] = z
        r2 = x * x + y * y + z * z
        if r2 > max_r2:
            max_r2 = r2
    return 0, idx, max_r2


def grow(params: WalkerParams) -> tuple:
    """Grow a cluster of 1 + n_particles sites; returns (Cluster, GrowthHistory).

    Deterministic for a fixed (params, seed). Killed and exhausted walkers are
    relaunched; a particle burning through the relaunch budget raises
    GrowthStalledError.
    """
    params.validate()
    rng = make_rng(params.seed)
    kernel = _grow_2d if params.dim == 2 else _grow_3d
    n = params.n_particles
    order = np.zeros((n + 1, params.dim), dtype=np.int64)
    half = 64
    occ = np.zeros((2 * half + 1,) * params.dim, dtype=np.uint8)
    occ[(half,) * params.dim] = 1
    done = 0
    max_r2 = np.int64(0)
    while True:
        status, done, max_r2 = kernel(
            rng,
            occ,
            half,
            order,
            done,
            n,
            max_r2,
            params.launch_factor,
            params.kill_factor,
            params.max_steps_per_walker,
        )
        if status == 0:
            break
        if status == 2:
            raise GrowthStalledError(
                f"particle {done + 1} exceeded {RELAUNCH_BUDGET} relaunches"
            )
        new_half = half * 2
        big = np.zeros((2 * new_half + 1,) * params.dim, dtype=np.uint8)
        sl = tuple(slice(new_half - half, new_half + half + 1) for _ in range(params.dim))
        big[sl] = occ
        occ, half = big, new_half
    cluster = Cluster.from_order(params.dim, order, validate=False)
    return cluster, history_from_order(order)


def grow_traced(params: WalkerParams, keep_trajectories: bool = True) -> tuple:
    """Reference grower built on launch_position/walk_step.

    Consumes the same RNG stream as `grow` (used by equivalence and
    trajectory-replay tests). Returns (Cluster, GrowthHistory, trajectories)
    where trajectories[i] is the list of positions the i-th stuck walker
    visited, sticking position last.
    """
    params.validate()
    rng = make_rng(params.seed)
    cluster = Cluster(params.dim)
    trajectories = []
    for _ in range(params.n_particles):
        kill_r = params.kill_factor * launch_radius(cluster, params.launch_factor)
        relaunches = 0
        stuck_at = None
        while stuck_at is None:
            if relaunches > RELAUNCH_BUDGET:
                raise GrowthStalledError(
                    f"particle {len(cluster)} exceeded {RELAUNCH_BUDGET} relaunches"
                )
            pos = launch_position(cluster, rng, params.launch_factor)
            traj = [pos]
            steps = 0
            while steps < params.max_steps_per_walker:
                res = walk_step(pos, cluster, rng, kill_r)
                if isinstance(res, Stuck):
                    stuck_at = res.at
                    break
                steps += 1
                if res is KILLED:
                    break
                pos = res
                traj.append(pos)
            if stuck_at is None:
                relaunches += 1
        cluster.add_site(stuck_at)
        if keep_trajectories:
            trajectories.append(traj)
    order = cluster.to_array()
    return cluster, history_from_order(order), trajectories
