"""Fractal dimension estimation: box counting, mass-radius fits, slicing.

All estimators run on integer lattice point sets. Box counting uses
origin-anchored boxes on a dyadic ladder (aligned grids make N(2e) <= N(e)
exact); the 3^j ladder variant exists for the ternary prefractal fixtures.
Dimension fits are ordinary least squares of log N against log(1/e) inside
an explicit scale window; for grown clusters the default window runs from
2 lattice units up to R_g/4, below/above which lattice graininess and
finite-size effects dominate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cluster import Cluster, GrowthHistory, NEIGHBOR_STEPS
from .errors import DegenerateSlicingError, InsufficientScalesError


@dataclass(frozen=True)
class PointSet:
    """Finite set of integer lattice points in 1, 2, or 3 dimensions."""

    dim: int
    points: np.ndarray  # (N, dim) int64, unique rows

    @classmethod
    def from_points(cls, dim: int, points) -> "PointSet":
        if dim not in (1, 2, 3):
            raise ValueError(f"ambient dimension must be 1, 2, or 3, got {dim}")
        pts = np.asarray(points, dtype=np.int64)
        if pts.size == 0:
            pts = pts.reshape(0, dim)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ValueError(f"expected (N, {dim}) points, got shape {pts.shape}")
        return cls(dim=dim, points=np.unique(pts, axis=0))

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ScaleSeries:
    """Paired (box edge epsilon, occupied box count N(epsilon)) samples."""

    epsilons: np.ndarray
    counts: np.ndarray

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write("epsilon,count\n")
            for e, c in zip(self.epsilons, self.counts):
                f.write(f"{e:g},{int(c)}\n")


@dataclass(frozen=True)
class DimensionEstimate:
    """Fitted dimension with slope standard error, fit quality, and scale window."""

    d: float
    stderr: float
    r2: float
    eps_min: float
    eps_max: float
    n_scales: int

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "stderr": self.stderr,
            "r2": self.r2,
            "eps_min": self.eps_min,
            "eps_max": self.eps_max,
            "n_scales": self.n_scales,
        }


def dyadic_ladder(eps_max: float) -> np.ndarray:
    """Box sizes 1, 2, 4, ... up to eps_max (inclusive)."""
    if eps_max < 1:
        raise ValueError("eps_max must be >= 1")
    top = int(math.floor(math.log2(eps_max) + 1e-9))
    return 2 ** np.arange(0, top + 1, dtype=np.int64)


def ternary_ladder(eps_max: float) -> np.ndarray:
    """Box sizes 1, 3, 9, ... up to eps_max; matches the 3^n fixtures."""
    if eps_max < 1:
        raise ValueError("eps_max must be >= 1")
    top = int(math.floor(math.log(eps_max) / math.log(3) + 1e-9))
    return 3 ** np.arange(0, top + 1, dtype=np.int64)


def default_window(rg: float) -> tuple:
    """Default fitting window for grown clusters: 2 lattice units up to R_g/4."""
    return (2.0, max(8.0, rg / 4.0))


def extract_interface(cluster: Cluster) -> PointSet:
    """Occupied sites having at least one empty lattice neighbor."""
    coords = cluster.to_array()
    mins = coords.min(axis=0)
    shifted = coords - mins + 1  # 1-site empty margin on every face
    shape = tuple(shifted.max(axis=0) + 2)
    occ = np.zeros(shape, dtype=bool)
    occ[tuple(shifted.T)] = True
    filled = np.ones(shape, dtype=bool)
    for axis in range(cluster.dim):
        filled &= np.roll(occ, 1, axis=axis)
        filled &= np.roll(occ, -1, axis=axis)
    surface = occ & ~filled
    pts = np.argwhere(surface) - 1 + mins
    return PointSet.from_points(cluster.dim, pts)


def _count_boxes(points: np.ndarray, eps: int) -> int:
    boxes = points // eps
    boxes = boxes - boxes.min(axis=0)
    if boxes.shape[1] == 1:
        keys = boxes[:, 0]
    else:
        spans = boxes.max(axis=0).astype(np.int64) + 1
        keys = boxes[:, 0]
        for j in range(1, boxes.shape[1]):
            keys = keys * spans[j] + boxes[:, j]
    return int(np.unique(keys).size)


def _validated_ladder(ladder, base: int) -> np.ndarray:
    eps = np.asarray(ladder, dtype=np.int64)
    if eps.size == 0:
        raise ValueError("ladder must be nonempty")
    if np.any(np.diff(eps) <= 0):
        raise ValueError("ladder must be strictly increasing")
    for e in eps:
        k = round(math.log(e) / math.log(base))
        if base**k != e:
            raise ValueError(f"ladder entry {e} is not a power of {base}")
    return eps


def _box_count(points: PointSet, eps: np.ndarray) -> ScaleSeries:
    if len(points) == 0:
        raise ValueError("point set must be nonempty")
    counts = np.array([_count_boxes(points.points, int(e)) for e in eps], dtype=np.int64)
    return ScaleSeries(epsilons=eps.astype(np.float64), counts=counts)


def box_count(points: PointSet, ladder) -> ScaleSeries:
    """Count origin-anchored occupied boxes over a dyadic ladder."""
    return _box_count(points, _validated_ladder(ladder, 2))


def box_count_ternary(points: PointSet, ladder) -> ScaleSeries:
    """Ternary-ladder box counting for the 3^n prefractal fixtures."""
    return _box_count(points, _validated_ladder(ladder, 3))


def _ols(x: np.ndarray, y: np.ndarray):
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    if sxx == 0:
        raise ValueError("degenerate fit: all scales identical")
    slope = ((x - xm) * (y - ym)).sum() / sxx
    resid = y - (ym + slope * (x - xm))
    ssr = (resid**2).sum()
    sst = ((y - ym) ** 2).sum()
    stderr = math.sqrt(max(ssr, 0.0) / (n - 2) / sxx) if n > 2 else 0.0
    r2 = 1.0 if sst == 0 else max(0.0, 1.0 - ssr / sst)
    return slope, stderr, r2


def fit_dimension(series: ScaleSeries, window) -> DimensionEstimate:
    """Slope of log N(e) vs log(1/e) over the in-window scales."""
    eps_min, eps_max = window
    mask = (series.epsilons >= eps_min) & (series.epsilons <= eps_max)
    if mask.sum() < 3:
        raise InsufficientScalesError(
            f"{int(mask.sum())} scales inside window [{eps_min}, {eps_max}], need >= 3"
        )
    eps = series.epsilons[mask]
    counts = series.counts[mask]
    slope, stderr, r2 = _ols(-np.log(eps), np.log(counts.astype(np.float64)))
    return DimensionEstimate(
        d=float(slope),
        stderr=float(stderr),
        r2=float(r2),
        eps_min=float(eps.min()),
        eps_max=float(eps.max()),
        n_scales=int(mask.sum()),
    )


def mass_radius_dimension(history: GrowthHistory, window_fraction=(0.05, 0.5)) -> DimensionEstimate:
    """Mass-radius exponent: slope of log n against log R_g.

    Fits records whose R_g lies in [lo, hi] x final R_g; the early transient
    and the finite-size tail are excluded by the window.
    """
    if len(history) < 100:
        raise InsufficientScalesError(f"history has {len(history)} records, need >= 100")
    lo, hi = window_fraction
    rg_final = history.rg[-1]
    mask = (history.rg >= lo * rg_final) & (history.rg <= hi * rg_final) & (history.rg > 0)
    if mask.sum() < 3:
        raise InsufficientScalesError("fewer than 3 history records inside the R_g window")
    x = np.log(history.rg[mask])
    y = np.log(history.n[mask].astype(np.float64))
    slope, stderr, r2 = _ols(x, y)
    return DimensionEstimate(
        d=float(slope),
        stderr=float(stderr),
        r2=float(r2),
        eps_min=float(lo * rg_final),
        eps_max=float(hi * rg_final),
        n_scales=int(mask.sum()),
    )


def slice_points(points: PointSet, drop_axes, offsets, thickness: int = 1) -> PointSet:
    """Intersect with an axis-aligned plane/line of the given thickness.

    Keeps points whose dropped-axis coordinates lie in [offset, offset+thickness)
    and removes those coordinates. The result may be empty.
    """
    drop = list(drop_axes)
    offs = list(offsets)
    if len(drop) != len(set(drop)):
        raise ValueError("drop_axes must be distinct")
    if not 1 <= len(drop) < points.dim:
        raise ValueError("must drop between 1 and dim-1 axes")
    if any(a < 0 or a >= points.dim for a in drop):
        raise ValueError("drop axis out of range")
    if len(offs) != len(drop):
        raise ValueError("one offset per dropped axis")
    if thickness < 1:
        raise ValueError("thickness must be >= 1")
    pts = points.points
    keep = np.ones(len(pts), dtype=bool)
    for axis, off in zip(drop, offs):
        keep &= (pts[:, axis] >= off) & (pts[:, axis] < off + thickness)
    kept_axes = [a for a in range(points.dim) if a not in drop]
    return PointSet.from_points(points.dim - len(drop), pts[keep][:, kept_axes])


def _slice_offsets(points: PointSet, axis: int, n_slices: int) -> np.ndarray:
    """Evenly spaced offsets through the central 50% of the extent along axis."""
    lo = points.points[:, axis].min()
    hi = points.points[:, axis].max()
    span = hi - lo
    a = lo + 0.25 * span
    b = lo + 0.75 * span
    return np.unique(np.round(np.linspace(a, b, n_slices)).astype(np.int64))


def sliced_dimension(
    points: PointSet,
    codim: int,
    n_slices: int,
    ladder=None,
    window=None,
    thickness: int = 1,
) -> DimensionEstimate:
    """Full-space dimension from codimension-1 (plane) or -2 (line) slices.

    Unit-thickness slices are taken at n_slices evenly spaced offsets through
    the central 50% of the extent along every dropped axis (all axis choices
    are used; codim 2 pairs offsets as a grid). Each nonempty slice is
    box-counted and fitted; the weighted mean of the slice dimensions (weights
    = slice point counts) plus the codimension is returned, with the standard
    error propagated from the per-slice fits.
    """
    if points.dim != 3:
        raise ValueError("slicing requires a 3D point set")
    if codim not in (1, 2):
        raise ValueError("codim must be 1 or 2")
    if n_slices < 3:
        raise ValueError("n_slices must be >= 3")
    if ladder is None:
        extent = int((points.points.max(axis=0) - points.points.min(axis=0)).max())
        ladder = dyadic_ladder(max(8, extent // 2))
    if window is None:
        window = (float(np.min(ladder)), float(np.max(ladder)))

    if codim == 1:
        drops = [(0,), (1,), (2,)]
    else:
        drops = [(0, 1), (0, 2), (1, 2)]

    fits = []  # (weight, d, stderr, r2)
    n_nonempty = 0
    for drop in drops:
        per_axis = [_slice_offsets(points, a, n_slices) for a in drop]
        for offs in itertools.product(*per_axis):
            sl = slice_points(points, drop, offs, thickness=thickness)
            if len(sl) == 0:
                continue
            n_nonempty += 1
            try:
                est = fit_dimension(box_count(sl, ladder), window)
            except (InsufficientScalesError, ValueError):
                continue
            fits.append((float(len(sl)), est.d, est.stderr, est.r2))
    if n_nonempty == 0:
        raise DegenerateSlicingError("every slice is empty")
    if not fits:
        raise DegenerateSlicingError("no slice produced a usable fit")
    w = np.array([f[0] for f in fits])
    d = np.array([f[1] for f in fits])
    se = np.array([f[2] for f in fits])
    wsum = w.sum()
    d_mean = float((w * d).sum() / wsum)
    stderr = float(np.sqrt(((w * se) ** 2).sum()) / wsum)
    r2 = float((w * np.array([f[3] for f in fits])).sum() / wsum)
    eps = np.asarray(ladder, dtype=np.float64)
    in_win = eps[(eps >= window[0]) & (eps <= window[1])]
    return DimensionEstimate(
        d=d_mean + codim,
        stderr=stderr,
        r2=r2,
        eps_min=float(in_win.min()),
        eps_max=float(in_win.max()),
        n_scales=int(in_win.size),
    )
