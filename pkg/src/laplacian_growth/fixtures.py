"""Deterministic prefractal point sets used as exact estimator oracles.

The ternary kinds (Cantor dust, Sierpinski carpet, Menger sponge) at depth d
occupy side 3^d with exactly 2^d, 8^d, 20^d points; on the matched ternary
ladder their box counts equal the construction counts, so the similarity
dimensions log2/log3, log8/log3, log20/log3 are recovered to rounding error.
FilledSquare and LatticeLine use side 2^depth for the dyadic ladder.
"""

from __future__ import annotations

import itertools

import numpy as np

from .analysis import PointSet

CANTOR_DUST_1D = "cantor_dust_1d"
SIERPINSKI_CARPET_2D = "sierpinski_carpet_2d"
MENGER_SPONGE_3D = "menger_sponge_3d"
FILLED_SQUARE = "filled_square"
LATTICE_LINE = "lattice_line"

FIXTURE_KINDS = (
    CANTOR_DUST_1D,
    SIERPINSKI_CARPET_2D,
    MENGER_SPONGE_3D,
    FILLED_SQUARE,
    LATTICE_LINE,
)

_MAX_SIDE = 2**20  # keeps packed box-count keys safely inside int64


def _ternary_cells(dim: int, keep) -> np.ndarray:
    cells = [c for c in itertools.product((0, 1, 2), repeat=dim) if keep(c)]
    return np.asarray(cells, dtype=np.int64)


def _iterate(base_cells: np.ndarray, depth: int) -> np.ndarray:
    pts = np.zeros((1, base_cells.shape[1]), dtype=np.int64)
    for _ in range(depth):
        pts = (pts[:, None, :] * 3 + base_cells[None, :, :]).reshape(-1, base_cells.shape[1])
    return pts


def generate_fixture(kind: str, depth: int) -> PointSet:
    """Exact depth-level prefractal on the lattice, anchored at the origin."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if kind == CANTOR_DUST_1D:
        if 3**depth > _MAX_SIDE:
            raise ValueError(f"depth {depth} exceeds the coordinate budget")
        cells = _ternary_cells(1, lambda c: c[0] != 1)
        return PointSet.from_points(1, _iterate(cells, depth))
    if kind == SIERPINSKI_CARPET_2D:
        if 3**depth > _MAX_SIDE:
            raise ValueError(f"depth {depth} exceeds the coordinate budget")
        cells = _ternary_cells(2, lambda c: not (c[0] == 1 and c[1] == 1))
        return PointSet.from_points(2, _iterate(cells, depth))
    if kind == MENGER_SPONGE_3D:
        if 3**depth > _MAX_SIDE:
            raise ValueError(f"depth {depth} exceeds the coordinate budget")
        cells = _ternary_cells(3, lambda c: sum(1 for v in c if v == 1) < 2)
        return PointSet.from_points(3, _iterate(cells, depth))
    if kind == FILLED_SQUARE:
        side = 2**depth
        if side > 4096:
            raise ValueError(f"depth {depth} exceeds the coordinate budget")
        ax = np.arange(side, dtype=np.int64)
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        return PointSet.from_points(2, np.stack([xx.ravel(), yy.ravel()], axis=1))
    if kind == LATTICE_LINE:
        n = 2**depth
        if n > _MAX_SIDE:
            raise ValueError(f"depth {depth} exceeds the coordinate budget")
        pts = np.zeros((n, 2), dtype=np.int64)
        pts[:, 0] = np.arange(n)
        return PointSet.from_points(2, pts)
    raise ValueError(f"unknown fixture kind {kind!r}; choose from {FIXTURE_KINDS}")
