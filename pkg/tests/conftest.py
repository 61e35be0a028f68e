"""Shared fixtures and independent oracles.

Oracles here deliberately avoid the production code paths: brute-force
distance scans, a dense double-loop stencil assembler, and a from-scratch
bilinear formula. Expected values frozen into tests were computed with
these.
"""

import numpy as np
import pytest

from thermal_cbf import BoundaryValues, GridMap, Region, assemble, classify_regions, distance_transform, index_unknowns


@pytest.fixture
def ring_map():
    """7x7 map with a 2x2 obstacle block; margin 1.2 cells labels exactly the
    4-adjacent ring as transition (the classic small worked example)."""
    cells = np.zeros((7, 7), dtype=bool)
    cells[2:4, 2:4] = True
    return GridMap(cells=cells, cell_size=1.0)


RING_DELTA = 1.2

# Unknowns of the ring fixture in row-major order (0-based).
RING_CELLS = [(1, 2), (1, 3), (2, 1), (2, 4), (3, 1), (3, 4), (4, 2), (4, 3)]

# Its stencil matrix: coupled pairs (0,1), (2,4), (3,5), (6,7).
RING_MATRIX = np.array(
    [
        [4, -1, 0, 0, 0, 0, 0, 0],
        [-1, 4, 0, 0, 0, 0, 0, 0],
        [0, 0, 4, 0, -1, 0, 0, 0],
        [0, 0, 0, 4, 0, -1, 0, 0],
        [0, 0, -1, 0, 4, 0, 0, 0],
        [0, 0, 0, -1, 0, 4, 0, 0],
        [0, 0, 0, 0, 0, 0, 4, -1],
        [0, 0, 0, 0, 0, 0, -1, 4],
    ],
    dtype=float,
)


def ring_system(a=1.0, b=1.0):
    cells = np.zeros((7, 7), dtype=bool)
    cells[2:4, 2:4] = True
    gmap = GridMap(cells=cells, cell_size=1.0)
    labels = classify_regions(gmap, distance_transform(gmap), RING_DELTA)
    index = index_unknowns(labels)
    return assemble(labels, index, BoundaryValues(a, b)), labels, index


def single_cell_system(a=1.0, b=1.0):
    """3x3 all-occupied except the center: one unknown enclosed by obstacles."""
    cells = np.ones((3, 3), dtype=bool)
    cells[1, 1] = False
    gmap = GridMap(cells=cells, cell_size=1.0)
    labels = classify_regions(gmap, distance_transform(gmap), 1.5)
    index = index_unknowns(labels)
    return assemble(labels, index, BoundaryValues(a, b))


# ---------------------------------------------------------------------------
# Oracles


def brute_force_distance(cells: np.ndarray, cell_size: float) -> np.ndarray:
    """O(N^2) nearest-occupied scan over all cell pairs."""
    h, w = cells.shape
    oi, oj = np.nonzero(cells)
    out = np.full((h, w), np.inf)
    if oi.size == 0:
        return out
    for i in range(h):
        for j in range(w):
            d2 = (oi - i) ** 2 + (oj - j) ** 2
            out[i, j] = np.sqrt(d2.min()) * cell_size
    return out


def dense_assemble(label: np.ndarray, a: float, b_val: float):
    """Double-loop reference assembler over all cells; returns (A, rhs)."""
    h, w = label.shape
    cells = [(i, j) for i in range(h) for j in range(w) if label[i, j] == int(Region.TRANSITION)]
    pos = {c: k for k, c in enumerate(cells)}
    n = len(cells)
    mat = np.zeros((n, n))
    rhs = np.zeros(n)
    for k, (i, j) in enumerate(cells):
        mat[k, k] = 4.0
        for di, dj in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            ni, nj = i + di, j + dj
            if not (0 <= ni < h and 0 <= nj < w):
                rhs[k] += b_val
            elif label[ni, nj] == int(Region.OBSTACLE):
                rhs[k] -= a
            elif label[ni, nj] == int(Region.SAFE):
                rhs[k] += b_val
            else:
                mat[k, pos[(ni, nj)]] = -1.0
    return mat, rhs


def bilinear_reference(raster: np.ndarray, cell_size: float, origin, x: float, y: float) -> float:
    """Independent bilinear interpolation between cell centers (clamped to the
    outermost center row/column inside the half-cell rim)."""
    h, w = raster.shape
    fx = (x - origin[0]) / cell_size
    fy = (y - origin[1]) / cell_size
    j0 = min(max(int(np.floor(fx)), 0), max(w - 2, 0))
    i0 = min(max(int(np.floor(fy)), 0), max(h - 2, 0))
    tx = min(max(fx - j0, 0.0), 1.0)
    ty = min(max(fy - i0, 0.0), 1.0)
    j1 = min(j0 + 1, w - 1)
    i1 = min(i0 + 1, h - 1)
    return float(
        (1 - ty) * ((1 - tx) * raster[i0, j0] + tx * raster[i0, j1])
        + ty * ((1 - tx) * raster[i1, j0] + tx * raster[i1, j1])
    )
