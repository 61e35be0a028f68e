"""Occupancy grid maps: loading, inflation, distance transform, region labels.

A map is a binary raster plus a world anchoring (cell size in meters and the
world position of cell (0,0)'s center). Free space is split into a safe
region (at least `delta_m` away from every obstacle) and a transition band
hugging the obstacles; the transition cells are the unknowns of the field
synthesis. Conventions used package-wide:

  cell (i, j) center = origin + (j * cell_size, i * cell_size), row i along +y
  distances are Euclidean, between cell centers, in meters
  region adjacency and boundaries use 4-connectivity
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _kernels
from .errors import ContractError, PgmParseError


class Region(IntEnum):
    OBSTACLE = 0
    TRANSITION = 1
    SAFE = 2


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridMap:
    """Binary occupancy raster; True = occupied."""

    cells: np.ndarray
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=bool)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValueError("cells must be a nonempty 2D raster")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "cells", _freeze(cells))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def occupied_count(self) -> int:
        return int(self.cells.sum())


@dataclass(frozen=True)
class DistanceField:
    """Meters from each cell center to the nearest occupied cell center.

    All entries are +inf when the source map has no occupied cell.
    """

    dist: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dist", _freeze(np.asarray(self.dist, dtype=np.float64)))

    @property
    def height(self) -> int:
        return self.dist.shape[0]

    @property
    def width(self) -> int:
        return self.dist.shape[1]


@dataclass(frozen=True)
class RegionLabels:
    """Per-cell partition into Region.{OBSTACLE, TRANSITION, SAFE}."""

    label: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "label", _freeze(np.ascontiguousarray(self.label, dtype=np.int8)))

    @property
    def height(self) -> int:
        return self.label.shape[0]

    @property
    def width(self) -> int:
        return self.label.shape[1]

    def mask(self, region: Region) -> np.ndarray:
        return self.label == int(region)

    def count(self, region: Region) -> int:
        return int(self.mask(region).sum())


# ---------------------------------------------------------------------------
# PGM loading


class _PgmScanner:
    """Tokenizer over PGM header bytes; tracks offsets for error reporting."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_ws_and_comments(self):
        n = len(self.data)
        while self.pos < n:
            c = self.data[self.pos]
            if c in b" \t\r\n":
                self.pos += 1
            elif c == ord("#"):
                nl = self.data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def next_token(self, what: str) -> bytes:
        self.skip_ws_and_comments()
        if self.pos >= len(self.data):
            raise PgmParseError(f"unexpected end of file while reading {what}", self.pos)
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in b" \t\r\n#":
            self.pos += 1
        return self.data[start : self.pos]

    def next_int(self, what: str) -> int:
        start_scan = self.pos
        tok = self.next_token(what)
        try:
            return int(tok)
        except ValueError:
            raise PgmParseError(f"expected integer for {what}, got {tok!r}", start_scan) from None


def load_pgm(
    path,
    cell_size: float = 1.0,
    origin: tuple[float, float] = (0.0, 0.0),
    occupied_threshold: float | None = None,
) -> GridMap:
    """Load a P2 (ASCII) or P5 (binary) PGM as a binary occupancy map.

    Dark pixels are occupied: value < occupied_threshold (default maxval/2).
    Geometry (cell_size, origin) comes from the caller, not the file.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    sc = _PgmScanner(data)
    magic = sc.next_token("magic number")
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"unsupported magic {magic!r}, want P2 or P5", 0)
    width = sc.next_int("width")
    height = sc.next_int("height")
    if width <= 0 or height <= 0:
        raise PgmParseError(f"zero or negative dimensions {width}x{height}", sc.pos)
    maxval = sc.next_int("maxval")
    if not 0 < maxval <= 65535:
        raise PgmParseError(f"maxval {maxval} out of range (0, 65535]", sc.pos)

    npix = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the header from raster data.
        if sc.pos >= len(data) or data[sc.pos] not in b" \t\r\n":
            raise PgmParseError("missing whitespace before binary raster", sc.pos)
        sc.pos += 1
        bpp = 1 if maxval < 256 else 2
        need = npix * bpp
        if len(data) - sc.pos < need:
            raise PgmParseError(
                f"truncated raster: need {need} bytes, have {len(data) - sc.pos}", len(data)
            )
        raw = data[sc.pos : sc.pos + need]
        dtype = np.uint8 if bpp == 1 else np.dtype(">u2")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        pixels = np.empty(npix, dtype=np.int64)
        for k in range(npix):
            pixels[k] = sc.next_int(f"pixel {k}")

    if np.any(pixels > maxval) or np.any(pixels < 0):
        raise PgmParseError("pixel value outside [0, maxval]", sc.pos)

    thr = maxval / 2 if occupied_threshold is None else float(occupied_threshold)
    cells = (pixels < thr).reshape(height, width)
    return GridMap(cells=cells, cell_size=cell_size, origin=origin)


def grid_to_csv(gmap: GridMap, path) -> None:
    """Dump the raster as H lines of W comma-separated 0/1 integers."""
    with open(path, "w") as fh:
        for row in gmap.cells:
            fh.write(",".join("1" if c else "0" for c in row))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Geometry operations


def _edt_sq_cells(cells: np.ndarray) -> np.ndarray:
    return _kernels.active.edt_sq(cells)


def inflate(gmap: GridMap, radius_m: float) -> GridMap:
    """Dilate occupancy by a Euclidean disk of radius radius_m (meters).

    A cell becomes occupied iff some occupied input cell center lies within
    radius_m of its center; implemented as a threshold on the exact distance
    transform, which is equivalent to the per-offset disk test.
    """
    if radius_m < 0:
        raise ValueError("radius_m must be >= 0")
    if radius_m == 0.0:
        return gmap
    sq = _edt_sq_cells(gmap.cells)
    r_cells_sq = (radius_m / gmap.cell_size) ** 2
    return GridMap(cells=sq <= r_cells_sq, cell_size=gmap.cell_size, origin=gmap.origin)


def distance_transform(gmap: GridMap) -> DistanceField:
    """Exact Euclidean distance in meters to the nearest occupied cell center."""
    h, w = gmap.cells.shape
    if not gmap.cells.any():
        return DistanceField(dist=np.full((h, w), np.inf))
    sq = _edt_sq_cells(gmap.cells)
    return DistanceField(dist=np.sqrt(sq.astype(np.float64)) * gmap.cell_size)


def classify_regions(gmap: GridMap, dist: DistanceField, delta_m: float) -> RegionLabels:
    """Partition cells: occupied -> OBSTACLE, free with dist >= delta_m -> SAFE,
    remaining free cells -> TRANSITION. Ties (dist == delta_m) are SAFE."""
    if delta_m <= 0:
        raise ValueError("delta_m must be positive")
    if dist.dist.shape != gmap.cells.shape:
        raise ContractError(
            f"distance field shape {dist.dist.shape} does not match map {gmap.cells.shape}"
        )
    label = np.full(gmap.cells.shape, int(Region.TRANSITION), dtype=np.int8)
    label[gmap.cells] = int(Region.OBSTACLE)
    label[~gmap.cells & (dist.dist >= delta_m)] = int(Region.SAFE)
    return RegionLabels(label=label)


def extract_boundaries(labels: RegionLabels) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Boundary cell lists (row-major order).

    obstacle boundary: OBSTACLE cells with a non-OBSTACLE 4-neighbor, where
    map-edge neighbors count as non-obstacle. safe boundary: SAFE cells with
    a TRANSITION 4-neighbor. These are reporting/visualization views; the
    system assembly reads region membership directly.
    """
    lbl = labels.label
    h, w = lbl.shape

    pad_obs = np.zeros((h + 2, w + 2), dtype=bool)  # outside counts as non-obstacle
    pad_obs[1:-1, 1:-1] = lbl == int(Region.OBSTACLE)
    nbr_all_obs = (
        pad_obs[:-2, 1:-1] & pad_obs[2:, 1:-1] & pad_obs[1:-1, :-2] & pad_obs[1:-1, 2:]
    )
    obs_boundary = pad_obs[1:-1, 1:-1] & ~nbr_all_obs

    pad_tr = np.zeros((h + 2, w + 2), dtype=bool)
    pad_tr[1:-1, 1:-1] = lbl == int(Region.TRANSITION)
    nbr_any_tr = pad_tr[:-2, 1:-1] | pad_tr[2:, 1:-1] | pad_tr[1:-1, :-2] | pad_tr[1:-1, 2:]
    safe_boundary = (lbl == int(Region.SAFE)) & nbr_any_tr

    to_list = lambda mask: list(zip(*(idx.tolist() for idx in np.nonzero(mask))))
    return to_list(obs_boundary), to_list(safe_boundary)
