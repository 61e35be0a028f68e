"""Safety field synthesis and continuous sampling.

The pipeline inflates the map by the robot radius, labels regions against
the safety margin, assembles the stencil system over the transition band and
solves it, then scatters values into a full raster: -a on obstacle cells,
b_val on safe cells, solved values in between. A map with no occupied cell
short-circuits to a constant b_val field with no solver call.

Sampling convention (shared package-wide): cell (i, j) center sits at
origin + (j * cell_size, i * cell_size) with row i increasing along +y.
Values and gradients between cell centers come from bilinear interpolation;
inside the half-cell rim outside the outermost centers, the interpolation is
clamped to the nearest center row/column.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .errors import OutOfBoundsError, SolverFailure
from .krylov import SolveStats, SolverConfig, solve
from .laplace import BoundaryValues, assemble, index_unknowns
from .ogm import GridMap, Region, RegionLabels, _freeze, classify_regions, distance_transform, inflate


@dataclass(frozen=True)
class SynthesisParams:
    a: float = 1.0
    b_val: float = 1.0
    delta_m: float = 0.15
    robot_radius_m: float = 0.0
    solver: str = "gmres"
    solver_cfg: SolverConfig = dc_field(default_factory=SolverConfig)

    def __post_init__(self):
        BoundaryValues(self.a, self.b_val)  # range checks
        if not self.delta_m > 0:
            raise ValueError("delta_m must be positive")
        if self.robot_radius_m < 0:
            raise ValueError("robot_radius_m must be >= 0")
        if self.solver not in ("gmres", "bicgstab"):
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass
class SynthesisStats:
    """Per-stage wall times (ms) and the solver outcome for one synthesis."""

    occupied_cells: int = 0
    n_unknowns: int = 0
    inflate_ms: float = 0.0
    distance_ms: float = 0.0
    classify_ms: float = 0.0
    assemble_ms: float = 0.0
    solve_ms: float = 0.0
    scatter_ms: float = 0.0
    total_ms: float = 0.0
    backend: str = ""
    solver: str = ""
    solve: SolveStats = dc_field(default_factory=lambda: SolveStats(0, 0.0, True, 0.0))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "occupied_cells", "n_unknowns", "inflate_ms", "distance_ms", "classify_ms",
            "assemble_ms", "solve_ms", "scatter_ms", "total_ms", "backend", "solver",
        )}
        d["solve"] = self.solve.to_dict()
        return d


@dataclass(frozen=True)
class SafetyField:
    """Full-raster safety values with labels and synthesis metadata.

    grad_x / grad_y are per-cell central differences of h (one-sided at the
    raster edges), precomputed so gradient sampling is pure interpolation.
    """

    h: np.ndarray
    labels: RegionLabels
    cell_size: float
    origin: tuple[float, float]
    params: SynthesisParams
    stats: SynthesisStats
    grad_x: np.ndarray
    grad_y: np.ndarray

    def __post_init__(self):
        for name in ("h", "grad_x", "grad_y"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=np.float64)))

    @property
    def height(self) -> int:
        return self.h.shape[0]

    @property
    def width(self) -> int:
        return self.h.shape[1]


def _now_ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3


def _gradient_rasters(h: np.ndarray, cell_size: float):
    """Central differences (one-sided at edges); zero along size-1 axes."""
    gx = np.gradient(h, cell_size, axis=1) if h.shape[1] >= 2 else np.zeros_like(h)
    gy = np.gradient(h, cell_size, axis=0) if h.shape[0] >= 2 else np.zeros_like(h)
    return gx, gy


def synthesize(gmap: GridMap, params: SynthesisParams, backend=None) -> SafetyField:
    """Run the full pipeline on one occupancy map.

    Raises SolverFailure (stats attached) when the iterative solve does not
    converge; the caller decides whether to reuse a previous field or stop.
    """
    stats = SynthesisStats(backend=(backend or _kernels.active).NAME, solver=params.solver)
    t_total = time.perf_counter()
    h_arr = np.empty(gmap.cells.shape)

    stats.occupied_cells = gmap.occupied_count()
    if stats.occupied_cells == 0:
        # No obstacle in range: the field is the safe value everywhere.
        h_arr.fill(params.b_val)
        labels = RegionLabels(label=np.full(gmap.cells.shape, int(Region.SAFE), dtype=np.int8))
        stats.total_ms = _now_ms(t_total)
        gz = np.zeros_like(h_arr)
        return SafetyField(h_arr, labels, gmap.cell_size, gmap.origin, params, stats, gz, gz)

    t0 = time.perf_counter()
    work = inflate(gmap, params.robot_radius_m)
    stats.inflate_ms = _now_ms(t0)

    t0 = time.perf_counter()
    dist = distance_transform(work)
    stats.distance_ms = _now_ms(t0)

    t0 = time.perf_counter()
    labels = classify_regions(work, dist, params.delta_m)
    stats.classify_ms = _now_ms(t0)

    t0 = time.perf_counter()
    index = index_unknowns(labels)
    system = assemble(labels, index, BoundaryValues(params.a, params.b_val))
    stats.assemble_ms = _now_ms(t0)
    stats.n_unknowns = index.count

    if index.count > 0:
        solution, solve_stats = solve(system, params.solver, params.solver_cfg, backend=backend)
        stats.solve = solve_stats
        stats.solve_ms = solve_stats.wall_time * 1e3
        if not solve_stats.converged:
            stats.total_ms = _now_ms(t_total)
            err = SolverFailure(
                f"{params.solver} stalled at relative residual "
                f"{solve_stats.final_relative_residual:.3e} after {solve_stats.iterations} iterations",
                stats=solve_stats,
            )
            err.synthesis_stats = stats
            raise err
    else:
        solution = np.empty(0)

    t0 = time.perf_counter()
    h_arr.fill(params.b_val)
    h_arr[labels.mask(Region.OBSTACLE)] = -params.a
    if index.count > 0:
        ti, tj = index.cells[:, 0], index.cells[:, 1]
        h_arr[ti, tj] = np.clip(solution, -params.a, params.b_val)
    gx, gy = _gradient_rasters(h_arr, gmap.cell_size)
    stats.scatter_ms = _now_ms(t0)
    stats.total_ms = _now_ms(t_total)
    return SafetyField(h_arr, labels, gmap.cell_size, gmap.origin, params, stats, gx, gy)


# ---------------------------------------------------------------------------
# Continuous sampling


def _bilinear_weights(field: SafetyField, p):
    x, y = np.asarray(p[0], dtype=np.float64), np.asarray(p[1], dtype=np.float64)
    h, w = field.h.shape
    cs = field.cell_size
    ox, oy = field.origin
    half = 0.5 * cs
    lo_x, hi_x = ox - half, ox + (w - 0.5) * cs
    lo_y, hi_y = oy - half, oy + (h - 0.5) * cs
    if np.any(x < lo_x) or np.any(x > hi_x) or np.any(y < lo_y) or np.any(y > hi_y):
        raise OutOfBoundsError(
            f"position outside field extent x:[{lo_x:.6g},{hi_x:.6g}] y:[{lo_y:.6g},{hi_y:.6g}]"
        )
    fx = (x - ox) / cs
    fy = (y - oy) / cs
    j0 = np.clip(np.floor(fx), 0, max(w - 2, 0)).astype(np.int64)
    i0 = np.clip(np.floor(fy), 0, max(h - 2, 0)).astype(np.int64)
    tx = np.clip(fx - j0, 0.0, 1.0)
    ty = np.clip(fy - i0, 0.0, 1.0)
    j1 = np.minimum(j0 + 1, w - 1)
    i1 = np.minimum(i0 + 1, h - 1)
    return i0, i1, j0, j1, tx, ty


def _bilinear(raster: np.ndarray, i0, i1, j0, j1, tx, ty):
    v00 = raster[i0, j0]
    v01 = raster[i0, j1]
    v10 = raster[i1, j0]
    v11 = raster[i1, j1]
    return (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11)


def value_at(field: SafetyField, p) -> float:
    """Bilinear sample of h at world position p = (x, y). Exact at centers."""
    i0, i1, j0, j1, tx, ty = _bilinear_weights(field, p)
    out = _bilinear(field.h, i0, i1, j0, j1, tx, ty)
    return float(out) if np.ndim(out) == 0 else out


def gradient_at(field: SafetyField, p):
    """(dh/dx, dh/dy) at p: bilinear interpolation of the per-cell
    central-difference rasters."""
    i0, i1, j0, j1, tx, ty = _bilinear_weights(field, p)
    gx = _bilinear(field.grad_x, i0, i1, j0, j1, tx, ty)
    gy = _bilinear(field.grad_y, i0, i1, j0, j1, tx, ty)
    if np.ndim(gx) == 0:
        return float(gx), float(gy)
    return gx, gy


def harmonic_residual(field: SafetyField) -> float:
    """Max |4*h - sum of neighbors| over transition cells, with out-of-map
    neighbors reading as b_val. Zero when there are no transition cells."""
    mask = field.labels.mask(Region.TRANSITION)
    if not mask.any():
        return 0.0
    h, w = field.h.shape
    pad = np.full((h + 2, w + 2), field.params.b_val)
    pad[1:-1, 1:-1] = field.h
    nbr_sum = pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:]
    res = np.abs(4.0 * field.h - nbr_sum)
    return float(res[mask].max())


# ---------------------------------------------------------------------------
# File interchange (consumed by the viz component)


def write_field_csv(field: SafetyField, csv_path, sidecar_path=None) -> None:
    """H lines of W %.9g floats; optional JSON sidecar with synthesis info."""
    with open(csv_path, "w") as fh:
        for row in field.h:
            fh.write(",".join(f"{v:.9g}" for v in row))
            fh.write("\n")
    if sidecar_path is not None:
        write_field_sidecar(field, sidecar_path)


def write_field_sidecar(field: SafetyField, path) -> None:
    doc = {
        "a": field.params.a,
        "b": field.params.b_val,
        "delta_m": field.params.delta_m,
        "cell_size": field.cell_size,
        "origin": list(field.origin),
        "height": field.height,
        "width": field.width,
        "stats": field.stats.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
