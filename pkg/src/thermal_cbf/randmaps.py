"""Seeded random occupancy maps for benchmarks, verification sweeps and tests.

All randomness flows from numpy's PCG64 (np.random.default_rng); callers
derive per-trial generators via SeedSequence.spawn, so runs replicate across
platforms for a fixed seed.
"""

from __future__ import annotations

import numpy as np

from .ogm import GridMap, Region, RegionLabels, classify_regions, distance_transform


def random_cell_map(rng: np.random.Generator, max_size: int = 30) -> tuple[GridMap, float]:
    """Small Bernoulli-noise map plus a margin; used by solver/oracle sweeps."""
    h = int(rng.integers(4, max_size + 1))
    w = int(rng.integers(4, max_size + 1))
    p = float(rng.uniform(0.04, 0.25))
    cells = rng.random((h, w)) < p
    delta_m = float(rng.uniform(1.2, 3.5))
    return GridMap(cells=cells, cell_size=1.0), delta_m


def labeled_random_map(
    rng: np.random.Generator,
    max_size: int = 30,
    require_transition: bool = True,
    require_safe: bool = False,
    require_sourced: bool = False,
    max_tries: int = 500,
):
    """Sample a labeled map satisfying the requested structural constraints.

    require_sourced additionally rejects maps where some transition component
    is walled in by obstacles (its exact solution sits at -a, so interior
    range checks don't apply there).
    """
    for _ in range(max_tries):
        gmap, delta_m = random_cell_map(rng, max_size)
        if not gmap.cells.any():
            continue
        labels = classify_regions(gmap, distance_transform(gmap), delta_m)
        if require_transition and labels.count(Region.TRANSITION) == 0:
            continue
        if require_safe and labels.count(Region.SAFE) == 0:
            continue
        if require_sourced and not transition_fully_sourced(labels):
            continue
        return gmap, labels, delta_m
    raise RuntimeError("could not sample a map matching the constraints")


def transition_fully_sourced(labels: RegionLabels) -> bool:
    """True iff every transition component touches a safe cell or the border
    (i.e. sees the +b Dirichlet source, not only obstacles)."""
    t = labels.mask(Region.TRANSITION)
    if not t.any():
        return True
    safe = labels.mask(Region.SAFE)
    h, w = t.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = safe
    adj_safe = pad[:-2, 1:-1] | pad[2:, 1:-1] | pad[1:-1, :-2] | pad[1:-1, 2:]
    border = np.zeros_like(t)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    reached = t & (adj_safe | border)
    while True:
        grown = np.zeros_like(reached)
        grown[1:, :] = reached[:-1, :]
        grown[:-1, :] |= reached[1:, :]
        grown[:, 1:] |= reached[:, :-1]
        grown[:, :-1] |= reached[:, 1:]
        nxt = reached | (t & grown)
        if np.array_equal(nxt, reached):
            break
        reached = nxt
    return bool((reached == t).all())


# ---------------------------------------------------------------------------
# Benchmark maps shaped like the production local windows: a couple of
# 0.15 m disks and 0.2 m squares, partially visible, on a 1 cm grid.

DISK_RADIUS_M = 0.15
RECT_SIDE_M = 0.2
DEFAULT_OCCUPIED_RANGE = (1600, 2200)
DEFAULT_TRANSITION_RANGE = (6200, 7000)


def _shapes_map(rng: np.random.Generator, size: int, cell_size: float, n_shapes: int = 4) -> GridMap:
    ext = size * cell_size
    xs = (np.arange(size) + 0.5) * cell_size
    gx, gy = np.meshgrid(xs, xs)
    occ = np.zeros((size, size), dtype=bool)

    def clamp(v, lo, hi):
        return min(max(v, lo), max(lo, hi))

    def band(margin):
        m = min(margin, 0.45 * ext)
        return rng.uniform(m, max(m, ext - m), size=2)

    def stamp_disk(c):
        nonlocal occ
        occ |= (gx - c[0]) ** 2 + (gy - c[1]) ** 2 <= DISK_RADIUS_M**2

    def stamp_rect(corner):
        nonlocal occ
        occ |= ((gx >= corner[0]) & (gx <= corner[0] + RECT_SIDE_M)
                & (gy >= corner[1]) & (gy <= corner[1] + RECT_SIDE_M))

    if n_shapes == 4:
        # Default layout tuned to the production window statistics: one disk
        # partially clipped at an edge (local windows crop what they see),
        # one free disk, and a rect pair close enough that their margin
        # bands partially merge.
        e = rng.uniform(0.06, 0.13)
        along = float(band(0.45)[0])
        side = int(rng.integers(4))
        stamp_disk({0: (e, along), 1: (ext - e, along), 2: (along, e), 3: (along, ext - e)}[side])
        stamp_disk(band(0.45))
        r1 = band(0.50) - 0.5 * RECT_SIDE_M
        ang = rng.uniform(0, 2 * np.pi)
        d = rng.uniform(0.45, 0.62)
        r2 = r1 + d * np.array([np.cos(ang), np.sin(ang)])
        stamp_rect((clamp(r2[0], 0.05, ext - 0.25), clamp(r2[1], 0.05, ext - 0.25)))
        stamp_rect(r1)
    else:
        for k in range(n_shapes):
            if k % 2 == 0:
                stamp_disk(band(0.2))
            else:
                stamp_rect(band(0.25) - 0.5 * RECT_SIDE_M)
    return GridMap(cells=occ, cell_size=cell_size, origin=(0.5 * cell_size, 0.5 * cell_size))


def bench_map(
    rng: np.random.Generator,
    size: int = 200,
    cell_size: float = 0.01,
    delta_m: float = 0.15,
    n_shapes: int = 4,
    occupied_range: tuple[int, int] | None = DEFAULT_OCCUPIED_RANGE,
    transition_range: tuple[int, int] | None = DEFAULT_TRANSITION_RANGE,
    max_tries: int = 2000,
) -> GridMap:
    """Random benchmark map; rejection-sampled into the requested occupied /
    transition count windows (pass None to disable a window)."""
    for _ in range(max_tries):
        gmap = _shapes_map(rng, size, cell_size, n_shapes)
        if occupied_range is not None:
            occ = gmap.occupied_count()
            if not occupied_range[0] <= occ <= occupied_range[1]:
                continue
        if transition_range is not None:
            labels = classify_regions(gmap, distance_transform(gmap), delta_m)
            tc = labels.count(Region.TRANSITION)
            if not transition_range[0] <= tc <= transition_range[1]:
                continue
        return gmap
    raise RuntimeError(
        f"no benchmark map hit occupied={occupied_range} transition={transition_range} "
        f"within {max_tries} tries"
    )
