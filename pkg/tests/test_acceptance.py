"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its elapsed time (run with -s to see them inline).

Budgets are asserted; they assume a commodity desktop CPU and the compiled
kernel backend (the default when built).
"""

import contextlib
import math
import time

import numpy as np
import pytest

from thermal_cbf import (
    ControlInput2D,
    FilterParams,
    GridMap,
    Region,
    SolverConfig,
    SynthesisParams,
    alpha,
    bicgstab,
    dense_oracle_solve,
    filter_control,
    gmres,
    gradient_at,
    harmonic_residual,
    jacobi_oracle,
    synthesize,
    value_at,
)
from thermal_cbf.laplace import BoundaryValues, assemble, index_unknowns
from thermal_cbf.randmaps import bench_map, labeled_random_map
from thermal_cbf.scenarios import scenario_path
from thermal_cbf.sim import load_scenario, metrics, run_episode
from conftest import RING_MATRIX, ring_system


@contextlib.contextmanager
def criterion(name: str, budget_s: float):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"FAIL {name} ({time.perf_counter() - t0:.2f} s)")
        raise
    elapsed = time.perf_counter() - t0
    print(f"PASS {name} ({elapsed:.2f} s, budget {budget_s:.0f} s)")
    assert elapsed < budget_s, f"{name} exceeded its {budget_s} s budget"


def test_criterion_1_worked_example_exactness():
    """8x8 ring system: exact matrix and rhs, all solvers at 1/3."""
    with criterion("worked-example exactness", 1.0):
        system, _, _ = ring_system(a=1.0, b=1.0)
        assert np.array_equal(system.to_dense(), RING_MATRIX)
        assert np.array_equal(np.asarray(system.rhs), np.ones(8))
        cfg = SolverConfig(tol=1e-10)
        for solution in (
            dense_oracle_solve(system),
            gmres(system, cfg)[0],
            bicgstab(system, cfg)[0],
            jacobi_oracle(system, tol=1e-11),
        ):
            assert np.max(np.abs(solution - 1.0 / 3.0)) <= 1e-8


def test_criterion_2_oracle_equivalence():
    """200 random maps up to 30x30 (N <= 500): GMRES, BiCGSTAB and Jacobi all
    match dense Gaussian elimination componentwise within 1e-6."""
    with criterion("oracle equivalence", 30.0):
        rng = np.random.default_rng(202)
        cfg = SolverConfig(tol=1e-10)
        done = 0
        while done < 200:
            _, labels, _ = labeled_random_map(rng, max_size=30)
            index = index_unknowns(labels)
            if not 1 <= index.count <= 500:
                continue
            a, b = float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.3, 2.0))
            system = assemble(labels, index, BoundaryValues(a, b))
            reference = dense_oracle_solve(system)
            xg, sg = gmres(system, cfg)
            xb, sb = bicgstab(system, cfg)
            xj = jacobi_oracle(system, tol=1e-9)
            assert sg.converged and sb.converged
            assert np.max(np.abs(xg - reference)) <= 1e-6
            assert np.max(np.abs(xb - reference)) <= 1e-6
            assert np.max(np.abs(xj - reference)) <= 1e-6
            done += 1


def test_criterion_3_harmonic_residual():
    """Every converged field satisfies the five-point stencil to 1e-6 (a+b)."""
    with criterion("harmonic residual", 10.0):
        rng = np.random.default_rng(303)
        for _ in range(80):
            gmap, _, delta = labeled_random_map(rng, max_size=30)
            a, b = float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.3, 2.0))
            field = synthesize(gmap, SynthesisParams(a=a, b_val=b, delta_m=delta))
            assert harmonic_residual(field) <= 1e-6 * (a + b)
        for seed in range(5):  # production-size maps as well
            gmap = bench_map(np.random.default_rng(seed))
            field = synthesize(gmap, SynthesisParams(delta_m=0.15))
            assert harmonic_residual(field) <= 1e-6 * 2.0


def test_criterion_4_maximum_principle():
    """100 random maps with both obstacle and safe cells: transition values
    strictly inside (-a, b) with slack >= 10 tol. Components walled in by
    obstacles sit exactly at -a by construction, so sampling requires every
    transition component to see the +b source (anything else makes the
    criterion vacuously false)."""
    with criterion("maximum principle", 20.0):
        rng = np.random.default_rng(404)
        tol = 1e-8
        for _ in range(100):
            gmap, _, delta = labeled_random_map(
                rng, max_size=30, require_safe=True, require_sourced=True)
            a, b = float(rng.uniform(0.5, 1.5)), float(rng.uniform(0.5, 1.5))
            field = synthesize(gmap, SynthesisParams(a=a, b_val=b, delta_m=delta,
                                                     solver_cfg=SolverConfig(tol=tol)))
            tvals = field.h[field.labels.mask(Region.TRANSITION)]
            assert tvals.size > 0
            assert np.all(tvals > -a + 10 * tol)
            assert np.all(tvals < b - 10 * tol)


def test_criterion_5_timing_window():
    """50 production-shaped maps (200x200, occupied 1600-2200, transition
    6200-7000): median assembly + solve <= 50 ms. Reference baseline for the
    same workload class: 4.98 ms + 4.33 ms = 9.31 ms."""
    with criterion("timing window", 60.0):
        params = SynthesisParams(delta_m=0.15, solver="gmres")
        streams = np.random.SeedSequence(505).spawn(50)
        totals = []
        for ss in streams:
            gmap = bench_map(np.random.default_rng(ss))
            assert 1600 <= gmap.occupied_count() <= 2200
            field = synthesize(gmap, params)
            assert 6200 <= field.stats.n_unknowns <= 7000
            totals.append(field.stats.assemble_ms + field.stats.solve_ms)
        median = float(np.median(totals))
        print(f"  median assembly+solve {median:.2f} ms (bar 50 ms, baseline 9.31 ms)")
        assert median <= 50.0


def test_criterion_6_closed_loop_safety():
    """Bundled sequential-goal scenario: all 3 goals, min sampled h > 0,
    zero ground-truth collisions."""
    with criterion("closed-loop safety", 120.0):
        scn = load_scenario(scenario_path("paperlike.json"))
        log = run_episode(scn)
        m = metrics(log, scn)
        print(f"  goals {m.goals_reached}/3, min h {m.min_h:.4f}, "
              f"collisions {m.collisions}, steps {m.steps}")
        assert m.goals_reached == 3
        assert m.min_h > 0
        assert m.collisions == 0


def test_criterion_7_filter_optimality():
    """1e5 random instances: exact KKT conditions and no random feasible
    sample beats the returned input, violations bounded by 1e-10. The cap is
    set huge so outputs are the pre-clamp optimizers the checks apply to."""
    with criterion("filter optimality", 10.0):
        rng = np.random.default_rng(707)
        params = FilterParams(gamma=0.15, v_max=1e9)
        n = 100_000
        u_noms = rng.uniform(-1, 1, size=(n, 2))
        hs = rng.uniform(-1, 1, size=n)
        grads = rng.uniform(-5, 5, size=(n, 2))
        samples = rng.uniform(-4, 4, size=(16, 2))  # shared candidate pool
        for k in range(n):
            u_nom = ControlInput2D(u_noms[k, 0], u_noms[k, 1])
            out = filter_control(u_nom, hs[k], grads[k], params)
            g = grads[k]
            us = np.array([out.u.vx, out.u.vy])
            bound = -alpha(hs[k], params.gamma)
            assert not out.clamped
            if out.constraint_active:
                scale = max(1.0, abs(float(g @ u_noms[k])))
                assert abs(g @ us - bound) <= 1e-10 * scale  # on the boundary
                d = us - u_noms[k]
                cross = d[0] * g[1] - d[1] * g[0]
                assert abs(cross) <= 1e-10 * max(1.0, np.linalg.norm(g))  # parallel to grad
            # minimality against the feasible candidates
            feas = samples[samples @ g >= bound]
            if feas.size:
                best = np.min(np.sum((feas - u_noms[k]) ** 2, axis=1))
                assert np.sum((us - u_noms[k]) ** 2) <= best + 1e-10


def test_criterion_8_gradient_consistency():
    """1e4 random interior cell centers of synthesized fields: gradient_at
    equals the +-1e-4 m central difference of value_at within 1e-3. Centers
    are where the comparison is well-posed: the value interpolant kinks on
    the center grid lines, and a symmetric difference straddling the kink
    reproduces exactly the per-cell central difference being interpolated."""
    with criterion("gradient consistency", 10.0):
        rng = np.random.default_rng(808)
        fields = []
        for _ in range(5):
            gmap, _, delta = labeled_random_map(rng, max_size=30)
            fields.append(synthesize(gmap, SynthesisParams(delta_m=delta)))
        fields.append(synthesize(bench_map(np.random.default_rng(3)),
                                 SynthesisParams(delta_m=0.15)))
        eps = 1e-4
        checked = 0
        while checked < 10_000:
            field = fields[int(rng.integers(len(fields)))]
            hgt, wid = field.h.shape
            if hgt < 3 or wid < 3:
                continue
            i = int(rng.integers(1, hgt - 1))
            j = int(rng.integers(1, wid - 1))
            x = field.origin[0] + j * field.cell_size
            y = field.origin[1] + i * field.cell_size
            gx, gy = gradient_at(field, (x, y))
            fd_x = (value_at(field, (x + eps, y)) - value_at(field, (x - eps, y))) / (2 * eps)
            fd_y = (value_at(field, (x, y + eps)) - value_at(field, (x, y - eps))) / (2 * eps)
            assert abs(gx - fd_x) <= 1e-3
            assert abs(gy - fd_y) <= 1e-3
            checked += 1
