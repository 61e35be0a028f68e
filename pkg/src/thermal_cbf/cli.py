"""Command-line interface.

Subcommands:
  synth     PGM map -> safety field CSV + stats JSON
  simulate  scenario JSON -> episode output directory
  bench     random-map synthesis benchmark (rows CSV + summary JSON)
  verify    oracle and property sweeps with failure replay files

Exit codes: 0 success; 2 argument, parse or validation errors; 3 solver
non-convergence in synth; 4 simulate episode that missed its goals or
collided; 5 verify property failure. Commands keep writing their
machine-readable outputs on the failure exits.

Diagnostics go to stderr, gated by THERMAL_CBF_LOG={error,warn,info,debug}.
All randomness flows from --seed through numpy's PCG64
(numpy.random.default_rng), with per-trial streams from SeedSequence.spawn.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import _kernels
from .errors import PgmParseError, ScenarioError, SolverFailure, ThermalCbfError
from .field import SynthesisParams, harmonic_residual, synthesize, write_field_csv, write_field_sidecar
from .krylov import SolverConfig, bicgstab, gmres, jacobi_oracle
from .laplace import BoundaryValues, LinearSystem, assemble, dense_oracle_solve, index_unknowns
from .ogm import Region, load_pgm
from .randmaps import bench_map, labeled_random_map
from .sim import load_scenario, run_multi_episode, write_episode_outputs

log = logging.getLogger("thermal_cbf.cli")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

# Published reference numbers for the default bench workload, used purely as
# a comparison baseline in reports.
BASELINE = {"assembly_ms": 4.98, "solve_ms": 4.33, "total_ms": 9.31, "transition_cells": 6962.6}


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("THERMAL_CBF_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# synth


def _solver_cfg_from_args(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iters=args.max_iters, restart=args.restart)


def cmd_synth(args) -> int:
    try:
        gmap = load_pgm(args.map, cell_size=args.cell_size, origin=tuple(args.origin))
        params = SynthesisParams(
            a=args.a, b_val=args.b, delta_m=args.delta, robot_radius_m=args.robot_radius,
            solver=args.solver, solver_cfg=_solver_cfg_from_args(args),
        )
    except (PgmParseError, OSError, ValueError) as exc:
        return _fail(str(exc))

    try:
        field = synthesize(gmap, params)
    except SolverFailure as exc:
        doc = {
            "a": params.a, "b": params.b_val, "delta_m": params.delta_m,
            "cell_size": gmap.cell_size, "origin": list(gmap.origin),
            "stats": exc.synthesis_stats.to_dict(),
        }
        with open(args.stats, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"error: {exc}", file=sys.stderr)
        return 3

    write_field_csv(field, args.out)
    write_field_sidecar(field, args.stats)
    log.info("synthesized %dx%d field, %d unknowns, %.2f ms",
             field.height, field.width, field.stats.n_unknowns, field.stats.total_ms)
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    try:
        scn = load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        return _fail(str(exc))

    os.makedirs(args.out_dir, exist_ok=True)
    sink = None
    if args.dump_fields:
        fields_dir = os.path.join(args.out_dir, "fields")
        os.makedirs(fields_dir, exist_ok=True)

        def sink(step, field):
            write_field_csv(field, os.path.join(fields_dir, f"frame_{step:05d}.csv"))

    try:
        logs = run_multi_episode(scn, field_sink=sink)
    except ScenarioError as exc:
        return _fail(str(exc))

    ok = True
    for k, episode in enumerate(logs):
        prefix = f"robot{k}_" if len(logs) > 1 else ""
        m = write_episode_outputs(episode, scn, args.out_dir, prefix=prefix)
        ok = ok and m.goals_reached == len(scn.robots[k].goals) and m.collisions == 0
        print(f"robot {k}: {m.goals_reached}/{len(scn.robots[k].goals)} goals, "
              f"{m.collisions} collisions, min h {m.min_h:.4f}, {m.steps} steps ({m.termination})")
    return 0 if ok else 4


# ---------------------------------------------------------------------------
# bench


def _summary(rows_ms: list[float]) -> dict:
    arr = np.asarray(rows_ms, dtype=np.float64)
    return {
        "median": float(np.median(arr)),
        "mean": float(np.mean(arr)),
        "p95": float(np.percentile(arr, 95)),
    }


def _bench_one_backend(maps, params, backend_name: str) -> list[dict]:
    backend = _kernels.get_backend(backend_name)
    rows = []
    for trial, gmap in enumerate(maps):
        field = synthesize(gmap, params, backend=backend)
        s = field.stats
        rows.append({
            "trial": trial,
            "size": gmap.height,
            "occupied_cells": s.occupied_cells,
            "transition_cells": s.n_unknowns,
            "assembly_ms": s.assemble_ms,
            "solve_ms": s.solve_ms,
            "synthesis_ms": s.total_ms,
            "iterations": s.solve.iterations,
            "solver": params.solver,
            "backend": s.backend,
        })
    return rows


def cmd_bench(args) -> int:
    if args.trials < 1:
        return _fail("--trials must be >= 1")
    if args.size < 16:
        return _fail("--size must be >= 16")

    default_windows = args.size == 200 and args.obstacles == 4
    occ_range = tuple(args.occupied_range) if args.occupied_range else (
        (1600, 2200) if default_windows else None)
    tr_range = tuple(args.transition_range) if args.transition_range else (
        (6200, 7000) if default_windows else None)

    params = SynthesisParams(
        a=1.0, b_val=1.0, delta_m=args.delta, robot_radius_m=0.0,
        solver=args.solver, solver_cfg=SolverConfig(tol=args.tol),
    )

    streams = np.random.SeedSequence(args.seed).spawn(args.trials)
    maps = [
        bench_map(np.random.default_rng(ss), size=args.size, delta_m=args.delta,
                  n_shapes=args.obstacles, occupied_range=occ_range,
                  transition_range=tr_range)
        for ss in streams
    ]

    backends = ["compiled", "python"] if args.compare_backends else [args.backend]
    if args.compare_backends and _kernels.compiled is None:
        log.warning("compiled backend unavailable; comparing python against itself is skipped")
        backends = ["python"]

    all_rows = []
    summary = {"trials": args.trials, "size": args.size, "solver": args.solver,
               "seed": args.seed, "baseline": BASELINE, "backends": {}}
    for backend_name in backends:
        rows = _bench_one_backend(maps, params, backend_name)
        all_rows.extend(rows)
        summary["backends"][rows[0]["backend"]] = {
            "assembly_ms": _summary([r["assembly_ms"] for r in rows]),
            "solve_ms": _summary([r["solve_ms"] for r in rows]),
            "assembly_plus_solve_ms": _summary([r["assembly_ms"] + r["solve_ms"] for r in rows]),
            "synthesis_ms": _summary([r["synthesis_ms"] for r in rows]),
            "transition_cells": _summary([float(r["transition_cells"]) for r in rows]),
            "iterations": _summary([float(r["iterations"]) for r in rows]),
        }

    os.makedirs(args.out_dir, exist_ok=True)
    cols = ["trial", "size", "occupied_cells", "transition_cells", "assembly_ms",
            "solve_ms", "synthesis_ms", "iterations", "solver", "backend"]
    with open(os.path.join(args.out_dir, "bench.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in all_rows:
            fh.write(",".join(
                f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n")
    with open(os.path.join(args.out_dir, "bench_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    for name, s in summary["backends"].items():
        print(f"[{name}] median assembly {s['assembly_ms']['median']:.3f} ms + "
              f"solve {s['solve_ms']['median']:.3f} ms = "
              f"{s['assembly_plus_solve_ms']['median']:.3f} ms "
              f"(baseline total {BASELINE['total_ms']} ms); "
              f"median transition cells {s['transition_cells']['median']:.0f} "
              f"(baseline {BASELINE['transition_cells']})")
    return 0


# ---------------------------------------------------------------------------
# verify


def _scatter(labels, index, solution, a, b_val):
    h = np.full(labels.label.shape, b_val, dtype=np.float64)
    h[labels.mask(Region.OBSTACLE)] = -a
    if index.count:
        h[index.cells[:, 0], index.cells[:, 1]] = solution
    return h


def _stencil_residual(labels, h, b_val) -> float:
    mask = labels.mask(Region.TRANSITION)
    if not mask.any():
        return 0.0
    hh, ww = h.shape
    pad = np.full((hh + 2, ww + 2), b_val)
    pad[1:-1, 1:-1] = h
    nbr = pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:]
    return float(np.abs(4.0 * h - nbr)[mask].max())


def cmd_verify(args) -> int:
    if args.trials < 1:
        return _fail("--trials must be >= 1")
    a, b_val = 1.0, 1.0
    tol = 1e-10
    cfg = SolverConfig(tol=tol)
    props = {"dense_oracle": 0, "jacobi_oracle": 0, "max_principle": 0, "harmonic_residual": 0}
    failures = []

    streams = np.random.SeedSequence(args.seed).spawn(args.trials)
    for trial, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        gmap, labels, delta_m = labeled_random_map(
            rng, max_size=30, require_transition=True, require_safe=True, require_sourced=True)
        index = index_unknowns(labels)
        if index.count > args.max_n:
            continue
        system = assemble(labels, index, BoundaryValues(a, b_val))
        if args.inject_assembly_bug:
            vals = np.array(system.values)
            vals[0] += 0.5
            system = LinearSystem(n=system.n, row_ptr=system.row_ptr,
                                  col_idx=system.col_idx, values=vals, rhs=system.rhs)

        dense = dense_oracle_solve(system, cap=args.max_n)
        xg, _ = gmres(system, cfg)
        xb, _ = bicgstab(system, cfg)
        xj = jacobi_oracle(system, tol=tol)

        def record_failure(prop, detail):
            failures.append({
                "property": prop, "trial": trial, "detail": detail,
                "delta_m": delta_m, "a": a, "b": b_val,
                "map": ["".join("1" if c else "0" for c in row) for row in gmap.cells],
            })

        if max(np.max(np.abs(xg - dense)), np.max(np.abs(xb - dense))) > 1e-6:
            record_failure("dense_oracle", "iterative solution deviates from dense elimination")
        else:
            props["dense_oracle"] += 1
        if np.max(np.abs(xj - dense)) > 1e-6:
            record_failure("jacobi_oracle", "jacobi sweep deviates from dense elimination")
        else:
            props["jacobi_oracle"] += 1

        slack = 10 * tol
        if index.count and not (np.all(dense > -a + slack) and np.all(dense < b_val - slack)):
            record_failure("max_principle", "transition value reached a boundary value")
        else:
            props["max_principle"] += 1

        h = _scatter(labels, index, xg, a, b_val)
        res = _stencil_residual(labels, h, b_val)
        if res > 1e-6 * (a + b_val):
            record_failure("harmonic_residual", f"stencil residual {res:.3e}")
        else:
            props["harmonic_residual"] += 1

    failed_props = {f["property"] for f in failures}
    for prop in props:
        status = "FAIL" if prop in failed_props else "PASS"
        print(f"{status} {prop} ({props[prop]} trials ok)")

    report = {"trials": args.trials, "seed": args.seed, "passes": props,
              "failures": [{k: f[k] for k in ("property", "trial", "detail")} for f in failures]}
    with open(args.report, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    if failures:
        with open(args.replay_out, "w") as fh:
            json.dump(failures[0], fh, indent=2)
            fh.write("\n")
        print(f"error: {len(failures)} property failures; first instance saved to {args.replay_out}",
              file=sys.stderr)
        return 5
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermal-cbf",
                                description="Grid-map safety fields, safe navigation, and solver benchmarks")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="synthesize a safety field from a PGM map")
    ps.add_argument("--map", required=True, help="P2/P5 PGM occupancy map, dark = occupied")
    ps.add_argument("--cell-size", type=float, required=True, help="meters per cell")
    ps.add_argument("--origin", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"))
    ps.add_argument("--a", type=float, default=1.0, help="obstacle boundary magnitude")
    ps.add_argument("--b", type=float, default=1.0, help="safe boundary value")
    ps.add_argument("--delta", type=float, default=0.15, help="safety margin, meters")
    ps.add_argument("--robot-radius", type=float, default=0.0, help="inflation radius, meters")
    ps.add_argument("--solver", choices=("gmres", "bicgstab"), default="gmres")
    ps.add_argument("--tol", type=float, default=1e-8)
    ps.add_argument("--max-iters", type=int, default=None)
    ps.add_argument("--restart", type=int, default=50)
    ps.add_argument("--out", required=True, help="field CSV output path")
    ps.add_argument("--stats", required=True, help="stats JSON output path")
    ps.set_defaults(func=cmd_synth)

    pm = sub.add_parser("simulate", help="run a scenario episode")
    pm.add_argument("--scenario", required=True, help="scenario JSON file")
    pm.add_argument("--out-dir", required=True)
    pm.add_argument("--seed", type=int, default=0, help="reserved; episodes are deterministic")
    pm.add_argument("--dump-fields", action="store_true", help="write per-frame field CSVs")
    pm.set_defaults(func=cmd_simulate)

    pb = sub.add_parser("bench", help="benchmark synthesis on random maps")
    pb.add_argument("--size", type=int, default=200)
    pb.add_argument("--obstacles", type=int, default=4, help="shapes per map (alternating disks and rects)")
    pb.add_argument("--trials", type=int, default=50)
    pb.add_argument("--solver", choices=("gmres", "bicgstab"), default="gmres")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--delta", type=float, default=0.15)
    pb.add_argument("--tol", type=float, default=1e-8)
    pb.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    pb.add_argument("--compare-backends", action="store_true",
                    help="run every trial on both kernel backends")
    pb.add_argument("--occupied-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    pb.add_argument("--transition-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    pb.add_argument("--out-dir", default="bench_out")
    pb.set_defaults(func=cmd_bench)

    pv = sub.add_parser("verify", help="run oracle and property sweeps")
    pv.add_argument("--max-n", type=int, default=2000, help="dense oracle size cap")
    pv.add_argument("--trials", type=int, default=100)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--report", default="verify_report.json")
    pv.add_argument("--replay-out", default="verify_failure.json")
    pv.add_argument("--inject-assembly-bug", action="store_true", help=argparse.SUPPRESS)
    pv.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ThermalCbfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
