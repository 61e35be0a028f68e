import json
import subprocess
import sys

import numpy as np
import pytest

from thermal_cbf.cli import main


def write_map(tmp_path, name="map.pgm"):
    """16x16 map with a 3x3 obstacle block."""
    rows = [[255] * 16 for _ in range(16)]
    for i in range(6, 9):
        for j in range(6, 9):
            rows[i][j] = 0
    body = "\n".join(" ".join(str(v) for v in r) for r in rows)
    path = tmp_path / name
    path.write_text(f"P2\n16 16\n255\n{body}\n")
    return path


def scenario_file(tmp_path, **over):
    doc = {
        "arena": {"width": 2.0, "height": 2.0},
        "obstacles": [{"type": "circle", "center": [1.0, 1.02], "radius": 0.12}],
        "start": {"x": 0.4, "y": 1.0},
        "goals": [[1.6, 1.0]],
        "sense": {"height": 100, "width": 100, "cell_size": 0.01},
        "synthesis": {"delta_m": 0.15, "robot_radius_m": 0.05, "solver": "bicgstab"},
        "dt": 0.05,
        "model": "single_integrator",
        "max_steps": 1200,
    }
    doc.update(over)
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(doc))
    return path


# ---------------------------------------------------------------------------
# synth


def test_synth_success(tmp_path):
    m = write_map(tmp_path)
    out, stats = tmp_path / "field.csv", tmp_path / "stats.json"
    rc = main(["synth", "--map", str(m), "--cell-size", "0.05", "--delta", "0.2",
               "--out", str(out), "--stats", str(stats)])
    assert rc == 0
    field = np.array([[float(v) for v in line.split(",")] for line in out.read_text().splitlines()])
    assert field.shape == (16, 16)
    meta = json.loads(stats.read_text())
    assert meta["stats"]["solve"]["converged"] is True
    assert meta["stats"]["n_unknowns"] > 0


def test_synth_missing_map_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--cell-size", "0.05", "--out", "x.csv", "--stats", "x.json"])
    assert exc.value.code == 2


def test_synth_bad_pgm(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_text("P7\n1 1\n255\n0\n")
    rc = main(["synth", "--map", str(bad), "--cell-size", "0.05",
               "--out", str(tmp_path / "f.csv"), "--stats", str(tmp_path / "s.json")])
    assert rc == 2


def test_synth_forced_nonconvergence_writes_stats(tmp_path):
    m = write_map(tmp_path)
    stats = tmp_path / "stats.json"
    rc = main(["synth", "--map", str(m), "--cell-size", "0.05", "--delta", "0.2",
               "--tol", "1e-30", "--max-iters", "1",
               "--out", str(tmp_path / "f.csv"), "--stats", str(stats)])
    assert rc == 3
    meta = json.loads(stats.read_text())
    assert meta["stats"]["solve"]["converged"] is False


# ---------------------------------------------------------------------------
# simulate


def test_simulate_success_and_outputs(tmp_path):
    scn = scenario_file(tmp_path)
    out = tmp_path / "ep"
    rc = main(["simulate", "--scenario", str(scn), "--out-dir", str(out)])
    assert rc == 0
    assert (out / "trajectory.csv").exists()
    meta = json.loads((out / "metrics.json").read_text())
    assert meta["goals_reached"] == 1 and meta["collisions"] == 0


def test_simulate_start_inside_obstacle(tmp_path):
    scn = scenario_file(tmp_path, start={"x": 1.0, "y": 1.02})
    rc = main(["simulate", "--scenario", str(scn), "--out-dir", str(tmp_path / "ep")])
    assert rc == 2


def test_simulate_unreached_goal_exits_4(tmp_path):
    scn = scenario_file(tmp_path, max_steps=10)
    out = tmp_path / "ep"
    rc = main(["simulate", "--scenario", str(scn), "--out-dir", str(out)])
    assert rc == 4
    assert (out / "metrics.json").exists()  # logs still written


def test_simulate_seed_repeatable_bytes(tmp_path):
    scn = scenario_file(tmp_path)
    d1, d2 = tmp_path / "e1", tmp_path / "e2"
    assert main(["simulate", "--scenario", str(scn), "--out-dir", str(d1), "--seed", "7"]) == 0
    assert main(["simulate", "--scenario", str(scn), "--out-dir", str(d2), "--seed", "7"]) == 0
    assert (d1 / "trajectory.csv").read_bytes() == (d2 / "trajectory.csv").read_bytes()


def test_simulate_dump_fields(tmp_path):
    scn = scenario_file(tmp_path, max_steps=60)
    out = tmp_path / "ep"
    rc = main(["simulate", "--scenario", str(scn), "--out-dir", str(out), "--dump-fields"])
    assert rc == 4  # not enough steps to finish, but frames must exist
    frames = sorted((out / "fields").glob("frame_*.csv"))
    assert frames


def test_simulate_invalid_json(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert main(["simulate", "--scenario", str(f), "--out-dir", str(tmp_path / "ep")]) == 2


# ---------------------------------------------------------------------------
# bench


def test_bench_rows_and_summary(tmp_path):
    out = tmp_path / "bench"
    rc = main(["bench", "--size", "96", "--trials", "3", "--seed", "1",
               "--out-dir", str(out)])
    assert rc == 0
    rows = (out / "bench.csv").read_text().splitlines()
    assert len(rows) == 4  # header + trials
    summary = json.loads((out / "bench_summary.json").read_text())
    assert summary["trials"] == 3
    (backend,) = summary["backends"].keys() if len(summary["backends"]) == 1 else (None,)
    assert backend in ("compiled", "python")


def test_bench_zero_trials_rejected(tmp_path):
    assert main(["bench", "--trials", "0", "--out-dir", str(tmp_path)]) == 2


def test_bench_solver_independent_maps(tmp_path):
    d1, d2 = tmp_path / "g", tmp_path / "b"
    main(["bench", "--size", "96", "--trials", "2", "--seed", "3", "--solver", "gmres", "--out-dir", str(d1)])
    main(["bench", "--size", "96", "--trials", "2", "--seed", "3", "--solver", "bicgstab", "--out-dir", str(d2)])
    r1 = (d1 / "bench.csv").read_text().splitlines()[1:]
    r2 = (d2 / "bench.csv").read_text().splitlines()[1:]
    # same seed -> same maps -> identical transition counts per trial
    t1 = [line.split(",")[3] for line in r1]
    t2 = [line.split(",")[3] for line in r2]
    assert t1 == t2


def test_bench_compare_backends(tmp_path):
    out = tmp_path / "cmp"
    rc = main(["bench", "--size", "96", "--trials", "2", "--seed", "5",
               "--compare-backends", "--out-dir", str(out)])
    assert rc == 0
    summary = json.loads((out / "bench_summary.json").read_text())
    assert "python" in summary["backends"]


# ---------------------------------------------------------------------------
# verify


def test_verify_passes(tmp_path):
    report = tmp_path / "report.json"
    rc = main(["verify", "--trials", "5", "--seed", "2", "--report", str(report),
               "--replay-out", str(tmp_path / "replay.json")])
    assert rc == 0
    doc = json.loads(report.read_text())
    assert doc["failures"] == []
    assert set(doc["passes"]) == {"dense_oracle", "jacobi_oracle", "max_principle", "harmonic_residual"}


def test_verify_injected_bug_exits_5(tmp_path):
    report = tmp_path / "report.json"
    replay = tmp_path / "replay.json"
    rc = main(["verify", "--trials", "3", "--seed", "2", "--report", str(report),
               "--replay-out", str(replay), "--inject-assembly-bug"])
    assert rc == 5
    assert replay.exists()
    doc = json.loads(replay.read_text())
    assert doc["property"] in ("harmonic_residual", "max_principle")
    assert "map" in doc and doc["map"]


def test_verify_deterministic_report(tmp_path):
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    main(["verify", "--trials", "4", "--seed", "9", "--report", str(r1),
          "--replay-out", str(tmp_path / "x.json")])
    main(["verify", "--trials", "4", "--seed", "9", "--report", str(r2),
          "--replay-out", str(tmp_path / "y.json")])
    assert r1.read_text() == r2.read_text()


# ---------------------------------------------------------------------------
# entry point


def test_module_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "thermal_cbf", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "verify" in proc.stdout
