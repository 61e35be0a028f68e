"""Fixtures that produce real input files by invoking the solver package's
CLI — the only coupling allowed between the two packages is these files."""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

CLI = shutil.which("thermal-cbf")

pytestmark = pytest.mark.skipif(CLI is None, reason="thermal-cbf CLI not installed")


def run_cli(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr
    return proc


def write_ring_pgm(path: Path):
    """7x7 map with a 2x2 obstacle block (the small worked example)."""
    rows = [[255] * 7 for _ in range(7)]
    for i in (2, 3):
        for j in (2, 3):
            rows[i][j] = 0
    body = "\n".join(" ".join(str(v) for v in r) for r in rows)
    path.write_text(f"P2\n7 7\n255\n{body}\n")


@pytest.fixture(scope="session")
def ring_field(tmp_path_factory):
    """Field CSV + sidecar synthesized from the worked-example map."""
    d = tmp_path_factory.mktemp("ring")
    pgm = d / "ring.pgm"
    write_ring_pgm(pgm)
    csv, meta = d / "field.csv", d / "field.json"
    run_cli("synth", "--map", str(pgm), "--cell-size", "1.0", "--delta", "1.2",
            "--out", str(csv), "--stats", str(meta))
    return csv, meta


@pytest.fixture(scope="session")
def empty_field(tmp_path_factory):
    """Constant-value field from an obstacle-free map."""
    d = tmp_path_factory.mktemp("empty")
    pgm = d / "empty.pgm"
    pgm.write_text("P2\n8 8\n255\n" + "\n".join(" ".join(["255"] * 8) for _ in range(8)) + "\n")
    csv, meta = d / "field.csv", d / "field.json"
    run_cli("synth", "--map", str(pgm), "--cell-size", "1.0", "--delta", "1.2",
            "--out", str(csv), "--stats", str(meta))
    return csv, meta


@pytest.fixture(scope="session")
def quick_episode(tmp_path_factory):
    """Small single-goal episode; fast enough for unit tests."""
    d = tmp_path_factory.mktemp("episode")
    scn = d / "scn.json"
    scn.write_text(json.dumps({
        "arena": {"width": 2.0, "height": 2.0},
        "obstacles": [{"type": "circle", "center": [1.0, 1.02], "radius": 0.12}],
        "start": {"x": 0.4, "y": 1.0},
        "goals": [[1.6, 1.0]],
        "sense": {"height": 100, "width": 100, "cell_size": 0.01},
        "synthesis": {"delta_m": 0.15, "robot_radius_m": 0.05, "solver": "bicgstab"},
        "dt": 0.05,
        "model": "single_integrator",
        "max_steps": 1200,
    }))
    out = d / "out"
    run_cli("simulate", "--scenario", str(scn), "--out-dir", str(out))
    return out, scn
