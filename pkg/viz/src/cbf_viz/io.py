"""Readers for the documented interchange formats.

Everything raises FormatError with a usable message; the plot scripts turn
that into a nonzero exit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


class FormatError(Exception):
    pass


@dataclass
class FigureSpec:
    """Inputs, output path and style knobs for one figure."""

    input_path: str
    output_path: str
    sidecar_path: str | None = None
    scenario_path: str | None = None
    colormap: str = "coolwarm"
    quiver_stride: int = 0  # 0 = no gradient arrows
    goal_markers: bool = True
    dpi: int = 150
    extra: dict = field(default_factory=dict)


def read_field_csv(path) -> np.ndarray:
    """Field raster: H lines of W comma-separated floats."""
    rows = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(v) for v in line.split(",")])
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise FormatError(str(exc)) from None
    if not rows:
        raise FormatError(f"{path}: empty field CSV")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError(f"{path}: ragged rows, expected width {width}")
    return np.asarray(rows, dtype=np.float64)


def read_field_sidecar(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    for key in ("a", "b", "cell_size"):
        if key not in doc:
            raise FormatError(f"{path}: sidecar missing {key!r}")
    return doc


def read_csv_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Headered CSV (trajectory.csv / h_log.csv); returns required columns."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise FormatError(f"{path}: empty file")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise FormatError(f"{path}: missing columns {missing}")
            cols: dict[str, list] = {c: [] for c in required}
            for lineno, row in enumerate(reader, start=2):
                for c in required:
                    try:
                        cols[c].append(float(row[c]))
                    except (TypeError, ValueError):
                        raise FormatError(f"{path}:{lineno}: bad value in {c!r}") from None
    except OSError as exc:
        raise FormatError(str(exc)) from None
    if not cols[required[0]]:
        raise FormatError(f"{path}: no data rows")
    return {c: np.asarray(v) for c, v in cols.items()}


def read_scenario(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
