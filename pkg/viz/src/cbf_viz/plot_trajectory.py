"""Robot path over the scenario's obstacles, goals drawn as stars.

The scenario JSON is optional; without it only the path is drawn. Obstacle
shapes are rendered directly from the documented scenario schema (circles:
center + radius; rects: corner + extents).
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.patches as mpatches
import matplotlib.pyplot as plt

from .io import FigureSpec, FormatError, read_csv_columns, read_scenario


def _draw_obstacles(ax, doc):
    for obs in doc.get("obstacles", []):
        kind = obs.get("type")
        if kind == "circle":
            ax.add_patch(mpatches.Circle(tuple(obs["center"]), obs["radius"],
                                         color="dimgray"))
        elif kind == "rect":
            ax.add_patch(mpatches.Rectangle(tuple(obs["corner"]), obs["extents"][0],
                                            obs["extents"][1], color="dimgray"))
        else:
            raise FormatError(f"unknown obstacle type {kind!r} in scenario")


def render(spec: FigureSpec) -> None:
    cols = read_csv_columns(spec.input_path, ("t", "x", "y"))
    fig, ax = plt.subplots(figsize=(6, 6))

    goals = []
    if spec.scenario_path:
        doc = read_scenario(spec.scenario_path)
        _draw_obstacles(ax, doc)
        arena = doc.get("arena", {})
        if "width" in arena and "height" in arena:
            ax.set_xlim(0, arena["width"])
            ax.set_ylim(0, arena["height"])
        goals = doc.get("goals", [])
        if not goals and doc.get("robots"):
            goals = [g for r in doc["robots"] for g in r.get("goals", [])]

    if len(cols["x"]) == 1:
        ax.plot(cols["x"], cols["y"], "o", color="tab:blue")
    else:
        ax.plot(cols["x"], cols["y"], "-", color="tab:blue", linewidth=1.5, label="path")
        ax.plot(cols["x"][0], cols["y"][0], "o", color="tab:green", label="start")
    if spec.goal_markers:
        for k, g in enumerate(goals):
            ax.plot(g[0], g[1], marker="*", markersize=16,
                    color=f"C{k + 2}", linestyle="none",
                    label=f"goal {k + 1}")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("trajectory")
    if len(cols["x"]) > 1 or goals:
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Render a trajectory PNG")
    p.add_argument("--input", required=True, help="trajectory CSV (t,x,y,...)")
    p.add_argument("--scenario", default=None, help="scenario JSON for obstacles/goals")
    p.add_argument("--output", required=True, help="PNG path")
    p.add_argument("--no-goal-markers", action="store_true")
    p.add_argument("--dpi", type=int, default=150)
    args = p.parse_args(argv)
    spec = FigureSpec(input_path=args.input, output_path=args.output,
                      scenario_path=args.scenario,
                      goal_markers=not args.no_goal_markers, dpi=args.dpi)
    try:
        render(spec)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
