"""Safety value over time with the zero reference line."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import FigureSpec, FormatError, read_csv_columns


def render(spec: FigureSpec) -> float:
    """Returns the minimum plotted h (handy for checks)."""
    cols = read_csv_columns(spec.input_path, ("t", "h"))
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(cols["t"], cols["h"], color="tab:blue", linewidth=1.2)
    ax.axhline(0.0, color="red", linestyle="--", linewidth=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("h")
    ax.set_title("safety value along the trajectory")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)
    return float(cols["h"].min())


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Render an h(t) PNG")
    p.add_argument("--input", required=True, help="h log CSV (t,h)")
    p.add_argument("--output", required=True, help="PNG path")
    p.add_argument("--dpi", type=int, default=150)
    args = p.parse_args(argv)
    spec = FigureSpec(input_path=args.input, output_path=args.output, dpi=args.dpi)
    try:
        hmin = render(spec)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"min plotted h: {hmin:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
