"""Heatmap of a safety-field raster with optional gradient arrows.

Obstacle cells (pinned at the field minimum, -a) are masked dark. Gradient
arrows are central differences computed from the raster itself, subsampled
by --quiver-stride; near-zero arrows are dropped so constant fields render
clean.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import FigureSpec, FormatError, read_field_csv, read_field_sidecar


def render(spec: FigureSpec) -> dict:
    """Returns a small report: raster shape and the number of arrows drawn."""
    h = read_field_csv(spec.input_path)
    a = b = None
    cell_size = 1.0
    if spec.sidecar_path:
        meta = read_field_sidecar(spec.sidecar_path)
        if "height" in meta and (meta["height"], meta["width"]) != h.shape:
            raise FormatError(
                f"field CSV is {h.shape[0]}x{h.shape[1]} but sidecar says "
                f"{meta['height']}x{meta['width']}"
            )
        a, b = float(meta["a"]), float(meta["b"])
        cell_size = float(meta["cell_size"])
    vmin = -a if a is not None else float(h.min())
    vmax = b if b is not None else float(h.max())

    masked = np.ma.masked_where(h <= vmin + 1e-12, h) if vmin < vmax else np.ma.asarray(h)
    cmap = plt.get_cmap(spec.colormap).copy()
    cmap.set_bad("black")

    fig, ax = plt.subplots(figsize=(6, 6))
    im = ax.imshow(masked, origin="lower", cmap=cmap, vmin=vmin, vmax=vmax)
    fig.colorbar(im, ax=ax, shrink=0.8, label="h")

    arrows = 0
    if spec.quiver_stride > 0 and h.shape[0] >= 3 and h.shape[1] >= 3:
        gy, gx = np.gradient(h, cell_size)
        s = spec.quiver_stride
        jj, ii = np.meshgrid(np.arange(0, h.shape[1], s), np.arange(0, h.shape[0], s))
        u, v = gx[ii, jj], gy[ii, jj]
        mag = np.hypot(u, v)
        keep = mag > 1e-9
        arrows = int(keep.sum())
        if arrows:
            ax.quiver(jj[keep], ii[keep], u[keep], v[keep], color="red",
                      width=0.003, alpha=0.8)
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title("safety field")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)
    return {"shape": h.shape, "arrows": arrows}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Render a safety-field heatmap PNG")
    p.add_argument("--input", required=True, help="field CSV")
    p.add_argument("--sidecar", default=None, help="field sidecar JSON")
    p.add_argument("--output", required=True, help="PNG path")
    p.add_argument("--colormap", default="coolwarm")
    p.add_argument("--quiver-stride", type=int, default=0,
                   help="gradient arrow subsampling; 0 disables arrows")
    p.add_argument("--dpi", type=int, default=150)
    args = p.parse_args(argv)
    spec = FigureSpec(input_path=args.input, output_path=args.output,
                      sidecar_path=args.sidecar, colormap=args.colormap,
                      quiver_stride=args.quiver_stride, dpi=args.dpi)
    try:
        render(spec)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
