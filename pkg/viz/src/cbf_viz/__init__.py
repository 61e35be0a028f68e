"""Figure rendering for the navigation toolkit's file outputs.

This package deliberately has no dependency on the solver package: it reads
the documented CSV/JSON formats (field raster + sidecar, trajectory and
safety-value logs, scenario documents) and writes PNGs. One script per
figure, each with --input/--output flags.
"""

__version__ = "0.1.0"
