"""Kernel backend selection.

The compiled extension (`_core`, Cython) is preferred; the numpy
implementation (`pure`) is the fallback. Selection happens once at import:

  THERMAL_CBF_BACKEND=compiled   require the extension (ImportError if absent)
  THERMAL_CBF_BACKEND=python     force the fallback
  unset / auto                   compiled if importable, else python

`active` is the chosen module; both backends expose the same functions
(edt_sq, assemble_csr, spmv, gmres, bicgstab) with identical semantics, so
callers use `active.<kernel>` and benchmarks can import both explicitly.
"""

import os

from . import pure

_choice = os.environ.get("THERMAL_CBF_BACKEND", "auto").lower()

compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _core as compiled
    except ImportError:
        if _choice == "compiled":
            raise

active = compiled if compiled is not None else pure


def backend_name() -> str:
    return active.NAME


def get_backend(name: str = "auto"):
    """Resolve a backend module by name ("auto", "compiled", "python")."""
    if name == "auto":
        return active
    if name == "python":
        return pure
    if name == "compiled":
        if compiled is None:
            raise ImportError("compiled kernel backend is not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
