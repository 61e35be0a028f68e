"""Iterative solvers for the assembled stencil systems.

GMRES (restarted, modified Gram-Schmidt) and BiCGSTAB run on the selected
kernel backend; the Jacobi sweep is a test oracle built on the same spmv.
Solves are cold-started from zero every call: local maps are robot-centered,
so unknown indices do not correspond between frames and warm starts would be
meaningless. No preconditioning; the plain methods meet the frame budget at
the map sizes this package targets.

Convergence is declared on the true relative 2-norm residual, recomputed
from the returned iterate rather than any internal estimate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractError, SolverFailure
from .laplace import LinearSystem

_MAX_ITERS_CAP = 20000


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_relative_residual: float
    converged: bool
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_relative_residual": self.final_relative_residual,
            "converged": self.converged,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True)
class SolverConfig:
    """tol is a relative residual target; max_iters defaults to
    min(10 * N, 20000); the initial guess is always the zero vector."""

    tol: float = 1e-8
    max_iters: int | None = None
    restart: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restart < 1:
            raise ValueError("restart must be >= 1")

    def effective_max_iters(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return max(1, min(10 * n, _MAX_ITERS_CAP))


def spmv(sys: LinearSystem, x: np.ndarray, backend=None) -> np.ndarray:
    """y = A x via CSR traversal with deterministic per-row summation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sys.n,):
        raise ContractError(f"spmv operand has shape {x.shape}, system dimension is {sys.n}")
    mod = backend or _kernels.active
    return mod.spmv(sys.row_ptr, sys.col_idx, sys.values, x)


def gmres(sys: LinearSystem, cfg: SolverConfig | None = None, backend=None):
    """Solve A h = rhs; returns (solution, SolveStats). A zero rhs returns
    the zero vector immediately. Non-convergence returns the best iterate
    with converged=False; raising is the caller's policy."""
    cfg = cfg or SolverConfig()
    mod = backend or _kernels.active
    t0 = time.perf_counter()
    x, iters, relres, converged = mod.gmres(
        sys.row_ptr,
        sys.col_idx,
        sys.values,
        np.asarray(sys.rhs, dtype=np.float64),
        cfg.tol,
        cfg.effective_max_iters(sys.n),
        cfg.restart,
    )
    stats = SolveStats(int(iters), float(relres), bool(converged), time.perf_counter() - t0)
    return x, stats


def bicgstab(sys: LinearSystem, cfg: SolverConfig | None = None, backend=None):
    """As gmres. On a rho/omega breakdown the solve restarts once from the
    current iterate (solving for the correction); a second breakdown reports
    non-convergence."""
    cfg = cfg or SolverConfig()
    mod = backend or _kernels.active
    rhs = np.asarray(sys.rhs, dtype=np.float64)
    max_iters = cfg.effective_max_iters(sys.n)
    t0 = time.perf_counter()
    x, iters, relres, converged, breakdown = mod.bicgstab(
        sys.row_ptr, sys.col_idx, sys.values, rhs, cfg.tol, max_iters
    )
    if breakdown and not converged and iters < max_iters:
        resid = rhs - mod.spmv(sys.row_ptr, sys.col_idx, sys.values, x)
        dx, it2, _, _, breakdown2 = mod.bicgstab(
            sys.row_ptr, sys.col_idx, sys.values, resid, cfg.tol, max_iters - iters
        )
        x = x + dx
        iters += it2
        bnorm = float(np.linalg.norm(rhs))
        final = rhs - mod.spmv(sys.row_ptr, sys.col_idx, sys.values, x)
        relres = float(np.linalg.norm(final)) / bnorm if bnorm else 0.0
        converged = relres <= cfg.tol and not breakdown2
    stats = SolveStats(int(iters), float(relres), bool(converged), time.perf_counter() - t0)
    return x, stats


SOLVERS = {"gmres": gmres, "bicgstab": bicgstab}


def solve(sys: LinearSystem, method: str, cfg: SolverConfig | None = None, backend=None):
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}, choose from {sorted(SOLVERS)}") from None
    return fn(sys, cfg, backend=backend)


def jacobi_oracle(
    sys: LinearSystem, tol: float = 1e-10, max_iters: int = 200_000, backend=None
) -> np.ndarray:
    """Fixed-point iteration of the averaging stencil: x += (rhs - A x) / 4,
    stopping when the largest update falls below tol. Test oracle only;
    raises if the sweep budget is exhausted (it must converge, the iteration
    matrix has spectral radius < 1 for these systems)."""
    mod = backend or _kernels.active
    rhs = np.asarray(sys.rhs, dtype=np.float64)
    x = np.zeros(sys.n)
    for sweep in range(1, max_iters + 1):
        delta = (rhs - mod.spmv(sys.row_ptr, sys.col_idx, sys.values, x)) / 4.0
        x = x + delta
        if sys.n == 0 or float(np.max(np.abs(delta))) < tol:
            return x
    raise SolverFailure(f"jacobi oracle did not converge within {max_iters} sweeps")
