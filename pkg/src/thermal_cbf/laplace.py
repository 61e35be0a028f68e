"""Linear system assembly for the discrete Laplace field over the transition band.

Each transition cell contributes one unknown and one five-point stencil
equation 4*h_c - sum(h of transition neighbors) = rhs, where fixed-value
neighbors fold into the right-hand side: safe cells and out-of-map neighbors
contribute +b_val, obstacle cells contribute -a. The resulting matrix is
symmetric, weakly diagonally dominant with strict dominance wherever the band
touches a fixed value, hence nonsingular for any nonempty transition set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractError, OracleCapError, SingularSystemError
from .ogm import Region, RegionLabels, _freeze


@dataclass(frozen=True)
class BoundaryValues:
    """Dirichlet magnitudes: obstacles pinned at -a, safe cells at +b_val."""

    a: float = 1.0
    b_val: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b_val > 0):
            raise ValueError("boundary values a and b_val must be positive")


@dataclass(frozen=True)
class UnknownIndex:
    """Row-major bijection between transition cells and unknowns 0..N-1.

    cells[k] = (row, col) of unknown k; grid[i, j] = unknown index or -1.
    """

    cells: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cells", _freeze(np.asarray(self.cells, dtype=np.int32)))
        object.__setattr__(self, "grid", _freeze(np.ascontiguousarray(self.grid, dtype=np.int32)))

    @property
    def count(self) -> int:
        return self.cells.shape[0]

    def cell_of(self, k: int) -> tuple[int, int]:
        i, j = self.cells[k]
        return int(i), int(j)

    def index_of(self, i: int, j: int) -> int | None:
        k = int(self.grid[i, j])
        return None if k < 0 else k


@dataclass(frozen=True)
class LinearSystem:
    """CSR matrix plus right-hand side; at most 5 nonzeros per row."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        for name in ("row_ptr", "col_idx", "values", "rhs"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            dense[i, self.col_idx[lo:hi]] = self.values[lo:hi]
        return dense


def index_unknowns(labels: RegionLabels) -> UnknownIndex:
    """Enumerate transition cells in row-major order. N = 0 is allowed."""
    mask = labels.mask(Region.TRANSITION)
    ti, tj = np.nonzero(mask)  # C order == row-major
    grid = np.full(labels.label.shape, -1, dtype=np.int32)
    grid[ti, tj] = np.arange(ti.shape[0], dtype=np.int32)
    return UnknownIndex(cells=np.stack([ti, tj], axis=1) if ti.size else np.empty((0, 2)), grid=grid)


def assemble(labels: RegionLabels, index: UnknownIndex, bv: BoundaryValues) -> LinearSystem:
    """Build the CSR system for the current labeling.

    `index` must have been derived from `labels` (checked, since a stale
    index silently scrambles the stencil).
    """
    if index.grid.shape != labels.label.shape or not np.array_equal(
        index.grid >= 0, labels.mask(Region.TRANSITION)
    ):
        raise ContractError("unknown index was not derived from these labels")
    row_ptr, col_idx, values, rhs = _kernels.active.assemble_csr(
        labels.label, index.grid, index.count, bv.a, bv.b_val
    )
    return LinearSystem(n=index.count, row_ptr=row_ptr, col_idx=col_idx, values=values, rhs=rhs)


def dense_oracle_solve(sys: LinearSystem, cap: int = 2000) -> np.ndarray:
    """Reference solve by dense Gaussian elimination with partial pivoting
    (LAPACK via numpy). Only for tests and verification sweeps; refuses
    systems above `cap` unknowns."""
    if sys.n > cap:
        raise OracleCapError(f"system size {sys.n} exceeds dense oracle cap {cap}")
    if sys.n == 0:
        return np.empty(0)
    try:
        return np.linalg.solve(sys.to_dense(), np.asarray(sys.rhs, dtype=np.float64))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"dense solve failed: {exc}") from exc


def to_matrix_market(sys: LinearSystem, matrix_path, rhs_path) -> None:
    """Dump A in Matrix Market coordinate symmetric format (lower triangle,
    1-based) and the rhs as one value per line, for external cross-checks."""
    entries = []
    for i in range(sys.n):
        lo, hi = sys.row_ptr[i], sys.row_ptr[i + 1]
        for k in range(lo, hi):
            j = int(sys.col_idx[k])
            if j <= i:
                entries.append((i + 1, j + 1, float(sys.values[k])))
    with open(matrix_path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{sys.n} {sys.n} {len(entries)}\n")
        for i, j, v in entries:
            fh.write(f"{i} {j} {v:.17g}\n")
    with open(rhs_path, "w") as fh:
        for v in sys.rhs:
            fh.write(f"{float(v):.17g}\n")
