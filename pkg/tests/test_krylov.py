import numpy as np
import pytest

from thermal_cbf import (
    BoundaryValues,
    ContractError,
    LinearSystem,
    SolverConfig,
    SolverFailure,
    assemble,
    bicgstab,
    dense_oracle_solve,
    gmres,
    index_unknowns,
    jacobi_oracle,
    spmv,
)
from thermal_cbf.randmaps import labeled_random_map
from conftest import ring_system, single_cell_system


def scalar_system(diag=4.0, rhs=2.0):
    return LinearSystem(
        n=1,
        row_ptr=np.array([0, 1]),
        col_idx=np.array([0], dtype=np.int32),
        values=np.array([diag]),
        rhs=np.array([rhs]),
    )


def random_systems(count, seed=0, max_size=22):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        gmap, labels, _ = labeled_random_map(rng, max_size=max_size)
        index = index_unknowns(labels)
        a, b = float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.3, 2.0))
        out.append((assemble(labels, index, BoundaryValues(a, b)), a, b))
    return out


# ---------------------------------------------------------------------------
# spmv


def test_spmv_zero_vector():
    system, _, _ = ring_system()
    assert np.array_equal(spmv(system, np.zeros(8)), np.zeros(8))


def test_spmv_ring_ones():
    system, _, _ = ring_system()
    # every row has exactly one -1 off-diagonal: (4 - 1) * 1 = 3
    assert np.array_equal(spmv(system, np.ones(8)), np.full(8, 3.0))


def test_spmv_matches_dense():
    rng = np.random.default_rng(2)
    for system, _, _ in random_systems(10, seed=5):
        x = rng.standard_normal(system.n)
        assert np.allclose(spmv(system, x), system.to_dense() @ x, atol=1e-12)


def test_spmv_length_mismatch():
    system, _, _ = ring_system()
    with pytest.raises(ContractError):
        spmv(system, np.zeros(7))


# ---------------------------------------------------------------------------
# GMRES


def test_gmres_ring():
    system, _, _ = ring_system()
    x, stats = gmres(system, SolverConfig(tol=1e-10))
    assert np.allclose(x, 1.0 / 3.0, atol=1e-8)
    assert stats.converged
    assert stats.final_relative_residual <= 1e-10


def test_gmres_scalar_single_iteration():
    x, stats = gmres(scalar_system())
    assert x[0] == pytest.approx(0.5)
    assert stats.iterations == 1


def test_gmres_zero_rhs():
    x, stats = gmres(scalar_system(rhs=0.0))
    assert x[0] == 0.0
    assert stats.iterations == 0 and stats.converged


def test_gmres_matches_dense_sweep():
    for system, _, _ in random_systems(40, seed=11):
        x, stats = gmres(system, SolverConfig(tol=1e-10))
        assert stats.converged
        assert np.max(np.abs(x - dense_oracle_solve(system))) <= 1e-6


def test_gmres_nonconvergence_returns_best_iterate():
    system, _, _ = ring_system()
    x, stats = gmres(system, SolverConfig(tol=1e-30, max_iters=2))
    assert not stats.converged
    assert stats.iterations <= 2
    assert np.all(np.isfinite(x))


def test_gmres_residual_contract_recomputed():
    for system, _, _ in random_systems(10, seed=23):
        cfg = SolverConfig(tol=1e-9)
        x, stats = gmres(system, cfg)
        if stats.converged:
            r = np.linalg.norm(system.rhs - spmv(system, x)) / np.linalg.norm(system.rhs)
            assert r <= cfg.tol


def test_gmres_determinism():
    system, _, _ = ring_system(a=1.3, b=0.7)
    x1, s1 = gmres(system)
    x2, s2 = gmres(system)
    assert np.array_equal(x1, x2)
    assert s1.iterations == s2.iterations
    assert s1.final_relative_residual == s2.final_relative_residual


def test_gmres_linearity_in_rhs():
    system, _, _ = ring_system()
    lam = 3.75
    scaled = LinearSystem(n=system.n, row_ptr=system.row_ptr, col_idx=system.col_idx,
                          values=system.values, rhs=np.asarray(system.rhs) * lam)
    x1, _ = gmres(system, SolverConfig(tol=1e-12))
    x2, _ = gmres(scaled, SolverConfig(tol=1e-12))
    assert np.allclose(x2, lam * x1, atol=1e-9)


def test_solution_range_with_solver_slack():
    tol = 1e-8
    for system, a, b in random_systems(20, seed=31):
        x, stats = gmres(system, SolverConfig(tol=tol))
        assert stats.converged
        assert np.all(x >= -a - 10 * tol) and np.all(x <= b + 10 * tol)


# ---------------------------------------------------------------------------
# BiCGSTAB


def test_bicgstab_ring():
    system, _, _ = ring_system()
    x, stats = bicgstab(system, SolverConfig(tol=1e-10))
    assert np.allclose(x, 1.0 / 3.0, atol=1e-8)
    assert stats.converged


def test_bicgstab_zero_rhs():
    x, stats = bicgstab(scalar_system(rhs=0.0))
    assert x[0] == 0.0 and stats.iterations == 0 and stats.converged


def test_bicgstab_matches_dense_and_gmres():
    tol = 1e-10
    for system, _, _ in random_systems(40, seed=17):
        xb, sb = bicgstab(system, SolverConfig(tol=tol))
        xg, sg = gmres(system, SolverConfig(tol=tol))
        assert sb.converged
        assert np.max(np.abs(xb - dense_oracle_solve(system))) <= 1e-6
        # exact cross-solver bound: |xb - xg| <= (|rb| + |rg|) / lambda_min
        lam_min = float(np.linalg.eigvalsh(system.to_dense())[0])
        bnorm = float(np.linalg.norm(system.rhs))
        rsum = (sb.final_relative_residual + sg.final_relative_residual) * bnorm
        assert np.linalg.norm(xb - xg) <= rsum / lam_min + 1e-12


def test_bicgstab_determinism():
    system, _, _ = ring_system(a=0.9, b=1.8)
    x1, s1 = bicgstab(system)
    x2, s2 = bicgstab(system)
    assert np.array_equal(x1, x2) and s1.iterations == s2.iterations


# ---------------------------------------------------------------------------
# Jacobi oracle


def test_jacobi_ring():
    system, _, _ = ring_system()
    x = jacobi_oracle(system, tol=1e-11)
    assert np.allclose(x, 1.0 / 3.0, atol=1e-10)


def test_jacobi_enclosed_cell_one_sweep():
    system = single_cell_system(a=1.25)
    assert jacobi_oracle(system, tol=1e-12, max_iters=3)[0] == pytest.approx(-1.25)


def test_jacobi_agreement_sweep():
    tol = 1e-10
    for system, _, _ in random_systems(15, seed=41):
        xj = jacobi_oracle(system, tol=tol)
        xg, _ = gmres(system, SolverConfig(tol=tol))
        assert np.max(np.abs(xj - xg)) <= 10 * tol * max(1.0, np.abs(xg).max())


def test_jacobi_budget_exhausted():
    system, _, _ = ring_system()
    with pytest.raises(SolverFailure):
        jacobi_oracle(system, tol=1e-14, max_iters=2)


# ---------------------------------------------------------------------------
# Config


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(restart=0)


def test_solver_config_default_budget():
    assert SolverConfig().effective_max_iters(100) == 1000
    assert SolverConfig().effective_max_iters(50_000) == 20000
    assert SolverConfig(max_iters=7).effective_max_iters(100) == 7
