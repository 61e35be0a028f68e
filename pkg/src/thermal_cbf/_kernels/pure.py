"""Pure-numpy implementations of the hot kernels.

These mirror the compiled extension (`_core`) exactly in semantics and are
selected at import time when the extension is unavailable (or forced via
THERMAL_CBF_BACKEND=python). All functions are deterministic: summation
orders are fixed, no threading.

Kernels:
  edt_sq       exact squared Euclidean distance transform, cell units
  assemble_csr five-point Laplace stencil over transition cells -> CSR + rhs
  spmv         CSR matrix-vector product
  gmres        restarted GMRES, modified Gram-Schmidt + Givens rotations
  bicgstab     BiCGSTAB with breakdown reporting
"""

import math

import numpy as np

# Region codes shared with ogm.Region (kept as plain ints so the kernel
# modules stay import-light).
OBSTACLE = 0
TRANSITION = 1
SAFE = 2

NAME = "python"

# Row chunk cap for the (rows, W, W) broadcast in edt_sq phase 2.
_EDT_CHUNK_CELLS = 4_000_000


def edt_sq(occ: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance (in cells) to the nearest occupied cell center.

    Two passes: per-column nearest occupied row distance, then per-row 1D
    minimisation of (j-q)^2 + g(q)^2, which is exact for the Euclidean metric.
    Cells with no occupied cell in the map get a value >= (H+W)^2; callers
    treat that as the "no obstacle" sentinel.
    """
    occ = np.ascontiguousarray(occ, dtype=bool)
    h, w = occ.shape
    inf = h + w

    # Pass 1: vertical distances per column, forward then backward row scan.
    g = np.empty((h, w), dtype=np.int64)
    prev = np.full(w, inf, dtype=np.int64)
    for i in range(h):
        prev = np.where(occ[i], 0, np.minimum(prev + 1, inf))
        g[i] = prev
    for i in range(h - 2, -1, -1):
        np.minimum(g[i], g[i + 1] + 1, out=g[i])
    np.minimum(g, inf, out=g)

    f = g.astype(np.int64) ** 2

    # Pass 2: per-row lower envelope, evaluated by brute-force broadcast in
    # row chunks. Exact, and vectorized enough for the fallback path.
    js = np.arange(w, dtype=np.int64)
    cross = (js[:, None] - js[None, :]) ** 2  # (j, q)
    out = np.empty((h, w), dtype=np.int64)
    chunk = max(1, _EDT_CHUNK_CELLS // (w * w))
    for i0 in range(0, h, chunk):
        i1 = min(h, i0 + chunk)
        out[i0:i1] = (cross[None, :, :] + f[i0:i1, None, :]).min(axis=2)
    return out


def assemble_csr(labels: np.ndarray, uidx: np.ndarray, n: int, a: float, b_val: float):
    """Assemble the five-point stencil system over transition cells.

    labels: int8 H x W of region codes; uidx: int32 H x W unknown index per
    transition cell (-1 elsewhere, row-major enumeration). Returns
    (row_ptr, col_idx, values, rhs). Per row: diagonal 4, -1 per transition
    neighbor; fixed neighbors move to the rhs (safe / out-of-map add b_val,
    obstacle subtracts a). Neighbor order up, left, diag, right, down keeps
    col_idx strictly increasing under row-major unknown numbering.
    """
    h, w = labels.shape
    ti, tj = np.nonzero(labels == TRANSITION)  # row-major == unknown order
    if ti.shape[0] != n:
        raise ValueError("unknown count does not match transition cells")
    if n == 0:
        return (
            np.zeros(1, dtype=np.int64),
            np.empty(0, dtype=np.int32),
            np.empty(0, dtype=np.float64),
            np.empty(0, dtype=np.float64),
        )

    pad_lbl = np.full((h + 2, w + 2), SAFE, dtype=np.int8)  # out-of-map acts like safe
    pad_lbl[1:-1, 1:-1] = labels
    pad_idx = np.full((h + 2, w + 2), -1, dtype=np.int32)
    pad_idx[1:-1, 1:-1] = uidx

    offsets = ((0, 1), (1, 0), (1, 2), (2, 1))  # up, left, right, down in padded coords
    slot_cols = np.empty((n, 5), dtype=np.int32)
    slot_vals = np.zeros((n, 5), dtype=np.float64)
    keep = np.zeros((n, 5), dtype=bool)
    rhs = np.zeros(n, dtype=np.float64)

    # Slot layout [up, left, diag, right, down]; diag always present.
    slot_cols[:, 2] = np.arange(n, dtype=np.int32)
    slot_vals[:, 2] = 4.0
    keep[:, 2] = True

    for slot, (di, dj) in zip((0, 1, 3, 4), offsets):
        nl = pad_lbl[ti + di, tj + dj]
        is_t = nl == TRANSITION
        slot_cols[:, slot] = pad_idx[ti + di, tj + dj]
        slot_vals[:, slot] = np.where(is_t, -1.0, 0.0)
        keep[:, slot] = is_t
        rhs += np.where(nl == SAFE, b_val, 0.0)
        rhs -= np.where(nl == OBSTACLE, a, 0.0)

    counts = keep.sum(axis=1)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    flat = keep.ravel()  # row-major flatten preserves per-row slot order
    col_idx = slot_cols.ravel()[flat].astype(np.int32)
    values = slot_vals.ravel()[flat]
    return row_ptr, col_idx, values, rhs


def spmv(row_ptr, col_idx, values, x):
    """y = A x over CSR storage; per-row summation in index order."""
    prod = values * x[col_idx]
    # Every row holds its diagonal, so no row is empty and reduceat is safe.
    return np.add.reduceat(prod, row_ptr[:-1]) if len(values) else np.zeros(0)


def gmres(row_ptr, col_idx, values, b, tol, max_iters, restart):
    """Restarted GMRES from a zero initial guess.

    Modified Gram-Schmidt Arnoldi with Givens rotations on the Hessenberg
    factor. Returns (x, iterations, relative_residual, converged); the
    residual is recomputed from the returned iterate, never trusted from the
    rotation estimate.
    """
    n = b.shape[0]
    x = np.zeros(n, dtype=np.float64)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, 0, 0.0, True

    total = 0
    prev_rnorm = math.inf
    while True:
        r = b - spmv(row_ptr, col_idx, values, x)
        rnorm = float(np.linalg.norm(r))
        relres = rnorm / bnorm
        if relres <= tol:
            return x, total, relres, True
        if total >= max_iters or rnorm >= prev_rnorm:
            return x, total, relres, relres <= tol
        prev_rnorm = rnorm

        m = min(restart, max_iters - total)
        v = np.empty((m + 1, n), dtype=np.float64)
        hess = np.zeros((m + 1, m), dtype=np.float64)
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        v[0] = r / rnorm
        g[0] = rnorm
        k_used = 0
        for k in range(m):
            wv = spmv(row_ptr, col_idx, values, v[k])
            for i in range(k + 1):
                hik = float(np.dot(wv, v[i]))
                hess[i, k] = hik
                wv -= hik * v[i]
            hkk = float(np.linalg.norm(wv))
            hess[k + 1, k] = hkk
            happy = hkk == 0.0
            if not happy:
                v[k + 1] = wv / hkk
            for i in range(k):
                t = cs[i] * hess[i, k] + sn[i] * hess[i + 1, k]
                hess[i + 1, k] = -sn[i] * hess[i, k] + cs[i] * hess[i + 1, k]
                hess[i, k] = t
            denom = math.hypot(hess[k, k], hess[k + 1, k])
            if denom == 0.0:
                c, s = 1.0, 0.0
            else:
                c, s = hess[k, k] / denom, hess[k + 1, k] / denom
            cs[k], sn[k] = c, s
            hess[k, k] = c * hess[k, k] + s * hess[k + 1, k]
            hess[k + 1, k] = 0.0
            g[k + 1] = -s * g[k]
            g[k] = c * g[k]
            total += 1
            k_used = k + 1
            if abs(g[k + 1]) <= tol * bnorm or happy:
                break
        y = np.zeros(k_used)
        for i in range(k_used - 1, -1, -1):
            y[i] = (g[i] - float(hess[i, i + 1 : k_used] @ y[i + 1 : k_used])) / hess[i, i]
        x = x + v[:k_used].T @ y


def bicgstab(row_ptr, col_idx, values, b, tol, max_iters):
    """BiCGSTAB from a zero initial guess.

    Returns (x, iterations, relative_residual, converged, breakdown).
    breakdown flags a numerically zero rho / omega / (rhat, v) inner product;
    the caller owns the restart-once policy.
    """
    n = b.shape[0]
    x = np.zeros(n, dtype=np.float64)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, 0, 0.0, True, False

    r = b.copy()
    rhat = b.copy()
    rho = 1.0
    alpha = 1.0
    omega = 1.0
    vv = np.zeros(n)
    p = np.zeros(n)
    iters = 0
    breakdown = False
    while iters < max_iters:
        rho1 = float(rhat @ r)
        if rho1 == 0.0 or (iters > 0 and omega == 0.0):
            breakdown = True
            break
        if iters == 0:
            p = r.copy()
        else:
            beta = (rho1 / rho) * (alpha / omega)
            p = r + beta * (p - omega * vv)
        vv = spmv(row_ptr, col_idx, values, p)
        rv = float(rhat @ vv)
        if rv == 0.0:
            breakdown = True
            break
        alpha = rho1 / rv
        s = r - alpha * vv
        iters += 1
        if float(np.linalg.norm(s)) <= tol * bnorm:
            x = x + alpha * p
            break
        t = spmv(row_ptr, col_idx, values, s)
        tt = float(t @ t)
        if tt == 0.0:
            breakdown = True
            break
        omega = float(t @ s) / tt
        x = x + alpha * p + omega * s
        r = s - omega * t
        rho = rho1
        if float(np.linalg.norm(r)) <= tol * bnorm:
            break

    relres = float(np.linalg.norm(b - spmv(row_ptr, col_idx, values, x))) / bnorm
    return x, iters, relres, relres <= tol, breakdown
