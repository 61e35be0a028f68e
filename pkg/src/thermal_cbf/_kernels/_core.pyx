# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: distance transform, stencil assembly, CSR spmv,
GMRES and BiCGSTAB. Semantics match `pure.py` one to one; see that module
for the reference documentation. Everything is single-threaded and
deterministic (fixed summation order)."""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY

cdef int OBSTACLE = 0
cdef int TRANSITION = 1
cdef int SAFE = 2

NAME = "compiled"


def edt_sq(occ):
    occ_u8 = np.ascontiguousarray(occ, dtype=np.uint8)
    cdef const unsigned char[:, ::1] m = occ_u8
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef long long inf = h + w
    out_arr = np.empty((h, w), dtype=np.int64)
    g_arr = np.empty((h, w), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef long long[:, ::1] g = g_arr
    cdef Py_ssize_t i, j, q, k
    cdef long long d

    # Pass 1: per-column vertical distances.
    for j in range(w):
        d = inf
        for i in range(h):
            if m[i, j]:
                d = 0
            elif d < inf:
                d += 1
            g[i, j] = d
        d = inf
        for i in range(h - 1, -1, -1):
            if m[i, j]:
                d = 0
            elif d < inf:
                d += 1
            if d < g[i, j]:
                g[i, j] = d

    # Pass 2: per-row lower envelope of parabolas (j - q)^2 + g(q)^2.
    v_arr = np.empty(w, dtype=np.int64)
    z_arr = np.empty(w + 1, dtype=np.float64)
    f_arr = np.empty(w, dtype=np.int64)
    cdef long long[::1] v = v_arr
    cdef double[::1] z = z_arr
    cdef long long[::1] f = f_arr
    cdef double s
    for i in range(h):
        for j in range(w):
            d = g[i, j]
            if d > inf:
                d = inf
            f[j] = d * d
        k = 0
        v[0] = 0
        z[0] = -INFINITY
        z[1] = INFINITY
        for q in range(1, w):
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            while s <= z[k]:
                k -= 1
                s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = INFINITY
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            out[i, q] = (q - v[k]) * (q - v[k]) + f[v[k]]
    return out_arr


def assemble_csr(labels, uidx, Py_ssize_t n, double a, double b_val):
    labels_c = np.ascontiguousarray(labels, dtype=np.int8)
    uidx_c = np.ascontiguousarray(uidx, dtype=np.int32)
    cdef const signed char[:, ::1] lbl = labels_c
    cdef const int[:, ::1] ui = uidx_c
    cdef Py_ssize_t h = lbl.shape[0], w = lbl.shape[1]

    row_ptr_arr = np.empty(n + 1, dtype=np.int64)
    col_idx_arr = np.empty(5 * n if n else 0, dtype=np.int32)
    values_arr = np.empty(5 * n if n else 0, dtype=np.float64)
    rhs_arr = np.empty(n if n else 0, dtype=np.float64)
    cdef long long[::1] row_ptr = row_ptr_arr
    cdef int[::1] col_idx = col_idx_arr
    cdef double[::1] values = values_arr
    cdef double[::1] rhs = rhs_arr

    cdef Py_ssize_t i, j, nnz = 0, idx = 0
    cdef double acc
    cdef signed char nl
    row_ptr[0] = 0
    for i in range(h):
        for j in range(w):
            if lbl[i, j] != TRANSITION:
                continue
            acc = 0.0
            # up
            if i == 0:
                acc += b_val
            else:
                nl = lbl[i - 1, j]
                if nl == TRANSITION:
                    col_idx[nnz] = ui[i - 1, j]
                    values[nnz] = -1.0
                    nnz += 1
                elif nl == SAFE:
                    acc += b_val
                else:
                    acc -= a
            # left
            if j == 0:
                acc += b_val
            else:
                nl = lbl[i, j - 1]
                if nl == TRANSITION:
                    col_idx[nnz] = ui[i, j - 1]
                    values[nnz] = -1.0
                    nnz += 1
                elif nl == SAFE:
                    acc += b_val
                else:
                    acc -= a
            # diagonal
            col_idx[nnz] = <int> idx
            values[nnz] = 4.0
            nnz += 1
            # right
            if j == w - 1:
                acc += b_val
            else:
                nl = lbl[i, j + 1]
                if nl == TRANSITION:
                    col_idx[nnz] = ui[i, j + 1]
                    values[nnz] = -1.0
                    nnz += 1
                elif nl == SAFE:
                    acc += b_val
                else:
                    acc -= a
            # down
            if i == h - 1:
                acc += b_val
            else:
                nl = lbl[i + 1, j]
                if nl == TRANSITION:
                    col_idx[nnz] = ui[i + 1, j]
                    values[nnz] = -1.0
                    nnz += 1
                elif nl == SAFE:
                    acc += b_val
                else:
                    acc -= a
            rhs[idx] = acc
            idx += 1
            row_ptr[idx] = nnz
    if idx != n:
        raise ValueError("unknown count does not match transition cells")
    return row_ptr_arr, col_idx_arr[:nnz].copy(), values_arr[:nnz].copy(), rhs_arr


cdef void _spmv(const long long[::1] row_ptr, const int[::1] col_idx, const double[::1] values,
                const double[::1] x, double[::1] y) noexcept:
    cdef Py_ssize_t i, k, n = row_ptr.shape[0] - 1
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[k] * x[col_idx[k]]
        y[i] = acc


cdef double _dot(const double[::1] u, const double[::1] v) noexcept:
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += u[i] * v[i]
    return acc


cdef double _nrm2(const double[::1] u) noexcept:
    return sqrt(_dot(u, u))


def spmv(row_ptr, col_idx, values, x):
    x_c = np.ascontiguousarray(x, dtype=np.float64)
    cdef const long long[::1] rp = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cdef const int[::1] ci = np.ascontiguousarray(col_idx, dtype=np.int32)
    cdef const double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    y_arr = np.empty(rp.shape[0] - 1, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef const double[::1] xv = x_c
    _spmv(rp, ci, vals, xv, y)
    return y_arr


def gmres(row_ptr, col_idx, values, b, double tol, long long max_iters, Py_ssize_t restart):
    cdef const long long[::1] rp = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cdef const int[::1] ci = np.ascontiguousarray(col_idx, dtype=np.int32)
    cdef const double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    b_c = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] bv = b_c
    cdef Py_ssize_t n = bv.shape[0]

    x_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double bnorm = _nrm2(bv)
    if bnorm == 0.0:
        return x_arr, 0, 0.0, True

    r_arr = np.empty(n, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] wv = w_arr

    cdef Py_ssize_t m_max = restart
    v_arr = np.empty((m_max + 1, n), dtype=np.float64)
    h_arr = np.zeros((m_max + 1, m_max), dtype=np.float64)
    cdef double[:, ::1] v = v_arr
    cdef double[:, ::1] hess = h_arr
    cs_arr = np.zeros(m_max, dtype=np.float64)
    sn_arr = np.zeros(m_max, dtype=np.float64)
    g_arr = np.zeros(m_max + 1, dtype=np.float64)
    y_arr = np.zeros(m_max, dtype=np.float64)
    cdef double[::1] cs = cs_arr
    cdef double[::1] sn = sn_arr
    cdef double[::1] g = g_arr
    cdef double[::1] y = y_arr

    cdef long long total = 0
    cdef double prev_rnorm = INFINITY
    cdef double rnorm, relres, hik, hkk, denom, c, s, t, acc
    cdef Py_ssize_t i, k, q, m, k_used
    cdef bint happy

    while True:
        _spmv(rp, ci, vals, x, r)
        for i in range(n):
            r[i] = bv[i] - r[i]
        rnorm = _nrm2(r)
        relres = rnorm / bnorm
        if relres <= tol:
            return x_arr, total, relres, True
        if total >= max_iters or rnorm >= prev_rnorm:
            return x_arr, total, relres, relres <= tol
        prev_rnorm = rnorm

        m = m_max
        if max_iters - total < <long long> m:
            m = <Py_ssize_t> (max_iters - total)
        for i in range(n):
            v[0, i] = r[i] / rnorm
        for i in range(m + 1):
            g[i] = 0.0
        g[0] = rnorm
        k_used = 0
        for k in range(m):
            _spmv(rp, ci, vals, v[k], wv)
            for i in range(k + 1):
                hik = _dot(wv, v[i])
                hess[i, k] = hik
                for q in range(n):
                    wv[q] -= hik * v[i, q]
            hkk = _nrm2(wv)
            hess[k + 1, k] = hkk
            happy = hkk == 0.0
            if not happy:
                for q in range(n):
                    v[k + 1, q] = wv[q] / hkk
            for i in range(k):
                t = cs[i] * hess[i, k] + sn[i] * hess[i + 1, k]
                hess[i + 1, k] = -sn[i] * hess[i, k] + cs[i] * hess[i + 1, k]
                hess[i, k] = t
            denom = sqrt(hess[k, k] * hess[k, k] + hess[k + 1, k] * hess[k + 1, k])
            if denom == 0.0:
                c = 1.0
                s = 0.0
            else:
                c = hess[k, k] / denom
                s = hess[k + 1, k] / denom
            cs[k] = c
            sn[k] = s
            hess[k, k] = c * hess[k, k] + s * hess[k + 1, k]
            hess[k + 1, k] = 0.0
            g[k + 1] = -s * g[k]
            g[k] = c * g[k]
            total += 1
            k_used = k + 1
            if fabs(g[k + 1]) <= tol * bnorm or happy:
                break
        for i in range(k_used - 1, -1, -1):
            acc = g[i]
            for q in range(i + 1, k_used):
                acc -= hess[i, q] * y[q]
            y[i] = acc / hess[i, i]
        for q in range(k_used):
            for i in range(n):
                x[i] += y[q] * v[q, i]


def bicgstab(row_ptr, col_idx, values, b, double tol, long long max_iters):
    cdef const long long[::1] rp = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cdef const int[::1] ci = np.ascontiguousarray(col_idx, dtype=np.int32)
    cdef const double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    b_c = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] bv = b_c
    cdef Py_ssize_t n = bv.shape[0]

    x_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double bnorm = _nrm2(bv)
    if bnorm == 0.0:
        return x_arr, 0, 0.0, True, False

    r_arr = b_c.copy()
    rhat_arr = b_c.copy()
    vv_arr = np.zeros(n, dtype=np.float64)
    p_arr = np.zeros(n, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.float64)
    t_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] rhat = rhat_arr
    cdef double[::1] vv = vv_arr
    cdef double[::1] p = p_arr
    cdef double[::1] s = s_arr
    cdef double[::1] tv = t_arr

    cdef double rho = 1.0, alpha = 1.0, omega = 1.0
    cdef double rho1, beta, rv, tt, relres
    cdef long long iters = 0
    cdef bint breakdown = False
    cdef Py_ssize_t i

    while iters < max_iters:
        rho1 = _dot(rhat, r)
        if rho1 == 0.0 or (iters > 0 and omega == 0.0):
            breakdown = True
            break
        if iters == 0:
            for i in range(n):
                p[i] = r[i]
        else:
            beta = (rho1 / rho) * (alpha / omega)
            for i in range(n):
                p[i] = r[i] + beta * (p[i] - omega * vv[i])
        _spmv(rp, ci, vals, p, vv)
        rv = _dot(rhat, vv)
        if rv == 0.0:
            breakdown = True
            break
        alpha = rho1 / rv
        for i in range(n):
            s[i] = r[i] - alpha * vv[i]
        iters += 1
        if _nrm2(s) <= tol * bnorm:
            for i in range(n):
                x[i] += alpha * p[i]
            break
        _spmv(rp, ci, vals, s, tv)
        tt = _dot(tv, tv)
        if tt == 0.0:
            breakdown = True
            break
        omega = _dot(tv, s) / tt
        for i in range(n):
            x[i] += alpha * p[i] + omega * s[i]
            r[i] = s[i] - omega * tv[i]
        rho = rho1
        if _nrm2(r) <= tol * bnorm:
            break

    _spmv(rp, ci, vals, x, s)
    for i in range(n):
        s[i] = bv[i] - s[i]
    relres = _nrm2(s) / bnorm
    return x_arr, iters, relres, relres <= tol, breakdown
