# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors ``_kernels_py`` function for function."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, M_PI

cnp.import_array()


def propagate_linear(step, u0, Py_ssize_t steps, Py_ssize_t stride):
    cdef double[:, ::1] S = np.ascontiguousarray(step, dtype=np.float64)
    cdef Py_ssize_t m = S.shape[0]
    keep = list(range(0, steps + 1, stride))
    if keep[len(keep) - 1] != steps:
        keep.append(steps)
    kidx_arr = np.asarray(keep, dtype=np.int64)
    cdef cnp.int64_t[::1] kidx = kidx_arr
    cdef Py_ssize_t nkeep = kidx.shape[0]
    out_arr = np.empty((nkeep, m))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] u = np.array(u0, dtype=np.float64).reshape(-1)
    cdef double[::1] w = np.empty(m)
    cdef Py_ssize_t i, r, j, slot = 1
    cdef double acc
    if u.shape[0] != m:
        raise ValueError("state length does not match step matrix")
    with nogil:
        for j in range(m):
            out[0, j] = u[j]
        for i in range(1, steps + 1):
            for r in range(m):
                acc = 0.0
                for j in range(m):
                    acc = acc + S[r, j] * u[j]
                w[r] = acc
            for j in range(m):
                u[j] = w[j]
            if slot < nkeep and kidx[slot] == i:
                for j in range(m):
                    out[slot, j] = u[j]
                slot += 1
    return kidx_arr, out_arr


cdef inline double _ipow(double x, long e) nogil:
    cdef double r = 1.0
    while e > 0:
        if e & 1:
            r *= x
        x *= x
        e >>= 1
    return r


cdef double _poly_at(double[::1] qt, double[::1] pt, double[::1] coef,
                     long[:, ::1] qexp, long[:, ::1] pexp) nogil:
    cdef Py_ssize_t t, a
    cdef Py_ssize_t nterm = coef.shape[0]
    cdef Py_ssize_t n = qt.shape[0]
    cdef double total = 0.0, term
    for t in range(nterm):
        term = coef[t]
        for a in range(n):
            if qexp[t, a]:
                term *= _ipow(qt[a], qexp[t, a])
            if pexp[t, a]:
                term *= _ipow(pt[a], pexp[t, a])
        total += term
    return total


def mode_poly_flow(amp, theta0, lam, coef, qexp, pexp, double t_final, Py_ssize_t steps):
    cdef double[::1] A = np.ascontiguousarray(amp, dtype=np.float64)
    cdef double[::1] th0 = np.ascontiguousarray(theta0, dtype=np.float64)
    cdef double[::1] L = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] C = np.ascontiguousarray(coef, dtype=np.float64)
    cdef long[:, ::1] QE = np.ascontiguousarray(qexp, dtype=np.int_)
    cdef long[:, ::1] PE = np.ascontiguousarray(pexp, dtype=np.int_)
    cdef Py_ssize_t n = A.shape[0]
    cdef double[::1] qt = np.empty(n)
    cdef double[::1] pt = np.empty(n)
    out_arr = np.empty(steps + 1)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, a
    cdef double t, th
    # same time grid as numpy.linspace
    times = np.linspace(0.0, t_final, steps + 1)
    cdef double[::1] T = times
    with nogil:
        for i in range(steps + 1):
            t = T[i]
            for a in range(n):
                th = th0[a] + t * L[a]
                qt[a] = A[a] * cos(th)
                pt[a] = -A[a] * sin(th)
            out[i] = _poly_at(qt, pt, C, QE, PE)
    return out_arr


def mode_poly_torus(amp, coef, qexp, pexp, Py_ssize_t grid):
    cdef double[::1] A = np.ascontiguousarray(amp, dtype=np.float64)
    cdef double[::1] C = np.ascontiguousarray(coef, dtype=np.float64)
    cdef long[:, ::1] QE = np.ascontiguousarray(qexp, dtype=np.int_)
    cdef long[:, ::1] PE = np.ascontiguousarray(pexp, dtype=np.int_)
    cdef Py_ssize_t n = A.shape[0]
    cdef double[::1] cs = np.empty(grid)
    cdef double[::1] sn = np.empty(grid)
    cdef double[::1] qt = np.empty(n)
    cdef double[::1] pt = np.empty(n)
    cdef Py_ssize_t[::1] idx = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t g, a, total_pts = grid ** n, k
    cdef double outer = 0.0, inner
    for g in range(grid):
        cs[g] = cos(2.0 * M_PI * g / grid)
        sn[g] = sin(2.0 * M_PI * g / grid)
    with nogil:
        k = 0
        while k < total_pts:
            # inner block: the last axis sweeps the full circle
            inner = 0.0
            for g in range(grid):
                idx[n - 1] = g
                for a in range(n):
                    qt[a] = A[a] * cs[idx[a]]
                    pt[a] = -A[a] * sn[idx[a]]
                inner += _poly_at(qt, pt, C, QE, PE)
            outer += inner
            k += grid
            # odometer over the leading axes
            a = n - 2
            while a >= 0:
                idx[a] += 1
                if idx[a] < grid:
                    break
                idx[a] = 0
                a -= 1
    return outer / total_pts


def relation_search(lam, long bound, double tol):
    cdef double[::1] L = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t n = L.shape[0]
    cdef long[::1] k = np.full(n, -bound, dtype=np.int_)
    best_arr = np.zeros(n, dtype=np.int_)
    wit_arr = np.zeros(n, dtype=np.int_)
    cdef long[::1] best = best_arr
    cdef long[::1] wit = wit_arr
    cdef double best_res = float("inf"), partial, res
    cdef long wit_l1 = -1, l1
    cdef Py_ssize_t a, first
    cdef bint done = False, have_best = False
    with nogil:
        while not done:
            first = -1
            for a in range(n):
                if k[a] != 0:
                    first = a
                    break
            if first >= 0 and k[first] > 0:
                partial = 0.0
                for a in range(n - 1):
                    partial += k[a] * L[a]
                res = fabs(partial + k[n - 1] * L[n - 1])
                if res < best_res:
                    best_res = res
                    have_best = True
                    for a in range(n):
                        best[a] = k[a]
                if res < tol:
                    l1 = 0
                    for a in range(n):
                        l1 += k[a] if k[a] > 0 else -k[a]
                    if wit_l1 < 0 or l1 < wit_l1:
                        wit_l1 = l1
                        for a in range(n):
                            wit[a] = k[a]
            a = n - 1
            while a >= 0:
                k[a] += 1
                if k[a] <= bound:
                    break
                k[a] = -bound
                a -= 1
            if a < 0:
                done = True
    witness = wit_arr.astype(np.int64) if wit_l1 >= 0 else None
    best_k = best_arr.astype(np.int64) if have_best else None
    return witness, best_k, best_res
