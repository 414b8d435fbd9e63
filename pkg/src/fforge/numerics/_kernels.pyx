# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched Cholesky kernels for stacks of small SPD matrices.

These are the hot inner loops of the solvers: every iteration factorizes and
solves O(N*T) matrices of size d x d with d typically between 2 and 100.
LAPACK round trips dominate at that size, so the loops are done here directly.

A non-positive pivot aborts with a ValueError carrying
(batch_index, pivot_index, pivot_value); the Python wrapper converts it.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cholesky_many(double[:, :, ::1] a):
    """Lower Cholesky factors of a (B, d, d) stack."""
    cdef Py_ssize_t B = a.shape[0], d = a.shape[1]
    out_arr = np.zeros((B, d, d))
    cdef double[:, :, ::1] L = out_arr
    cdef Py_ssize_t b, i, j, k
    cdef double s, piv
    for b in range(B):
        for i in range(d):
            for j in range(i + 1):
                s = a[b, i, j]
                for k in range(j):
                    s -= L[b, i, k] * L[b, j, k]
                if i == j:
                    if s <= 0.0:
                        raise ValueError((b, i, s))
                    piv = s ** 0.5
                    L[b, i, i] = piv
                else:
                    L[b, i, j] = s / L[b, j, j]
    return out_arr


def solve_spd_many(double[:, :, ::1] a, double[:, ::1] rhs):
    """Solve a[b] x[b] = rhs[b] for a (B, d, d) SPD stack and (B, d) rhs."""
    cdef Py_ssize_t B = a.shape[0], d = a.shape[1]
    L_arr = cholesky_many(a)
    cdef double[:, :, ::1] L = L_arr
    out_arr = np.empty((B, d))
    cdef double[:, ::1] x = out_arr
    cdef Py_ssize_t b, i, k
    cdef double s
    for b in range(B):
        for i in range(d):
            s = rhs[b, i]
            for k in range(i):
                s -= L[b, i, k] * x[b, k]
            x[b, i] = s / L[b, i, i]
        for i in range(d - 1, -1, -1):
            s = x[b, i]
            for k in range(i + 1, d):
                s -= L[b, k, i] * x[b, k]
            x[b, i] = s / L[b, i, i]
    return out_arr


def inverse_spd_many(double[:, :, ::1] a):
    """Inverses of a (B, d, d) SPD stack via Cholesky."""
    cdef Py_ssize_t B = a.shape[0], d = a.shape[1]
    L_arr = cholesky_many(a)
    cdef double[:, :, ::1] L = L_arr
    out_arr = np.empty((B, d, d))
    cdef double[:, :, ::1] inv = out_arr
    # column buffer for one solve
    col_arr = np.empty(d)
    cdef double[::1] col = col_arr
    cdef Py_ssize_t b, i, k, c
    cdef double s
    for b in range(B):
        for c in range(d):
            for i in range(d):
                s = 1.0 if i == c else 0.0
                for k in range(i):
                    s -= L[b, i, k] * col[k]
                col[i] = s / L[b, i, i]
            for i in range(d - 1, -1, -1):
                s = col[i]
                for k in range(i + 1, d):
                    s -= L[b, k, i] * col[k]
                col[i] = s / L[b, i, i]
            for i in range(d):
                inv[b, i, c] = col[i]
    # enforce exact symmetry (roundoff from per-column solves)
    for b in range(B):
        for i in range(d):
            for k in range(i):
                s = 0.5 * (inv[b, i, k] + inv[b, k, i])
                inv[b, i, k] = s
                inv[b, k, i] = s
    return out_arr
