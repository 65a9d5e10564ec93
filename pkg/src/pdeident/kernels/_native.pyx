# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: stencil correlation and one-sided Jacobi singular values."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND_NAME = "native"

DEF MAX_SWEEPS = 30
cdef double PAIR_TOL = 1e-15


def correlate_axis(values, weights, int axis):
    """Weighted moving sum ("valid" correlation) along one axis of a 2-D array."""
    v_arr = np.ascontiguousarray(values, dtype=np.float64)
    w_arr = np.ascontiguousarray(weights, dtype=np.float64)
    if v_arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    if w_arr.ndim != 1 or w_arr.size == 0:
        raise ValueError("weights must be a nonempty 1-D array")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    cdef double[:, ::1] v = v_arr
    cdef double[::1] w = w_arr
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t rows = v.shape[0]
    cdef Py_ssize_t cols = v.shape[1]
    if v_arr.shape[axis] < n:
        raise ValueError(f"axis {axis} has {v_arr.shape[axis]} nodes, needs {n}")
    cdef Py_ssize_t out_rows = rows - n + 1 if axis == 0 else rows
    cdef Py_ssize_t out_cols = cols - n + 1 if axis == 1 else cols
    out_arr = np.empty((out_rows, out_cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc
    if axis == 0:
        with nogil:
            for i in range(out_rows):
                for j in range(out_cols):
                    acc = 0.0
                    for k in range(n):
                        acc += w[k] * v[i + k, j]
                    out[i, j] = acc
    else:
        with nogil:
            for i in range(out_rows):
                for j in range(out_cols):
                    acc = 0.0
                    for k in range(n):
                        acc += w[k] * v[i, j + k]
                    out[i, j] = acc
    return out_arr


cdef inline void _rotation(double app, double aqq, double apq,
                           double* c_out, double* s_out) nogil:
    # smallest-angle rotation that orthogonalizes the column pair
    cdef double tau, t, sgn
    tau = (aqq - app) / (2.0 * apq)
    sgn = 1.0 if tau >= 0.0 else -1.0
    t = sgn / (fabs(tau) + sqrt(1.0 + tau * tau))
    c_out[0] = 1.0 / sqrt(1.0 + t * t)
    s_out[0] = c_out[0] * t


def singular_values(a):
    """Descending singular values of a dense 2-D matrix via one-sided Jacobi."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if arr.shape[0] < arr.shape[1]:
        arr = arr.T
    cdef cnp.ndarray[double, ndim=2] B = np.array(arr, dtype=np.float64, order="C")
    cdef double[:, ::1] b = B
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t n = b.shape[1]
    cdef Py_ssize_t p, q, i, sweep
    cdef double app, aqq, apq, c, s, bp, bq
    cdef bint rotated
    with nogil:
        for sweep in range(MAX_SWEEPS):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    app = 0.0
                    aqq = 0.0
                    apq = 0.0
                    for i in range(m):
                        bp = b[i, p]
                        bq = b[i, q]
                        app += bp * bp
                        aqq += bq * bq
                        apq += bp * bq
                    if apq == 0.0 or fabs(apq) <= PAIR_TOL * sqrt(app * aqq):
                        continue
                    _rotation(app, aqq, apq, &c, &s)
                    for i in range(m):
                        bp = b[i, p]
                        bq = b[i, q]
                        b[i, p] = c * bp - s * bq
                        b[i, q] = s * bp + c * bq
                    rotated = True
            if not rotated:
                break
    sig_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] sig = sig_arr
    cdef double acc
    with nogil:
        for q in range(n):
            acc = 0.0
            for i in range(m):
                acc += b[i, q] * b[i, q]
            sig[q] = sqrt(acc)
    sig_arr[::-1].sort()
    return sig_arr


def two_column_singular_values(stack):
    """Singular values for a batch of m-by-2 matrices, shape (N, m, 2) -> (N, 2).

    One exact rotation per matrix; values come from rotated column norms.
    """
    arr = np.ascontiguousarray(stack, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("expected shape (N, m, 2)")
    cdef double[:, :, ::1] a = arr
    cdef Py_ssize_t N = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    out_arr = np.empty((N, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t idx, i
    cdef double g11, g22, g12, c, s, v1, v2, b1, b2, n1, n2
    with nogil:
        for idx in range(N):
            g11 = 0.0
            g22 = 0.0
            g12 = 0.0
            for i in range(m):
                v1 = a[idx, i, 0]
                v2 = a[idx, i, 1]
                g11 += v1 * v1
                g22 += v2 * v2
                g12 += v1 * v2
            if g12 == 0.0:
                c = 1.0
                s = 0.0
            else:
                _rotation(g11, g22, g12, &c, &s)
            n1 = 0.0
            n2 = 0.0
            for i in range(m):
                v1 = a[idx, i, 0]
                v2 = a[idx, i, 1]
                b1 = c * v1 - s * v2
                b2 = s * v1 + c * v2
                n1 += b1 * b1
                n2 += b2 * b2
            n1 = sqrt(n1)
            n2 = sqrt(n2)
            if n1 >= n2:
                out[idx, 0] = n1
                out[idx, 1] = n2
            else:
                out[idx, 0] = n2
                out[idx, 1] = n1
    return out_arr
