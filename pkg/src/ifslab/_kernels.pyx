# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: transfer-operator stencil application and
compensated segment sums for measure coarsening.

Arithmetic mirrors ifslab._kernels_py expression by expression; the build
disables FP contraction so both backends round identically.
"""

import numpy as np

cimport cython

BACKEND_NAME = "compiled"


def transfer_apply(double[:, ::1] weights, long[:, ::1] idx,
                   double[:, ::1] frac, double[::1] values, out=None):
    cdef Py_ssize_t m = weights.shape[0]
    cdef Py_ssize_t n = weights.shape[1]
    if out is None:
        out = np.zeros(n, dtype=np.float64)
    else:
        out[:] = 0.0
    cdef double[::1] acc = out
    cdef Py_ssize_t i, j
    cdef long k
    cdef double t
    for j in range(m):
        for i in range(n):
            k = idx[j, i]
            t = frac[j, i]
            acc[i] = acc[i] + weights[j, i] * ((1.0 - t) * values[k] + t * values[k + 1])
    return out


def segment_sums(double[::1] values, long[::1] starts):
    """Kahan-compensated per-segment sums; segments end at len(values)."""
    cdef Py_ssize_t n_seg = starts.shape[0]
    cdef Py_ssize_t n = values.shape[0]
    out_arr = np.empty(n_seg, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t s, i, stop
    cdef double total, comp, y, t
    for s in range(n_seg):
        stop = n if s == n_seg - 1 else starts[s + 1]
        total = 0.0
        comp = 0.0
        for i in range(starts[s], stop):
            y = values[i] - comp
            t = total + y
            comp = (t - total) - y
            total = t
        out[s] = total
    return out_arr
