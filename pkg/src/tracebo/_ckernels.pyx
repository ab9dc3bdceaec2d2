# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mixed-kernel cross matrix (hot path of GP fitting and acquisition)."""

from libc.math cimport exp, sqrt

import numpy as np


def cross_matrix(
    double[:, ::1] xa,
    double[:, ::1] ha,
    double[:, ::1] xb,
    double[:, ::1] hb,
    double[::1] lengthscales,
    double signal_variance,
    double categorical_variance,
    double mix_weight,
):
    """Mixed kernel values between two input sets, shape (len(a), len(b))."""
    cdef Py_ssize_t na = xa.shape[0]
    cdef Py_ssize_t nb = xb.shape[0]
    cdef Py_ssize_t dx = xa.shape[1]
    cdef Py_ssize_t dh = ha.shape[1]
    cdef double sqrt5 = sqrt(5.0)
    cdef double inv_dh = 1.0 / dh
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double r2, d, r, s5r, kx, kh, matches

    with nogil:
        for i in range(na):
            for j in range(nb):
                r2 = 0.0
                for k in range(dx):
                    d = (xa[i, k] - xb[j, k]) / lengthscales[k]
                    r2 += d * d
                r = sqrt(r2)
                s5r = sqrt5 * r
                kx = signal_variance * (1.0 + s5r + (5.0 / 3.0) * r2) * exp(-s5r)
                matches = 0.0
                for k in range(dh):
                    if ha[i, k] == hb[j, k]:
                        matches += 1.0
                kh = categorical_variance * matches * inv_dh
                out[i, j] = (1.0 - mix_weight) * (kh + kx) + mix_weight * (kh * kx)
    return out_arr
