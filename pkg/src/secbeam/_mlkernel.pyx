# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for exhaustive joint detection.

For each whitened received vector, finds the candidate signature with the
smallest squared distance.  This is the hot kernel of the bit-error-rate
experiments: tiny matrices, huge repetition counts, so fused C loops beat
vectorized numpy on temporaries alone.
"""

import numpy as np

from libc.math cimport INFINITY


def ml_argmin(const double complex[:, ::1] received, const double complex[:, ::1] signatures):
    """Index of the nearest signature for every received row.

    Ties resolve to the lowest index, matching the numpy fallback.
    """
    cdef Py_ssize_t n_sym = received.shape[0]
    cdef Py_ssize_t n_cand = signatures.shape[0]
    cdef Py_ssize_t dim = received.shape[1]
    if signatures.shape[1] != dim:
        raise ValueError("received and signatures must share the last dimension")
    out = np.empty(n_sym, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef Py_ssize_t i, c, j, best_idx
    cdef double best, acc, dre, dim_
    for i in range(n_sym):
        best = INFINITY
        best_idx = 0
        for c in range(n_cand):
            acc = 0.0
            for j in range(dim):
                dre = received[i, j].real - signatures[c, j].real
                dim_ = received[i, j].imag - signatures[c, j].imag
                acc += dre * dre + dim_ * dim_
            if acc < best:
                best = acc
                best_idx = c
        out_v[i] = best_idx
    return out
