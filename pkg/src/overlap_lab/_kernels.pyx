# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled covering-word tree descent; mirrors ``_pykernels.cover_profile``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport fabs

cnp.import_array()


def cover_profile(double[::1] ratios, double[::1] offsets, double hull_lo, double hull_hi,
                  double plo, double phi, double margin, int n, double[::1] logp,
                  double target, double tau):
    cdef Py_ssize_t m = ratios.shape[0]
    cdef Py_ssize_t cap = n * m + 2
    cdef cnp.ndarray[cnp.int64_t, ndim=1] beta_a = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] filt_a = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] amb_a = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] beta = beta_a
    cdef cnp.int64_t[::1] filt = filt_a
    cdef cnp.int64_t[::1] amb = amb_a
    cdef int *sk = <int *> malloc(cap * sizeof(int))
    cdef double *sR = <double *> malloc(cap * sizeof(double))
    cdef double *sB = <double *> malloc(cap * sizeof(double))
    cdef double *sS = <double *> malloc(cap * sizeof(double))
    cdef Py_ssize_t top = 0, j
    cdef int k, k1
    cdef double R, B, S, R2, B2, S2, a, c, t
    cdef double lo_e = plo - margin
    cdef double hi_e = phi + margin
    cdef long long visits = 0
    if sk == NULL or sR == NULL or sB == NULL or sS == NULL:
        free(sk); free(sR); free(sB); free(sS)
        raise MemoryError()
    beta[0] = 1
    filt[0] = 1
    with nogil:
        sk[0] = 0
        sR[0] = 1.0
        sB[0] = 0.0
        sS[0] = 0.0
        top = 1
        while top > 0:
            top -= 1
            k = sk[top]
            R = sR[top]
            B = sB[top]
            S = sS[top]
            k1 = k + 1
            for j in range(m):
                R2 = R * ratios[j]
                B2 = R * offsets[j] + B
                a = R2 * hull_lo + B2
                c = R2 * hull_hi + B2
                if a > c:
                    t = a
                    a = c
                    c = t
                visits += 1
                if c < lo_e or a > hi_e:
                    continue
                S2 = S + logp[j]
                beta[k1] += 1
                if not (a <= lo_e and c >= hi_e):
                    amb[k1] += 1
                if fabs(S2 / k1 - target) < tau:
                    filt[k1] += 1
                if k1 < n:
                    sk[top] = k1
                    sR[top] = R2
                    sB[top] = B2
                    sS[top] = S2
                    top += 1
    free(sk); free(sR); free(sB); free(sS)
    return beta_a, filt_a, amb_a, visits
