# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled batch fusion kernel.

Mirrors ``_kernel_py.py`` operation for operation; the two must stay
bit-identical (checked in tests/test_kernel.py).
"""

import numpy as np

from libc.math cimport INFINITY, NAN

cdef enum:
    OK = 0
    TOTAL_CONFLICT = 1
    DEGENERATE_CERTAINTY = 2
    NO_MODALITIES = 3

cdef double CONFLICT_EPS = 1e-12
cdef double CERTAINTY_EPS = 1e-12


def fuse_batch(logits, present, bint advanced):
    """Fuse ``N`` records of ``M`` modality logit rows over ``K`` classes.

    Same contract as ``_kernel_py.fuse_batch``.
    """
    cdef const double[:, :, ::1] L = np.ascontiguousarray(logits, dtype=np.float64)
    cdef const unsigned char[:, ::1] P = np.ascontiguousarray(present, dtype=np.uint8)
    cdef Py_ssize_t n = L.shape[0], m = L.shape[1], k = L.shape[2]
    cdef Py_ssize_t n_conf = m - 1 if m > 1 else 0

    beliefs_a = np.empty((n, k), dtype=np.float64)
    unc_a = np.empty(n, dtype=np.float64)
    strength_a = np.empty(n, dtype=np.float64)
    alpha_a = np.empty((n, k), dtype=np.float64)
    prob_a = np.empty((n, k), dtype=np.float64)
    conf_a = np.full((n, n_conf), np.nan, dtype=np.float64)
    steps_a = np.zeros(n, dtype=np.int32)
    status_a = np.zeros(n, dtype=np.int32)
    b_a = np.empty(k, dtype=np.float64)

    cdef double[:, ::1] FB = beliefs_a
    cdef double[::1] FU = unc_a
    cdef double[::1] ST = strength_a
    cdef double[:, ::1] AL = alpha_a
    cdef double[:, ::1] PR = prob_a
    cdef double[:, ::1] CF = conf_a
    cdef int[::1] NS = steps_a
    cdef int[::1] STAT = status_a
    cdef double[::1] b = b_a

    cdef Py_ssize_t i, j, q
    cdef double gmin, x, s, u, fu, agree, c, norm, kf = <double>k
    cdef bint any_present, have, vacuous
    cdef int status, steps

    for i in range(n):
        status = OK
        steps = 0
        gmin = INFINITY
        any_present = False
        for j in range(m):
            if P[i, j]:
                any_present = True
                for q in range(k):
                    x = L[i, j, q]
                    if x < gmin:
                        gmin = x

        for q in range(k):
            FB[i, q] = 0.0
        fu = 1.0
        have = False
        if not any_present:
            status = NO_MODALITIES
        else:
            for j in range(m):
                if not P[i, j]:
                    continue
                s = 0.0
                for q in range(k):
                    if advanced:
                        x = L[i, j, q] - gmin
                    else:
                        x = L[i, j, q]
                        if not (x > 0.0):
                            x = 0.0
                    b[q] = x
                    s += x + 1.0
                vacuous = True
                for q in range(k):
                    b[q] = b[q] / s
                    if b[q] != 0.0:
                        vacuous = False
                u = kf / s
                if vacuous and u == 1.0:
                    continue
                if not have:
                    for q in range(k):
                        FB[i, q] = b[q]
                    fu = u
                    have = True
                    continue
                agree = 0.0
                for q in range(k):
                    agree += FB[i, q] * b[q]
                c = (1.0 - fu) * (1.0 - u) - agree
                if c < 0.0:
                    c = 0.0
                norm = 1.0 - c
                if norm < CONFLICT_EPS:
                    status = TOTAL_CONFLICT
                    break
                for q in range(k):
                    FB[i, q] = (FB[i, q] * b[q] + FB[i, q] * u + b[q] * fu) / norm
                fu = fu * u / norm
                CF[i, steps] = c
                steps += 1

        if status == OK and fu < CERTAINTY_EPS:
            status = DEGENERATE_CERTAINTY
        if status == OK:
            s = kf / fu
            for q in range(k):
                AL[i, q] = FB[i, q] * s + 1.0
                PR[i, q] = AL[i, q] / s
            FU[i] = fu
            ST[i] = s
        else:
            for q in range(k):
                FB[i, q] = NAN
                AL[i, q] = NAN
                PR[i, q] = NAN
            FU[i] = NAN
            ST[i] = NAN
        NS[i] = steps
        STAT[i] = status

    return {
        "beliefs": beliefs_a,
        "uncertainty": unc_a,
        "strength": strength_a,
        "alpha": alpha_a,
        "probabilities": prob_a,
        "conflicts": conf_a,
        "n_steps": steps_a,
        "status": status_a,
    }
