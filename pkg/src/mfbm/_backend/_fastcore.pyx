# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of ``reference.bessel_many``.

Same algorithm, same branch point, scalar C loops instead of vectorized
numpy passes.  See reference.py for the algorithm notes; keep the two in
lockstep when touching either.
"""

from libc.math cimport cbrt, ceil, exp, fabs, fmax, lgamma, log

import numpy as np


cdef double _series_one(double nu, double x) noexcept nogil:
    cdef double t, s, w
    cdef int k
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    t = exp(nu * log(0.5 * x) - lgamma(nu + 1.0))
    s = t
    w = -0.25 * x * x
    for k in range(1, 400):
        t = t * (w / (k * (nu + k)))
        s = s + t
        if fabs(t) <= 1e-18 * fabs(s):
            break
    return s


cdef double _miller_one(double nu, double x, double* c) noexcept nogil:
    cdef long M, o
    cdef double fp, fc, fn, S, inv_x
    M = <long> ceil(fmax(0.0, x - nu) + 17.0 * cbrt(fmax(x, nu)) + 30.0)
    M += M % 2
    fp = 0.0
    fc = 1e-30
    S = 0.0
    inv_x = 1.0 / x
    o = M
    while o >= 0:
        if o < M:
            fn = (2.0 * (nu + o + 1.0) * inv_x) * fc - fp
            fp = fc
            fc = fn
        if o % 2 == 0:
            S = S + c[o // 2] * fc
        if fabs(fc) > 1e250:
            fc = fc * 1e-250
            fp = fp * 1e-250
            S = S * 1e-250
        o -= 1
    return fc * exp(nu * log(0.5 * x)) / S


def bessel_many(double nu, xs):
    """J_nu at each point of a 1-d float64 array. nu > -1, xs >= 0."""
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    cdef double xmax = 0.0
    for i in range(n):
        if xv[i] > xmax:
            xmax = xv[i]

    # Normalization coefficients up to the largest start order in the batch.
    cdef long mtop = <long> ceil(fmax(0.0, xmax - nu) + 17.0 * cbrt(fmax(xmax, nu)) + 30.0)
    mtop += mtop % 2
    cdef long kmax = mtop // 2
    c_arr = np.empty(kmax + 1, dtype=np.float64)
    cdef double[::1] cv = c_arr
    cdef long k
    cdef double g1 = exp(lgamma(nu + 1.0))
    cv[0] = g1
    if kmax >= 1:
        cv[1] = (nu + 2.0) * g1
    for k in range(2, kmax + 1):
        cv[k] = cv[k - 1] * ((nu + 2 * k) / (nu + 2 * k - 2.0)) * ((nu + k - 1.0) / k)

    with nogil:
        for i in range(n):
            if xv[i] < 9.0:
                ov[i] = _series_one(nu, xv[i])
            else:
                ov[i] = _miller_one(nu, xv[i], &cv[0])
    return out_arr
