"""Reference (numpy) implementation of the Bessel evaluation kernel.

This is the fallback twin of the compiled extension in ``_fastcore.pyx``.
Both implement the same algorithm with the same branch point so results
agree to rounding:

* ascending power series for x < 9,
* Miller backward recurrence for x >= 9, normalized with the Neumann
  series (x/2)^nu = sum_k c_k J_{nu+2k}(x).

The series switch sits at 9 on purpose: pushing it to 12 makes the largest
series term several thousand times the result for low orders, which costs
about two digits.  The backward recurrence is stable for all orders; the
familiar forward recurrence is not once the order exceeds the argument.

Domain handled here: nu > -1, x >= 0 (callers validate).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_many"]


def _norm_coeffs(nu: float, kmax: int) -> np.ndarray:
    """Coefficients c_k of the Neumann normalization series, k = 0..kmax.

    c_0 = Gamma(nu+1), c_1 = (nu+2) Gamma(nu+1), then
    c_k = c_{k-1} * ((nu+2k)/(nu+2k-2)) * ((nu+k-1)/k).

    c_1 is computed directly because the ratio form divides by nu at k=1.
    """
    c = np.empty(kmax + 1)
    g1 = math.exp(math.lgamma(nu + 1.0))
    c[0] = g1
    if kmax >= 1:
        c[1] = (nu + 2.0) * g1
    for k in range(2, kmax + 1):
        c[k] = c[k - 1] * ((nu + 2 * k) / (nu + 2 * k - 2.0)) * ((nu + k - 1.0) / k)
    return c


def _series(nu: float, xs: np.ndarray) -> np.ndarray:
    out = np.empty_like(xs)
    zero = xs == 0.0
    if zero.any():
        out[zero] = 1.0 if nu == 0.0 else 0.0
    xe = xs[~zero]
    if xe.size:
        t = np.exp(nu * np.log(0.5 * xe) - math.lgamma(nu + 1.0))
        s = t.copy()
        w = -0.25 * xe * xe
        for k in range(1, 400):
            t = t * (w / (k * (nu + k)))
            s += t
            if np.all(np.abs(t) <= 1e-18 * np.abs(s)):
                break
        out[~zero] = s
    return out


def _miller(nu: float, xs: np.ndarray) -> np.ndarray:
    # Start order: enough margin past the turning point that the wanted
    # minimal solution dominates to ~1e-18 (the cube-root term is the Airy
    # zone width; 17.0 leaves real margin where 12.5 has none).
    top = np.maximum(xs, nu)
    M = np.ceil(np.maximum(0.0, xs - nu) + 17.0 * np.cbrt(top) + 30.0).astype(np.int64)
    M += M % 2
    mmax = int(M.max())
    c = _norm_coeffs(nu, mmax // 2)
    fp = np.zeros_like(xs)
    fc = np.zeros_like(xs)
    S = np.zeros_like(xs)
    inv_x = 1.0 / xs
    for o in range(mmax, -1, -1):
        start = M == o
        if start.any():
            fc = np.where(start, 1e-30, fc)
            fp = np.where(start, 0.0, fp)
        stepped = M > o
        if stepped.any():
            fn = (2.0 * (nu + o + 1.0) * inv_x) * fc - fp
            fp = np.where(stepped, fc, fp)
            fc = np.where(stepped, fn, fc)
        if o % 2 == 0:
            S = S + c[o // 2] * fc
        big = np.abs(fc) > 1e250
        if big.any():
            sc = np.where(big, 1e-250, 1.0)
            fc = fc * sc
            fp = fp * sc
            S = S * sc
    return fc * np.exp(nu * np.log(0.5 * xs)) / S


def bessel_many(nu: float, xs: np.ndarray) -> np.ndarray:
    """J_nu at each point of a 1-d float64 array. nu > -1, xs >= 0."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty_like(xs)
    lo = xs < 9.0
    if lo.any():
        out[lo] = _series(nu, xs[lo])
    hi = ~lo
    if hi.any():
        out[hi] = _miller(nu, xs[hi])
    return out
