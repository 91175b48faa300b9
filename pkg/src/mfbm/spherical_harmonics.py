"""Real spherical harmonics on S^{dim-1} for arbitrary dimension.

Basis elements are indexed by nonincreasing integer chains
(m_0, m_1, ..., m_{dim-2}) with m_0 = m, plus a sign picking the real or
imaginary part of the final complex factor.  Unnormalized harmonics are
products of homogeneous Gegenbauer factors in nested suffix radii times
(x_{dim-1} + i x_dim)^{m_last}; squared norms come in closed form, so no
quadrature happens at runtime.  dim = 1 degenerates to the two-point
sphere {-1, +1} with counting measure.

The zonal axis is the first coordinate: the degree-m zonal harmonic is a
function of x_1/||x|| alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special_functions import surface_area, zonal_ratio

__all__ = [
    "MultiIndex",
    "harmonic_count",
    "enumerate_basis",
    "l_norm",
    "evaluate_real_harmonic",
    "basis_matrix",
    "addition_kernel",
]


def harmonic_count(m: int, dim: int) -> int:
    """Number of linearly independent degree-m harmonics on S^{dim-1}.

    dim = 1: 1 for m in {0, 1}, else 0 (the sphere is two points).
    dim = 2: 1 for m = 0, else 2 (cosine and sine).
    dim >= 3: (2m + dim - 2) (m + dim - 3)! / ((dim - 2)! m!).
    """
    if m < 0:
        raise ValueError("harmonic_count requires m >= 0")
    if dim < 1:
        raise ValueError("harmonic_count requires dim >= 1")
    if dim == 1:
        return 1 if m <= 1 else 0
    if dim == 2:
        return 1 if m == 0 else 2
    if m == 0:
        return 1
    return (
        (2 * m + dim - 2)
        * math.factorial(m + dim - 3)
        // (math.factorial(dim - 2) * math.factorial(m))
    )


@dataclass(frozen=True)
class MultiIndex:
    """Label of one real harmonic: a degree chain and a sign.

    degrees: nonincreasing, degrees[0] is the harmonic degree m.  For
    dim >= 2 the chain has dim - 1 entries; dim = 1 uses (m,).  sign +1
    takes the real part of the final complex factor, -1 the imaginary
    part; indices with degrees[-1] = 0 only exist with sign +1.
    """

    degrees: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if not self.degrees:
            raise ValueError("empty degree chain")
        if any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be >= 0")
        if any(a < b for a, b in zip(self.degrees, self.degrees[1:])):
            raise ValueError("degree chain must be nonincreasing")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.degrees[-1] == 0 and self.sign != 1:
            raise ValueError("sign -1 requires a positive final degree")

    @property
    def degree(self) -> int:
        return self.degrees[0]


def _chains(m: int, length: int) -> list[tuple[int, ...]]:
    """All nonincreasing chains of the given length starting at m, lex order."""
    if length == 1:
        return [(m,)]
    out: list[tuple[int, ...]] = []
    for nxt in range(0, m + 1):
        for rest in _chains(nxt, length - 1):
            out.append((m,) + rest)
    out.sort()
    return out


@lru_cache(maxsize=None)
def enumerate_basis(m: int, dim: int) -> tuple[MultiIndex, ...]:
    """Degree-m real basis indices in canonical order.

    Chains ascend lexicographically; within a chain the +1 (real part)
    element precedes the -1 (imaginary part) one.  Length equals
    harmonic_count(m, dim).
    """
    if dim < 1:
        raise ValueError("enumerate_basis requires dim >= 1")
    if m < 0:
        raise ValueError("enumerate_basis requires m >= 0")
    if dim == 1:
        return (MultiIndex((m,), 1),) if m <= 1 else ()
    out: list[MultiIndex] = []
    for chain in _chains(m, dim - 1):
        out.append(MultiIndex(chain, 1))
        if chain[-1] > 0:
            out.append(MultiIndex(chain, -1))
    return tuple(out)


def _log_level_norm(j: int, mu: float) -> float:
    # integral over [0, pi] of (C_j^mu(cos t))^2 (sin t)^(2 mu) dt, logged
    return (
        math.log(math.pi)
        + (1.0 - 2.0 * mu) * math.log(2.0)
        + math.lgamma(j + 2.0 * mu)
        - math.lgamma(j + 1.0)
        - math.log(j + mu)
        - 2.0 * math.lgamma(mu)
    )


def l_norm(idx: MultiIndex, dim: int) -> float:
    """Squared sphere-norm L of the unnormalized complex harmonic Y.

    The normalized real element is Y/sqrt(L) when the final degree is 0
    and sqrt(2) Re(Y)/sqrt(L) or sqrt(2) Im(Y)/sqrt(L) otherwise.
    """
    if dim == 1:
        return 2.0
    if len(idx.degrees) != dim - 1:
        raise ValueError("degree chain length must be dim - 1")
    log_l = math.log(2.0 * math.pi)
    for k in range(dim - 2):
        j = idx.degrees[k] - idx.degrees[k + 1]
        mu = idx.degrees[k + 1] + 0.5 * (dim - 2 - k)
        log_l += _log_level_norm(j, mu)
    return math.exp(log_l)


def _homogeneous_gegenbauer(j: int, mu: float, x: np.ndarray, r_sq: np.ndarray) -> np.ndarray:
    """r^j C_j^mu(x/r) through a recurrence in (x, r^2); exact at r = 0."""
    if j == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 2.0 * mu * x
    for i in range(2, j + 1):
        prev, cur = cur, (2.0 * (i + mu - 1.0) * x * cur - (i + 2.0 * mu - 2.0) * r_sq * prev) / i
    return cur


def _complex_harmonic(idx: MultiIndex, dim: int, units: np.ndarray) -> np.ndarray:
    """Unnormalized Y at unit vectors, shape (P,), complex."""
    last = idx.degrees[-1]
    tail = (units[:, dim - 2] + 1j * units[:, dim - 1]) ** last
    if dim == 2:
        return tail
    # suffix squared radii r_k^2 = sum_{i >= k} u_i^2
    ssq = np.cumsum(units[:, ::-1] ** 2, axis=1)[:, ::-1]
    out = tail.astype(np.complex128)
    for k in range(dim - 2):
        j = idx.degrees[k] - idx.degrees[k + 1]
        mu = idx.degrees[k + 1] + 0.5 * (dim - 2 - k)
        out = out * _homogeneous_gegenbauer(j, mu, units[:, k], ssq[:, k])
    return out


def _evaluate_many(idx: MultiIndex, dim: int, units: np.ndarray) -> np.ndarray:
    if dim == 1:
        if idx.degrees[0] == 0:
            return np.full(units.shape[0], 1.0 / math.sqrt(2.0))
        return units[:, 0] / math.sqrt(2.0)
    y = _complex_harmonic(idx, dim, units)
    scale = 1.0 / math.sqrt(l_norm(idx, dim))
    if idx.degrees[-1] == 0:
        return y.real * scale
    part = y.real if idx.sign == 1 else y.imag
    return part * (math.sqrt(2.0) * scale)


def evaluate_real_harmonic(idx: MultiIndex, dim: int, x) -> float:
    """Normalized real harmonic S at x != 0; S(cx) = S(x) for c > 0."""
    pt = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if pt.shape[1] != dim:
        raise ValueError("point dimension mismatch")
    r = float(np.sqrt((pt * pt).sum()))
    if r == 0.0:
        raise ValueError("harmonics are undefined at the origin")
    return float(_evaluate_many(idx, dim, pt / r)[0])


def basis_matrix(m: int, dim: int, units: np.ndarray) -> np.ndarray:
    """All degree-m normalized harmonics at unit vectors: shape (h, P).

    `units` is (P, dim) and must already be normalized; rows follow
    enumerate_basis order.
    """
    basis = enumerate_basis(m, dim)
    out = np.empty((len(basis), units.shape[0]))
    for i, idx in enumerate(basis):
        out[i] = _evaluate_many(idx, dim, units)
    return out


def addition_kernel(m: int, dim: int, cos_angle: float) -> float:
    """Closed form of sum_l S^l_m(u) S^l_m(v) as a function of cos(angle)."""
    return harmonic_count(m, dim) / surface_area(dim) * zonal_ratio(m, dim, cos_angle)
