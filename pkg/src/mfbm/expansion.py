"""Series expansion of multiparameter fractional Brownian motion on the
closed unit ball.

The field is a double-indexed sum over angular degree m and radial index
n.  Term (m, n, l) couples a radial factor built from the Bessel kernel
g_m at zeros of order |m-1| - hurst, a degree-m real harmonic, and one
standard normal deviate.  Truncation cuts the index set along the level
(m+1)(m/2+n)^(2H+1) <= q, which balances angular and radial resolution.

Coefficient identity: the deviate feeding term (m, n, l) in replication
r is draw number r*h + l of a counter-based stream keyed by (seed, m, n)
with h = harmonic_count(m, dim).  The stream layout never depends on the
truncation, the grid, or the thread count, so enlarging q or the
replication count extends a sample instead of reshuffling it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .special_functions import ZeroStore, g_m, zonal_ratio
from .spherical_harmonics import basis_matrix, enumerate_basis, harmonic_count

__all__ = [
    "ModelParams",
    "TruncationSpec",
    "Truncation",
    "resolve_truncation",
    "level_index",
    "order_nu",
    "c_hn_squared",
    "tau",
    "CoefficientTable",
    "shared_zero_store",
    "normal_deviates",
    "term",
    "FieldSample",
    "sample_field",
    "covariance_closed",
    "covariance_partial",
    "n1_terms",
    "n2_terms",
    "term_weight_matrix",
    "deviate_matrix",
    "field_matrix",
]

_MASK64 = 0xFFFFFFFFFFFFFFFF
_PHILOX_SALT = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class ModelParams:
    """Dimension of the parameter space and Hurst index."""

    dim: int
    hurst: float

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError("dim must be an integer >= 1")
        if not (0.0 < self.hurst < 1.0):
            raise ValueError("hurst must lie in (0, 1)")


@dataclass(frozen=True)
class TruncationSpec:
    """Either a level-set cut at level q or an explicit rectangle."""

    kind: str
    q: float | None = None
    m_max: int | None = None
    n_max: int | None = None

    @staticmethod
    def level(q: float) -> "TruncationSpec":
        return TruncationSpec(kind="level", q=float(q))

    @staticmethod
    def rect(m_max: int, n_max: int) -> "TruncationSpec":
        return TruncationSpec(kind="rect", m_max=int(m_max), n_max=int(n_max))

    def __post_init__(self):
        if self.kind not in ("level", "rect"):
            raise ValueError("kind must be 'level' or 'rect'")
        if self.kind == "level":
            if self.q is None:
                raise ValueError("level truncation needs q")
        else:
            if self.m_max is None or self.n_max is None:
                raise ValueError("rect truncation needs m_max and n_max")
            if self.m_max < 0 or self.n_max < 1:
                raise ValueError("rect truncation needs m_max >= 0, n_max >= 1")


@dataclass(frozen=True)
class Truncation:
    """Resolved index set: rows (m, n_max) ascending in m, plus term count.

    Rows whose degree carries no harmonics in this dimension (dim = 1,
    m >= 2) are dropped; they would contribute nothing.  term_count is
    the number of scalar terms, counting the harmonic multiplicity.
    """

    dim: int
    hurst: float
    rows: tuple[tuple[int, int], ...]
    term_count: int

    def n_max(self, m: int) -> int:
        for mm, nmax in self.rows:
            if mm == m:
                return nmax
        return 0


def level_index(m: int, n: int, hurst: float) -> float:
    """Level of the pair (m, n): (m+1) * (m/2 + n)^(2H+1)."""
    return (m + 1) * (0.5 * m + n) ** (2.0 * hurst + 1.0)


def resolve_truncation(params: ModelParams, spec: TruncationSpec) -> Truncation:
    """Expand a truncation spec into explicit rows.

    Level cuts keep every pair with level_index <= q (boundary ties
    included).  q < 1 leaves the set empty, which is an error: the pair
    (0, 1) sits at level 1 and belongs to every usable cut.
    """
    rows: list[tuple[int, int]] = []
    if spec.kind == "rect":
        for m in range(spec.m_max + 1):
            if harmonic_count(m, params.dim) > 0:
                rows.append((m, spec.n_max))
    else:
        q = float(spec.q)
        if q < 1.0:
            raise ValueError("level truncation is empty for q < 1")
        e = 2.0 * params.hurst + 1.0
        m = 0
        while (m + 1) * (0.5 * m + 1.0) ** e <= q:
            n_max = int(math.floor((q / (m + 1.0)) ** (1.0 / e) - 0.5 * m))
            # float guard: walk the boundary to make the cut tie-inclusive
            while (m + 1) * (0.5 * m + n_max + 1.0) ** e <= q:
                n_max += 1
            while n_max >= 1 and (m + 1) * (0.5 * m + n_max) ** e > q:
                n_max -= 1
            if n_max >= 1 and harmonic_count(m, params.dim) > 0:
                rows.append((m, n_max))
            m += 1
    count = sum(harmonic_count(m, params.dim) * nmax for m, nmax in rows)
    return Truncation(
        dim=params.dim, hurst=params.hurst, rows=tuple(rows), term_count=count
    )


def order_nu(m: int, hurst: float) -> float:
    """Bessel order |m - 1| - H whose zeros drive the (m, n) radial factors."""
    return abs(m - 1) - hurst


def c_hn_squared(params: ModelParams) -> float:
    """Squared normalizing constant of the covariance expansion."""
    h, n = params.hurst, params.dim
    return (
        2.0 ** (2.0 * h - 1.0)
        * math.gamma(h + 0.5 * n)
        * math.gamma(h + 1.0)
        * math.sin(math.pi * h)
        / math.pi ** (0.5 * (n + 2))
    )


_shared_store = ZeroStore()


def shared_zero_store() -> ZeroStore:
    """Process-wide zero cache reused by coefficient tables."""
    return _shared_store


def _tau_from_zeros(params: ModelParams, zeros: np.ndarray, j_next: np.ndarray) -> np.ndarray:
    c = math.sqrt(c_hn_squared(params))
    pref = 2.0 * math.sqrt(2.0) * math.pi ** (0.5 * params.dim) * c / math.gamma(0.5 * params.dim)
    return pref / (np.abs(j_next) * zeros ** (params.hurst + 1.0))


@dataclass(frozen=True)
class CoefficientRow:
    m: int
    zeros: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)


class CoefficientTable:
    """Zeros and tau amplitudes for every row of a resolved truncation."""

    def __init__(self, params: ModelParams, truncation: Truncation, store: ZeroStore | None = None):
        from ._backend import bessel_many  # local import keeps module load light

        self.params = params
        self.truncation = truncation
        store = store if store is not None else _shared_store
        rows: list[CoefficientRow] = []
        for m, n_max in truncation.rows:
            nu = order_nu(m, params.hurst)
            zeros = store.get(nu, n_max)
            j_next = bessel_many(nu + 1.0, zeros)
            rows.append(CoefficientRow(m=m, zeros=zeros, tau=_tau_from_zeros(params, zeros, j_next)))
        self.rows = tuple(rows)


def tau(params: ModelParams, m: int, n: int, store: ZeroStore | None = None) -> float:
    """Amplitude of term (m, n); positive by the |J| normalization."""
    if n < 1:
        raise ValueError("tau requires n >= 1")
    from ._backend import bessel_many

    store = store if store is not None else _shared_store
    nu = order_nu(m, params.hurst)
    zeros = store.get(nu, n)
    j_next = bessel_many(nu + 1.0, zeros[n - 1 : n])
    return float(_tau_from_zeros(params, zeros[n - 1 : n], j_next)[0])


def normal_deviates(seed: int, m: int, n: int, count: int) -> np.ndarray:
    """First `count` values of the (seed, m, n) deviate stream.

    Counter-based (Philox), so streams for different (m, n) never overlap
    and extending `count` appends without changing earlier values.
    """
    key = np.array([int(seed) & _MASK64, _PHILOX_SALT], dtype=np.uint64)
    counter = np.array([0, 0, n, m], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(counter=counter, key=key))
    return gen.standard_normal(count)


def _deviate_block(seed: int, m: int, n_max: int, h: int, replications: int) -> np.ndarray:
    """Deviates for one degree: shape (replications, n_max, h)."""
    out = np.empty((replications, n_max, h))
    for n in range(1, n_max + 1):
        out[:, n - 1, :] = normal_deviates(seed, m, n, replications * h).reshape(
            replications, h
        )
    return out


def term(params: ModelParams, m: int, n: int, idx, x, store: ZeroStore | None = None) -> float:
    """Deterministic coefficient of deviate (m, n, idx) at the point x.

    tau_mn * (g_m(j_mn ||x||) - [m = 0]) * S_idx(x / ||x||); zero at the
    origin for every index (all radial factors vanish there).
    """
    from .spherical_harmonics import evaluate_real_harmonic

    pt = np.asarray(x, dtype=np.float64).reshape(-1)
    r = float(np.sqrt((pt * pt).sum()))
    if r == 0.0:
        return 0.0
    t = tau(params, m, n, store)
    store = store if store is not None else _shared_store
    j = store.get(order_nu(m, params.hurst), n)[n - 1]
    radial = g_m(m, params.dim, j * r) - (1.0 if m == 0 else 0.0)
    return t * radial * evaluate_real_harmonic(idx, params.dim, pt / r)


@dataclass(frozen=True)
class FieldSample:
    params: ModelParams
    truncation: Truncation
    seed: int
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def _grid_geometry(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("grid must be a (points, dim) array")
    rad = np.sqrt(np.einsum("pi,pi->p", pts, pts))
    if rad.size and float(rad.max()) > 1.0 + 1e-12:
        raise ValueError("grid point outside the closed unit ball")
    safe = np.where(rad > 0.0, rad, 1.0)
    units = pts / safe[:, None]
    units[rad == 0.0] = 0.0
    units[rad == 0.0, 0] = 1.0  # direction is irrelevant at the origin
    return pts, rad, units


def _field_chunk(
    params: ModelParams,
    table: CoefficientTable,
    deviates: dict[int, np.ndarray],
    rad: np.ndarray,
    units: np.ndarray,
) -> np.ndarray:
    """Field values on one chunk of points, replication 0.

    Built for bit-reproducibility: every operation is elementwise or a
    fixed-order reduction over term rows, so the result for a point does
    not depend on which other points share the chunk (and hence not on
    the thread count).
    """
    blocks = []
    for row in table.rows:
        args = np.multiply.outer(row.zeros, rad)
        radial = np.asarray(g_m(row.m, params.dim, args))
        if row.m == 0:
            radial = radial - 1.0
        s_mat = basis_matrix(row.m, params.dim, units)
        z = deviates[row.m][0]  # (n_max, h)
        angular = np.einsum("nl,lp->np", z, s_mat)
        blocks.append(row.tau[:, None] * radial * angular)
    if not blocks:
        return np.zeros(rad.size)
    stacked = np.concatenate(blocks, axis=0)
    values = np.add.reduce(stacked, axis=0)
    return np.where(rad == 0.0, 0.0, values)


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads


def sample_field(
    params: ModelParams,
    truncation: TruncationSpec | Truncation,
    grid,
    seed: int,
    threads: int = 1,
    store: ZeroStore | None = None,
) -> FieldSample:
    """One realization of the truncated field on a grid of ball points.

    Identical (params, truncation, seed, grid) give bit-identical values
    regardless of `threads`; see _field_chunk for why.
    """
    trunc = (
        truncation
        if isinstance(truncation, Truncation)
        else resolve_truncation(params, truncation)
    )
    pts, rad, units = _grid_geometry(grid)
    table = CoefficientTable(params, trunc, store)
    deviates = {
        m: _deviate_block(seed, m, n_max, harmonic_count(m, params.dim), 1)
        for m, n_max in trunc.rows
    }
    nthreads = _resolve_threads(threads)
    npts = rad.size
    if nthreads <= 1 or npts < 2 * nthreads:
        values = _field_chunk(params, table, deviates, rad, units)
    else:
        bounds = np.linspace(0, npts, nthreads + 1).astype(int)
        chunks = [(rad[a:b], units[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(
                pool.map(lambda c: _field_chunk(params, table, deviates, c[0], c[1]), chunks)
            )
        values = np.concatenate(parts)
    return FieldSample(params=params, truncation=trunc, seed=int(seed), points=pts, values=values)


def covariance_closed(params: ModelParams, x, y) -> float:
    """Closed-form covariance (||x||^2H + ||y||^2H - ||x-y||^2H) / 2."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    twoh = 2.0 * params.hurst
    return 0.5 * (
        float(np.linalg.norm(xv)) ** twoh
        + float(np.linalg.norm(yv)) ** twoh
        - float(np.linalg.norm(xv - yv)) ** twoh
    )


def covariance_partial(
    params: ModelParams,
    truncation: TruncationSpec | Truncation,
    x,
    y,
    store: ZeroStore | None = None,
) -> float:
    """Covariance of the truncated field: the partial sum of the series.

    The harmonic sum collapses by the addition theorem to a zonal factor
    in the angle between x and y, so cost is linear in the number of
    (m, n) rows.  Converges to covariance_closed as the cut grows, and
    on the diagonal (x = y) the convergence is monotone from below.
    """
    trunc = (
        truncation
        if isinstance(truncation, Truncation)
        else resolve_truncation(params, truncation)
    )
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    rx = float(np.sqrt((xv * xv).sum()))
    ry = float(np.sqrt((yv * yv).sum()))
    if rx > 0.0 and ry > 0.0:
        ct = float(np.dot(xv, yv) / (rx * ry))
    else:
        ct = 1.0  # angle is irrelevant: every m >= 1 radial factor vanishes
    table = CoefficientTable(params, trunc, store)
    dim = params.dim
    area = 2.0 * math.pi ** (0.5 * dim) / math.gamma(0.5 * dim)
    total = 0.0
    for row in table.rows:
        gx = np.asarray(g_m(row.m, dim, row.zeros * rx))
        gy = np.asarray(g_m(row.m, dim, row.zeros * ry))
        if row.m == 0:
            gx = gx - 1.0
            gy = gy - 1.0
        radial = float(np.add.reduce(row.tau * row.tau * gx * gy))
        weight = harmonic_count(row.m, dim) / area * zonal_ratio(row.m, dim, ct)
        total += radial * weight
    return total


def n1_terms(params: ModelParams, n: int, store: ZeroStore | None = None):
    """dim = 1 reduction: ((cos zero, cos amplitude), (sin zero, sin amplitude)).

    The field on [-1, 1] collapses to
    sum_n a_n (cos(j0_n x) - 1) xi_n + b_n sin(j1_n x) xi'_n
    with a_n = tau_{0n}/sqrt(2), b_n = tau_{1n}/sqrt(2); at H = 1/2 the
    cosine amplitude is exactly 1/(n pi).
    """
    if params.dim != 1:
        raise ValueError("n1_terms requires dim = 1")
    store = store if store is not None else _shared_store
    j0 = float(store.get(order_nu(0, params.hurst), n)[n - 1])
    j1 = float(store.get(order_nu(1, params.hurst), n)[n - 1])
    a = tau(params, 0, n, store) / math.sqrt(2.0)
    b = tau(params, 1, n, store) / math.sqrt(2.0)
    return ((j0, a), (j1, b))


def n2_terms(params: ModelParams, m: int, n: int, store: ZeroStore | None = None):
    """dim = 2 reduction: (zero, radial amplitude of the cos/sin pair).

    Degree 0 pairs with 1/sqrt(2 pi), higher degrees with cos(m phi)/sqrt(pi)
    and sin(m phi)/sqrt(pi), so the radial amplitude is tau/sqrt(2 pi) or
    tau/sqrt(pi) respectively.
    """
    if params.dim != 2:
        raise ValueError("n2_terms requires dim = 2")
    store = store if store is not None else _shared_store
    j = float(store.get(order_nu(m, params.hurst), n)[n - 1])
    amp = tau(params, m, n, store) / math.sqrt(2.0 * math.pi if m == 0 else math.pi)
    return (j, amp)


def term_weight_matrix(
    params: ModelParams,
    truncation: Truncation,
    grid,
    store: ZeroStore | None = None,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int, int]]]:
    """Deterministic term weights on a grid, one row per scalar term.

    Returns (weights, levels, ids): weights[row, p] is the coefficient
    multiplying deviate row `row` at point p, rows in canonical (m, n, l)
    order; levels[row] is the truncation level of the row's (m, n); ids
    lists the (m, n, l) triples.  field = deviate_matrix @ weights.
    """
    pts, rad, units = _grid_geometry(grid)
    table = CoefficientTable(params, truncation, store)
    nrows = truncation.term_count
    weights = np.empty((nrows, rad.size))
    levels = np.empty(nrows)
    ids: list[tuple[int, int, int]] = []
    at = 0
    for row in table.rows:
        h = harmonic_count(row.m, params.dim)
        args = np.multiply.outer(row.zeros, rad)
        radial = np.asarray(g_m(row.m, params.dim, args))
        if row.m == 0:
            radial = radial - 1.0
        radial = np.where(rad[None, :] == 0.0, 0.0, radial)
        s_mat = basis_matrix(row.m, params.dim, units)
        n_max = row.zeros.size
        block = (row.tau[:, None] * radial)[:, None, :] * s_mat[None, :, :]
        weights[at : at + n_max * h] = block.reshape(n_max * h, rad.size)
        lv = level_index(row.m, np.arange(1, n_max + 1).astype(float), params.hurst)
        levels[at : at + n_max * h] = np.repeat(lv, h)
        ids.extend((row.m, n, l) for n in range(1, n_max + 1) for l in range(h))
        at += n_max * h
    return weights, levels, ids


def deviate_matrix(
    params: ModelParams, truncation: Truncation, seed: int, replications: int
) -> np.ndarray:
    """Deviates matching term_weight_matrix rows: shape (replications, terms)."""
    cols = []
    for m, n_max in truncation.rows:
        h = harmonic_count(m, params.dim)
        block = _deviate_block(seed, m, n_max, h, replications)
        cols.append(block.reshape(replications, n_max * h))
    if not cols:
        return np.zeros((replications, 0))
    return np.concatenate(cols, axis=1)


def field_matrix(
    params: ModelParams,
    truncation: TruncationSpec | Truncation,
    grid,
    seed: int,
    replications: int,
    store: ZeroStore | None = None,
) -> np.ndarray:
    """Replicated field values, shape (replications, points).

    Replication r of this matrix equals the single-sample path with the
    same seed (same coefficient identity); this is the bulk engine for
    Monte Carlo work, not the bit-reproducible one.
    """
    trunc = (
        truncation
        if isinstance(truncation, Truncation)
        else resolve_truncation(params, truncation)
    )
    weights, _, _ = term_weight_matrix(params, trunc, grid, store)
    z = deviate_matrix(params, trunc, seed, replications)
    return z @ weights
