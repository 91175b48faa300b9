"""Statistical and numerical checks: empirical moments against the closed
covariance, coupled tail sup-norms, and the decay-rate regression."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansion import (
    ModelParams,
    Truncation,
    TruncationSpec,
    deviate_matrix,
    field_matrix,
    resolve_truncation,
    term_weight_matrix,
)

__all__ = [
    "halton_ball",
    "empirical_covariance",
    "empirical_increment",
    "tail_sup_norm",
    "tail_profile",
    "RateReport",
    "rate_regression",
    "term_count_exponent",
    "kurtosis_stat",
]


def _primes(count: int) -> list[int]:
    out: list[int] = []
    cand = 2
    while len(out) < count:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return out


def _radical_inverse(base: int, index: int) -> float:
    inv = 0.0
    scale = 1.0 / base
    while index:
        inv += (index % base) * scale
        index //= base
        scale /= base
    return inv


def halton_ball(dim: int, count: int) -> np.ndarray:
    """First `count` Halton cube points that land in the closed unit ball.

    Deterministic low-discrepancy grid; no randomness, no external files.
    """
    if dim < 1 or count < 1:
        raise ValueError("halton_ball requires dim >= 1 and count >= 1")
    bases = _primes(dim)
    pts = np.empty((count, dim))
    kept = 0
    index = 1
    while kept < count:
        x = np.array([2.0 * _radical_inverse(b, index) - 1.0 for b in bases])
        index += 1
        if float((x * x).sum()) <= 1.0:
            pts[kept] = x
            kept += 1
    return pts


def _resolve(params: ModelParams, truncation: TruncationSpec | Truncation) -> Truncation:
    if isinstance(truncation, Truncation):
        return truncation
    return resolve_truncation(params, truncation)


def empirical_covariance(
    params: ModelParams,
    truncation: TruncationSpec | Truncation,
    x,
    y,
    replications: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[xi(x) xi(y)] with its standard error."""
    if replications < 100:
        raise ValueError("need at least 100 replications")
    vals = field_matrix(params, _resolve(params, truncation), np.array([x, y], dtype=np.float64), seed, replications)
    prods = vals[:, 0] * vals[:, 1]
    est = math.fsum(prods) / replications
    var = math.fsum((prods - est) ** 2) / (replications - 1)
    return est, math.sqrt(var / replications)


def empirical_increment(
    params: ModelParams,
    truncation: TruncationSpec | Truncation,
    x,
    y,
    replications: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[(xi(x) - xi(y))^2] with its standard error."""
    if replications < 100:
        raise ValueError("need at least 100 replications")
    vals = field_matrix(params, _resolve(params, truncation), np.array([x, y], dtype=np.float64), seed, replications)
    sq = (vals[:, 0] - vals[:, 1]) ** 2
    est = math.fsum(sq) / replications
    var = math.fsum((sq - est) ** 2) / (replications - 1)
    return est, math.sqrt(var / replications)


def _shell_fields(
    params: ModelParams,
    q_levels: list[float],
    grid,
    replications: int,
    seed: int,
) -> tuple[np.ndarray, list[float]]:
    """Per-replication field contributions between consecutive level cuts.

    Returns (fields, cuts): fields[k] is the (replications, points) sum of
    terms with level in (q_levels[k], q_levels[k+1]] (the last entry ends
    at the largest level).  Coupled by construction: one deviate matrix
    serves every cut, so differences between truncations use common
    random numbers.
    """
    qs = sorted(float(q) for q in q_levels)
    trunc = resolve_truncation(params, TruncationSpec.level(qs[-1]))
    weights, levels, _ = term_weight_matrix(params, trunc, grid)
    z = deviate_matrix(params, trunc, seed, replications)
    order = np.argsort(levels, kind="stable")
    weights = weights[order]
    z = z[:, order]
    levels = levels[order]
    cuts = np.searchsorted(levels, np.asarray(qs), side="right")
    fields = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            fields.append(z[:, a:b] @ weights[a:b])
        else:
            fields.append(np.zeros((replications, weights.shape[1])))
    return np.array(fields), qs


def tail_sup_norm(
    params: ModelParams,
    q_low: float,
    q_high: float,
    grid,
    replications: int,
    seed: int,
) -> float:
    """E max over the grid of |xi_{q_high}(x) - xi_{q_low}(x)|, coupled.

    A Monte Carlo proxy for the sup-norm of the series tail beyond the
    q_low cut, with q_high standing in for the full field.
    """
    if q_low > q_high:
        raise ValueError("tail_sup_norm requires q_low <= q_high")
    if q_low == q_high:
        return 0.0
    fields, _ = _shell_fields(params, [q_low, q_high], grid, replications, seed)
    sup = np.abs(fields[0]).max(axis=1)
    return math.fsum(sup) / replications


def tail_profile(
    params: ModelParams,
    q_levels: list[float],
    q_high: float,
    grid,
    replications: int,
    seed: int,
) -> list[float]:
    """tail_sup_norm(q, q_high) for each q, sharing one coupled sample."""
    qs = sorted(float(q) for q in q_levels)
    if qs[-1] > q_high:
        raise ValueError("q_levels must not exceed q_high")
    fields, _ = _shell_fields(params, qs + [q_high], grid, replications, seed)
    # suffix sums: tail beyond qs[k] is every shell above it
    suffix = np.cumsum(fields[::-1], axis=0)[::-1]
    out = []
    for k in range(len(qs)):
        sup = np.abs(suffix[k]).max(axis=1)
        out.append(math.fsum(sup) / replications)
    return out


@dataclass(frozen=True)
class RateReport:
    p_values: tuple[int, ...]
    tail_norms: tuple[float, ...]
    fitted_slope: float
    expected_slope: float
    slope_error: float
    log_correction_used: bool


def rate_regression(
    params: ModelParams,
    p_list,
    tail_estimates,
    log_correction: bool = True,
) -> RateReport:
    """Least-squares slope of log tail against log term count.

    The sqrt(log p) factor predicted for the sup-norm is divided out
    before fitting (two-parameter fits are unstable at this scale).
    Requires at least 5 strictly increasing p spanning a decade.
    """
    p = np.asarray(list(p_list), dtype=np.float64)
    t = np.asarray(list(tail_estimates), dtype=np.float64)
    if p.size != t.size:
        raise ValueError("p_list and tail_estimates must align")
    if p.size < 5:
        raise ValueError("need at least 5 points")
    if np.any(np.diff(p) <= 0.0):
        raise ValueError("p_list must be strictly increasing")
    if p[-1] / p[0] < 10.0:
        raise ValueError("p_list must span at least one decade")
    if np.any(t <= 0.0):
        raise ValueError("tail estimates must be positive")
    y = np.log(t)
    if log_correction:
        y = y - 0.5 * np.log(np.log(p))
    slope, _ = np.polyfit(np.log(p), y, 1)
    expected = -params.hurst / params.dim
    return RateReport(
        p_values=tuple(int(v) for v in p),
        tail_norms=tuple(float(v) for v in t),
        fitted_slope=float(slope),
        expected_slope=expected,
        slope_error=abs(float(slope) - expected),
        log_correction_used=log_correction,
    )


def term_count_exponent(params: ModelParams, q_list) -> float:
    """Fitted exponent of the term count p(q) against q."""
    qs = np.asarray(list(q_list), dtype=np.float64)
    if qs.size < 2:
        raise ValueError("need at least 2 levels")
    counts = [
        resolve_truncation(params, TruncationSpec.level(q)).term_count for q in qs
    ]
    slope, _ = np.polyfit(np.log(qs), np.log(np.asarray(counts, dtype=np.float64)), 1)
    return float(slope)


def kurtosis_stat(values) -> tuple[float, float]:
    """Sample kurtosis and the 3-sigma normality band 3 sqrt(24 / n)."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n < 10:
        raise ValueError("need at least 10 values")
    centered = v - v.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    return m4 / (m2 * m2), 3.0 * math.sqrt(24.0 / n)
