"""Command-line front end.

Subcommands: zeros, sample, cov, rate, harmonics.  Exit codes: 0 success,
2 invalid flags (argparse usage errors, message names the flag), 3 numeric
failure.  Bare invocations are reproducible: the seed defaults to a fixed
constant rather than entropy.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .expansion import (
    ModelParams,
    TruncationSpec,
    covariance_closed,
    covariance_partial,
    resolve_truncation,
    sample_field,
)
from .io_formats import write_table
from .special_functions import bessel_zeros
from .spherical_harmonics import enumerate_basis, l_norm
from .validation import halton_ball, rate_regression, tail_profile, term_count_exponent

DEFAULT_SEED = 20259
_PAIR_SALT = 0x5851F42D4C957F2D

__all__ = ["RunConfig", "build_parser", "run", "main", "parse_grid"]


@dataclass
class RunConfig:
    command: str
    params: ModelParams | None = None
    truncation: TruncationSpec | None = None
    grid: str | None = None
    seed: int = DEFAULT_SEED
    reps: int = 200
    nu: float | None = None
    count: int = 10
    output: str | None = None
    fmt: str = "csv"
    threads: int = 1


def parse_grid(spec: str, dim: int) -> np.ndarray:
    """Expand a grid shorthand into ball points.

    disk:k and ball:k are synonyms: a k-per-axis Cartesian lattice on
    [-1, 1]^dim intersected with the closed unit ball, plus the origin.
    halton:k gives the first k Halton points inside the ball.
    """
    name, _, arg = spec.partition(":")
    try:
        k = int(arg)
    except ValueError:
        raise ValueError(f"grid {spec!r}: expected <name>:<count>") from None
    if k < 1:
        raise ValueError(f"grid {spec!r}: count must be >= 1")
    if name in ("disk", "ball"):
        axis = np.linspace(-1.0, 1.0, k)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        inside = np.einsum("pi,pi->p", pts, pts) <= 1.0 + 1e-12
        pts = pts[inside]
        if not (pts == 0.0).all(axis=1).any():
            pts = np.concatenate([np.zeros((1, dim)), pts], axis=0)
        return pts
    if name == "halton":
        return halton_ball(dim, k)
    raise ValueError(f"grid {spec!r}: unknown kind (use disk:, ball:, halton:)")


def _point_columns(prefix: str, dim: int) -> list[str]:
    return [f"{prefix}_{i + 1}" for i in range(dim)]


def _random_ball_pairs(dim: int, count: int, seed: int) -> np.ndarray:
    """(count, 2, dim) pairs, uniform in the ball, counter-based for reproducibility."""
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, _PAIR_SALT], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    out = np.empty((count, 2, dim))
    have = 0
    while have < count * 2:
        cand = gen.uniform(-1.0, 1.0, size=dim)
        if float((cand * cand).sum()) <= 1.0:
            out[have // 2, have % 2] = cand
            have += 1
    return out


def _cmd_zeros(cfg: RunConfig) -> int:
    table = bessel_zeros(cfg.nu, cfg.count)
    meta = {"command": "zeros", "nu": float(cfg.nu), "count": cfg.count}
    rows = [(n + 1, float(z)) for n, z in enumerate(table.zeros)]
    write_table(cfg.output, meta, ["n", "zero"], rows, cfg.fmt)
    return 0


def _cmd_sample(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.grid, cfg.params.dim)
    sample = sample_field(cfg.params, cfg.truncation, grid, cfg.seed, threads=cfg.threads)
    meta = {
        "command": "sample",
        "dim": cfg.params.dim,
        "hurst": cfg.params.hurst,
        **_truncation_meta(cfg.truncation),
        "grid": cfg.grid,
        "seed": cfg.seed,
        "terms": sample.truncation.term_count,
    }
    cols = _point_columns("x", cfg.params.dim) + ["value"]
    rows = [
        tuple(float(c) for c in pt) + (float(v),)
        for pt, v in zip(sample.points, sample.values)
    ]
    write_table(cfg.output, meta, cols, rows, cfg.fmt)
    return 0


def _cmd_cov(cfg: RunConfig) -> int:
    pairs = _random_ball_pairs(cfg.params.dim, cfg.count, cfg.seed)
    trunc = resolve_truncation(cfg.params, cfg.truncation)
    meta = {
        "command": "cov",
        "dim": cfg.params.dim,
        "hurst": cfg.params.hurst,
        **_truncation_meta(cfg.truncation),
        "probes": 4,
        "pairs": cfg.count,
        "seed": cfg.seed,
    }
    cols = (
        _point_columns("x", cfg.params.dim)
        + _point_columns("y", cfg.params.dim)
        + ["q", "partial", "closed", "abs_error"]
    )
    q_label = cfg.truncation.q if cfg.truncation.kind == "level" else float("nan")
    rows = []
    # fixed diagonal probes first: variance checks at four radii, same run
    # to run comparison needs no seed bookkeeping
    probes = []
    for r in (0.25, 0.5, 0.75, 1.0):
        x = np.zeros(cfg.params.dim)
        x[0] = r
        probes.append((x, x))
    for x, y in probes + [tuple(pair) for pair in pairs]:
        partial = covariance_partial(cfg.params, trunc, x, y)
        closed = covariance_closed(cfg.params, x, y)
        rows.append(
            tuple(float(c) for c in x)
            + tuple(float(c) for c in y)
            + (float(q_label), partial, closed, abs(partial - closed))
        )
    write_table(cfg.output, meta, cols, rows, cfg.fmt)
    return 0


def _cmd_rate(cfg: RunConfig) -> int:
    q_high = float(cfg.truncation.q)
    levels: list[float] = []
    q = 16.0
    while q < q_high:
        levels.append(q)
        q *= 2.0
    if len(levels) < 5:
        raise ValueError("rate needs --q of at least 512 (five doublings above 16)")
    grid = parse_grid(cfg.grid, cfg.params.dim)
    tails = tail_profile(cfg.params, levels, q_high, grid, cfg.reps, cfg.seed)
    counts = [
        resolve_truncation(cfg.params, TruncationSpec.level(q)).term_count
        for q in levels
    ]
    report = rate_regression(cfg.params, counts, tails)
    exponent = term_count_exponent(cfg.params, levels + [q_high])
    meta = {
        "command": "rate",
        "dim": cfg.params.dim,
        "hurst": cfg.params.hurst,
        "q_high": q_high,
        "grid": cfg.grid,
        "reps": cfg.reps,
        "seed": cfg.seed,
        "fitted_slope": report.fitted_slope,
        "expected_slope": report.expected_slope,
        "count_exponent": exponent,
    }
    rows = [
        (float(q), int(p), float(t))
        for q, p, t in zip(levels, report.p_values, report.tail_norms)
    ]
    write_table(cfg.output, meta, ["q", "terms", "tail_sup"], rows, cfg.fmt)
    return 0


def _cmd_harmonics(cfg: RunConfig) -> int:
    meta = {"command": "harmonics", "dim": cfg.params.dim, "max_degree": cfg.count}
    rows = []
    for m in range(cfg.count + 1):
        for ordinal, idx in enumerate(enumerate_basis(m, cfg.params.dim)):
            chain = "|".join(str(d) for d in idx.degrees)
            rows.append((m, ordinal, chain, idx.sign, l_norm(idx, cfg.params.dim)))
    write_table(
        cfg.output, meta, ["degree", "ordinal", "chain", "sign", "l_norm"], rows, cfg.fmt
    )
    return 0


def run(config: RunConfig) -> int:
    """Dispatch a parsed configuration; numeric failures surface as exit 3."""
    handlers = {
        "zeros": _cmd_zeros,
        "sample": _cmd_sample,
        "cov": _cmd_cov,
        "rate": _cmd_rate,
        "harmonics": _cmd_harmonics,
    }
    try:
        return handlers[config.command](config)
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def _truncation_meta(spec: TruncationSpec) -> dict:
    if spec.kind == "level":
        return {"q": float(spec.q)}
    return {"rect": f"{spec.m_max},{spec.n_max}"}


def _add_common(p: argparse.ArgumentParser, *, model: bool, truncation: bool) -> None:
    if model:
        p.add_argument("--dim", type=int, required=True, help="ambient dimension N >= 1")
        p.add_argument("--hurst", type=float, required=True, help="Hurst index in (0, 1)")
    if truncation:
        group = p.add_mutually_exclusive_group()
        group.add_argument("--q", type=float, default=4096.0, help="truncation level (default 4096)")
        group.add_argument("--rect", metavar="M,NMAX", help="rectangular truncation: max degree, radial count")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument(
        "--format",
        dest="fmt",
        default="csv",
        choices=["csv", "jsonl", "json-lines"],
        help="output format",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfbm",
        description="Sample and validate an isotropic fractional Brownian field on the unit ball.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_zeros = sub.add_parser("zeros", help="tabulate Bessel function zeros")
    p_zeros.add_argument("--nu", type=float, required=True, help="Bessel order, nu > -1")
    p_zeros.add_argument("--count", type=int, default=10, help="how many zeros")
    _add_common(p_zeros, model=False, truncation=False)

    p_sample = sub.add_parser("sample", help="draw one field realization on a grid")
    _add_common(p_sample, model=True, truncation=True)
    p_sample.add_argument("--grid", default="ball:9", help="disk:k | ball:k | halton:k")
    p_sample.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sample.add_argument("--threads", type=int, default=1, help="point-chunk parallelism (0 = auto)")

    p_cov = sub.add_parser(
        "cov", help="partial vs closed covariance at fixed diagonal probes and random pairs"
    )
    _add_common(p_cov, model=True, truncation=True)
    p_cov.add_argument("--count", type=int, default=20, help="number of random pairs")
    p_cov.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p_rate = sub.add_parser("rate", help="tail-decay rate experiment")
    _add_common(p_rate, model=True, truncation=True)
    p_rate.add_argument("--grid", default="halton:512", help="disk:k | ball:k | halton:k")
    p_rate.add_argument("--reps", type=int, default=200, help="Monte Carlo replications")
    p_rate.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p_harm = sub.add_parser("harmonics", help="enumerate the real harmonic basis")
    p_harm.add_argument("--dim", type=int, required=True, help="ambient dimension N >= 1")
    p_harm.add_argument("--count", type=int, default=4, help="maximum degree to list")
    _add_common(p_harm, model=False, truncation=False)

    return parser


def _config_from_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.output = getattr(args, "output", None)
    fmt = getattr(args, "fmt", "csv")
    cfg.fmt = "jsonl" if fmt == "json-lines" else fmt

    if hasattr(args, "dim"):
        if args.dim < 1:
            parser.error("argument --dim: must be >= 1")
        hurst = getattr(args, "hurst", None)
        if hurst is not None:
            if not (0.0 < hurst < 1.0):
                parser.error("argument --hurst: must lie strictly inside (0, 1)")
            cfg.params = ModelParams(dim=args.dim, hurst=hurst)
        else:
            cfg.params = ModelParams(dim=args.dim, hurst=0.5)

    if hasattr(args, "q"):
        if args.rect is not None:
            try:
                m_max, n_max = (int(tok) for tok in args.rect.split(","))
            except ValueError:
                parser.error("argument --rect: expected M,NMAX (two integers)")
            if m_max < 0 or n_max < 1:
                parser.error("argument --rect: needs M >= 0 and NMAX >= 1")
            cfg.truncation = TruncationSpec.rect(m_max, n_max)
        else:
            if args.q < 1.0:
                parser.error("argument --q: level must be >= 1")
            cfg.truncation = TruncationSpec.level(args.q)

    if hasattr(args, "grid"):
        cfg.grid = args.grid
        try:
            parse_grid(args.grid, cfg.params.dim if cfg.params else 1)
        except ValueError as exc:
            parser.error(f"argument --grid: {exc}")
    if hasattr(args, "seed"):
        cfg.seed = args.seed
    if hasattr(args, "reps"):
        if args.reps < 100:
            parser.error("argument --reps: need at least 100 replications")
        cfg.reps = args.reps
    if hasattr(args, "threads"):
        if args.threads < 0:
            parser.error("argument --threads: must be >= 0")
        cfg.threads = args.threads
    if hasattr(args, "nu"):
        if args.nu <= -1.0:
            parser.error("argument --nu: order must be > -1")
        cfg.nu = args.nu
    if hasattr(args, "count"):
        if args.count < 1 and args.command != "harmonics":
            parser.error("argument --count: must be >= 1")
        if args.count < 0:
            parser.error("argument --count: must be >= 0")
        cfg.count = args.count

    if cfg.command == "rate" and cfg.truncation.kind != "level":
        parser.error("argument --rect: rate requires a level truncation (--q)")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(parser, args)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
