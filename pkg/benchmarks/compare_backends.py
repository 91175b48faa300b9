"""Timing comparison of the compiled Bessel kernel against the numpy one.

Runs three workloads under each backend in a child process (the binding
is fixed at import, so the parent cannot switch in place):

  kernel   batched J_nu over mixed orders, both evaluation branches
  zeros    building fresh zero tables for five representative orders
  sample   one field realization, dim 3, level budget 4096

Usage: python benchmarks/compare_backends.py [--repeat K] [--quick]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, sys, time
import numpy as np

import mfbm._backend as backend
from mfbm.expansion import ModelParams, TruncationSpec, sample_field
from mfbm.special_functions import ZeroStore
from mfbm.validation import halton_ball

quick = bool(int(sys.argv[1]))
repeat = int(sys.argv[2])


def best(fn):
    t = []
    for _ in range(repeat):
        tic = time.perf_counter()
        fn()
        t.append(time.perf_counter() - tic)
    return min(t)


xs_small = np.linspace(0.05, 8.5, 2000 if quick else 20000)
xs_large = np.linspace(9.5, 1200.0, 2000 if quick else 20000)
orders = [-0.7, -0.25, 0.0, 0.5, 1.3, 2.5, 7.5, 20.5, 41.0]


def kernel():
    for nu in orders:
        backend.bessel_many(nu, xs_small)
        backend.bessel_many(nu, xs_large)


def zeros():
    store = ZeroStore()
    for nu in (-0.5, -0.3, 0.5, 1.7, 2.5):
        store.get(nu, 100 if quick else 400)


params = ModelParams(dim=3, hurst=0.7)
spec = TruncationSpec.level(1024.0 if quick else 4096.0)
grid = halton_ball(3, 256)


def sample():
    sample_field(params, spec, grid, seed=20259, store=ZeroStore())


print(json.dumps({
    "backend": backend.BACKEND,
    "kernel": best(kernel),
    "zeros": best(zeros),
    "sample": best(sample),
}))
"""


def run_child(choice: str, quick: bool, repeat: int) -> dict:
    env = dict(os.environ, MFBM_BACKEND=choice)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD, str(int(quick)), str(repeat)],
        capture_output=True, text=True, env=env, check=True,
    )
    rec = json.loads(out.stdout.strip().splitlines()[-1])
    if rec["backend"] != choice:
        raise RuntimeError(f"asked for {choice}, child ran {rec['backend']}")
    return rec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="min over K runs")
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()

    results = {
        c: run_child(c, args.quick, args.repeat)
        for c in ("reference", "compiled")
    }
    print(f"{'workload':<10}{'reference':>12}{'compiled':>12}{'speedup':>10}")
    for name in ("kernel", "zeros", "sample"):
        ref = results["reference"][name]
        fast = results["compiled"][name]
        print(f"{name:<10}{ref:>11.3f}s{fast:>11.3f}s{ref / fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
