"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case runs the same workload on both backends, checks the results are
bit-identical and reports the best wall time of ``--repeat`` runs.
"""

import argparse
import importlib
import sys
import time

import numpy as np

from overton.kernels import ATTRACTIVE_REPULSIVE, REPULSIVE, _pure
from overton.rng import SplitMix64, derive_seed

try:
    _fast = importlib.import_module("overton.kernels._fast")
except ImportError:
    _fast = None

FULL = -1.0 + 2.0 * np.arange(1, 101) / 101
NARROW = -0.6 + 1.2 * np.arange(1, 101) / 101


def _weights(n, k, seed):
    return SplitMix64(seed).uniforms(n * (n + k)).reshape(n, n + k)


CASES = {
    "HK  K=15 t_delta=80 to convergence": lambda b: b.hk_run(
        NARROW, 15, -0.6, 1.6 / 80, 1.0, 80, 0.1, 0, 5000, 5e-4, 80),
    "HK  K=0 eps=0.1, 1000 fixed steps": lambda b: b.hk_run(
        FULL, 0, 0.0, 0.0, 0.0, 0, 0.1, 0, 1000, -1.0, 0),
    "DW  K=30 t_delta=900, 10 replicates": lambda b: [
        b.dw_run(FULL, 30, -1.0, 2.0 / 900, 1.0, 900, 0.1, 0, 5000, derive_seed(0, 30, 900, r), 0, 3, 900)
        for r in range(10)],
    "RWHK K=200 t_delta=200, 1000 steps": lambda b: b.weighted_run(
        REPULSIVE, FULL, _weights(100, 200, 1), 200, -0.9, 1.8 / 200, 0.9, 200, 0.1, 0, 1000, 5, 30000),
    "ARWHK K=200 t_delta=25, 500 steps": lambda b: b.weighted_run(
        ATTRACTIVE_REPULSIVE, FULL, _weights(100, 200, 2), 200, -0.9, 1.8 / 25, 0.9, 25, 0.1, 0, 500, 6, 30000),
}


def _flatten(result):
    if isinstance(result, list):
        return [x for r in result for x in _flatten(r)]
    return [np.asarray(v).tobytes() if isinstance(v, np.ndarray) else v for v in result]


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _fast is None:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'case':40s} {'pure [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s}  identical")
    for name, case in CASES.items():
        tp, rp = best_time(lambda: case(_pure), args.repeat)
        tc, rc = best_time(lambda: case(_fast), args.repeat)
        same = _flatten(rp) == _flatten(rc)
        print(f"{name:40s} {tp:10.4f} {tc:13.4f} {tp / tc:8.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
