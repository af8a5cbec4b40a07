"""Compare the compiled and pure-Python integration kernels.

Run with ``python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]``.
"""
import argparse
import dataclasses
import time

import numpy as np

from chaindiff.control import closed_loop_simulate
from chaindiff.config import load_scenario
from chaindiff.cli import bundled_scenarios
from chaindiff.diffcore import DifferentiatorSpec
from chaindiff.odesim import SimConfig, simulate_estimator
from chaindiff.signals import NoiseSpec, Sinusoid


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    h = 1e-4
    cfg = SimConfig(args.steps * h, h, record_stride=10)
    noise = NoiseSpec("uniform", 0.01, seed=0)
    loop = load_scenario(bundled_scenarios()["noisy-tracking"]).closed_loop
    loop = dataclasses.replace(loop, sim=cfg)
    cases = {
        "estimator linear n=3": lambda b: simulate_estimator(
            DifferentiatorSpec(3, (1, 3, 3), 0.05), Sinusoid(), noise, cfg=cfg, backend=b).data,
        "estimator hybrid n=4": lambda b: simulate_estimator(
            DifferentiatorSpec(4, (1, 4, 6, 4), 0.05, "hybrid", 0.6, (1, 4, 6, 4)),
            Sinusoid(), noise, cfg=cfg, backend=b).data,
        "closed loop": lambda b: closed_loop_simulate(loop, backend=b).data,
    }
    print(f"{args.steps} RK4 steps, best of {args.repeat}")
    print(f"{'case':<24}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases.items():
        tp, ref = _best(lambda: fn("python"), args.repeat)
        try:
            tc, fast = _best(lambda: fn("cython"), args.repeat)
        except ImportError:
            print(f"{name:<24}{tp:>12.4f}{'n/a':>12}")
            continue
        diff = float(np.max(np.abs(ref - fast)))
        print(f"{name:<24}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
