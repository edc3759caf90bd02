"""Compare jit-compiled and pure-Python evaluation kernel throughput.

Run as a script:

    python3 benchmarks/bench_kernels.py [--samples N] [--dim N]

For every registered kernel the script times `samples` evaluations through
the compiled path (when available) and through the pure-Python fallback,
then prints evaluations per second and the speedup ratio. Compilation time
is excluded by a warm-up call.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from abcdirect.functions import kernels


def _time_kernel(fn, points) -> float:
    fn(points[0])  # warm-up, also triggers jit compilation
    t0 = time.perf_counter()
    for p in points:
        fn(p)
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=10)
    args = ap.parse_args()

    compiled = kernels.compile_kernels(True)
    plain = kernels.PY_KERNELS
    try:
        import numba  # noqa: F401
        jit_on = True
    except ImportError:
        jit_on = False

    rng = np.random.default_rng(0)
    fixed_dims = {"BR": 2, "GP": 2, "C6": 2, "SHU": 2,
                  "H3": 3, "H6": 6, "S5": 4, "S7": 4, "S10": 4}
    print(f"jit available: {jit_on}; {args.samples} evals per kernel")
    print(f"{'kernel':14s} {'plain ev/s':>12s} {'jit ev/s':>12s} {'speedup':>8s}")
    for name in sorted(plain):
        n = fixed_dims.get(name, args.dim)
        if name == "powell":
            n = max(4, args.dim - args.dim % 4)
        points = rng.uniform(-1.0, 1.0, size=(args.samples, n))
        t_plain = _time_kernel(plain[name], points)
        if jit_on:
            t_jit = _time_kernel(compiled[name], points)
            ratio = f"{t_plain / t_jit:7.1f}x"
            jit_rate = f"{args.samples / t_jit:12.0f}"
        else:
            ratio, jit_rate = "      -", "           -"
        print(f"{name:14s} {args.samples / t_plain:12.0f} {jit_rate} {ratio}")


if __name__ == "__main__":
    main()
