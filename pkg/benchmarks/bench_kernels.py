"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each case runs the same inputs through both backends, checks that the
outputs agree, and reports the best-of-N wall time.
"""
import argparse
import time

import numpy as np

from gaussctl._backend import compiled_kernels, python_kernels
from gaussctl.core import make_from_normal_form
from gaussctl.dynamics import BathParams

STATE = make_from_normal_form(4.5, 3.5, 2.2, -3.5).matrix
BATHS = BathParams.from_ratios(0.1, 0.1, 1.14769, 1.02956).kernel_args()


def _cases(k):
    flags_every = np.ones(8001, dtype=np.uint8)
    flags_once = np.zeros(8001, dtype=np.uint8)
    flags_once[0] = 1
    return {
        "nu_tilde_minus x1e4": lambda: [k.nu_tilde_minus(STATE) for _ in range(10000)],
        "propagate x1e4": lambda: [k.propagate(STATE, *BATHS, 0.01) for _ in range(10000)],
        "simon_reduce x1e4": lambda: [k.simon_reduce(STATE) for _ in range(10000)],
        "trajectory initial-only (8001 samples)":
            lambda: k.run_trajectory(STATE, *BATHS, 1e-3, flags_once, 1, 0, np.exp(4)),
        "trajectory every-step (8001 samples)":
            lambda: k.run_trajectory(STATE, *BATHS, 1e-3, flags_every, 1, 0, np.exp(4)),
    }


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    if isinstance(a, list):
        return _agree(a[0], b[0])
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-12)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if compiled_kernels is None:
        raise SystemExit("compiled kernels unavailable; run `python3 setup.py build_ext --inplace`")
    py, cy = _cases(python_kernels), _cases(compiled_kernels)
    print(f"{'case':42s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s}  agree")
    for name in py:
        agree = _agree(py[name](), cy[name]())
        tp, tc = _best(py[name], args.repeat), _best(cy[name], args.repeat)
        print(f"{name:42s} {1e3 * tp:12.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
