"""Time the stencil kernel and a full cell solve for each available backend.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256 512] [--repeat 5]

The compiled backend is listed only when the extension was built.
"""
import argparse
import timeit

import numpy as np

from homogenize import kernels
from homogenize.cell2d import CellProblem2D, homogenize_cell
from homogenize.fields import PeriodicGrid2D, ScalarCoefficient
from homogenize.linalg import PeriodicOperator


def best_of(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def operator(n: int, cross: bool) -> PeriodicOperator:
    rng = np.random.default_rng(n)
    a = np.exp(0.3 * rng.normal(size=(n, n)))
    a12 = 0.2 * rng.uniform(-1, 1, size=(n, n)) if cross else None
    return PeriodicOperator(a, a, a12)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = sorted(kernels.BACKENDS)
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'N':>5} {'cross':>6} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + f" {'speedup':>8}")
    for n in args.sizes:
        for cross in (False, True):
            op = operator(n, cross)
            u = np.random.default_rng(0).normal(size=(n, n))
            ue = op.extend(u)
            ref = op.energy_grad(ue, "python")
            times = {}
            for b in backends:
                np.testing.assert_allclose(op.energy_grad(ue, b), ref, rtol=1e-12, atol=1e-12)
                times[b] = best_of(lambda b=b: op.energy_grad(ue, b), args.repeat)
            speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
            cols = " ".join(f"{1e3 * times[b]:14.3f}" for b in backends)
            print(f"{n:5d} {str(cross):>6} {cols} {speedup:8.2f}")

    print("\nfull cell solve (both correctors), default backend")
    for n in args.sizes:
        p = CellProblem2D.from_scalar(ScalarCoefficient("1 + 0.5*sin(2*pi*Y1)*sin(2*pi*Y2)"), PeriodicGrid2D(1.0, n))
        t = min(timeit.repeat(lambda: homogenize_cell(p), number=1, repeat=max(1, args.repeat // 2)))
        print(f"{n:5d} {1e3 * t:12.1f} ms")


if __name__ == "__main__":
    main()
