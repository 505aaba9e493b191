"""Compare the compiled and pure-Python banded kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 2049 4097] [--repeat 20]

Prints the median time per call of each kernel for both backends, the
speedup, and the largest difference between their results. A full solve
(gmgWR, k = 320, kh = 0.15625) is timed with each backend in a subprocess,
since the backend is fixed at import.
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from waveray import _pykernels
from waveray.mesh import ConstantK, Grid1D
from waveray.operators import assemble_helmholtz

try:
    from waveray import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeat: int) -> float:
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def kernel_cases(n: int, rng: np.random.Generator):
    grid = Grid1D(0.0, 1.0, n)
    A = assemble_helmholtz(grid, ConstantK(0.3 / grid.h), warn=False)
    data = np.ascontiguousarray(A.data)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return {
        "gs_sweep": lambda mod: mod.gs_sweep(data, 1, f, x0.copy(), False),
        "kaczmarz_sweep": lambda mod: mod.kaczmarz_sweep(data, 1, f, x0.copy(), False),
        "band_solve": lambda mod: mod.band_solve(data, 1, f.copy()),
    }


SOLVE_SNIPPET = (
    "import time, warnings; warnings.simplefilter('ignore');"
    "from waveray import SolverConfig, solve, BACKEND;"
    "t=time.perf_counter(); _, r = solve(SolverConfig('gmgWR', k=320, kh=0.15625));"
    "print(BACKEND, r.cycles_used, f'{time.perf_counter()-t:.3f}')"
)


def time_solve(pure: bool) -> str:
    env = dict(os.environ)
    env["WAVERAY_PURE_PYTHON"] = "1" if pure else "0"
    out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env,
                         capture_output=True, text=True, check=True)
    return out.stdout.strip()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[513, 2049, 8193])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--no-solve", action="store_true")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the pure-Python kernels are available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>7}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in args.n:
        for name, call in kernel_cases(n, rng).items():
            tp = _time(lambda: call(_pykernels), max(3, args.repeat // 4))
            if _ckernels is None:
                print(f"{name:<16}{n:>7}{tp * 1e3:>14.3f}{'-':>14}{'-':>10}{'-':>12}")
                continue
            tc = _time(lambda: call(_ckernels), args.repeat)
            diff = float(np.max(np.abs(call(_pykernels) - call(_ckernels))))
            print(f"{name:<16}{n:>7}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>10.1f}{diff:>12.1e}")
    if not args.no_solve:
        print("\nfull solve gmgWR k=320 kh=0.15625 (backend, cycles, seconds):")
        print("  " + time_solve(pure=False))
        print("  " + time_solve(pure=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
