"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--sizes 65 161 321] [--repeat 5]

Times the three-component Laplacian and one full RATTLE step per backend
and checks that both produce bitwise identical results.
"""
import argparse
import time

import numpy as np

from wavemap import kernels
from wavemap.grid import PARITY_X, PARITY_Y, Grid
from wavemap.initial_data import InitialDataParams, build_initial_state
from wavemap.rattle import RattleConfig, rattle_step


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, repeat):
    grid = Grid(n)
    state = build_initial_state(InitialDataParams(A=1.0), grid)
    cfg = RattleConfig(dt=grid.h / 4)
    out = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        lap = best_of(lambda: kernels.laplacian3(state.q, PARITY_X, PARITY_Y, 1.0 / (12.0 * grid.h)), repeat)
        step = best_of(lambda: rattle_step(state, cfg), repeat)
        new, _, _ = rattle_step(state, cfg)
        out[name] = (lap, step, new)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[65, 161, 321])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    original = kernels.BACKEND
    print(f"backends: {', '.join(backends)}")
    print(f"{'N':>5} {'backend':>8} {'laplacian3 [ms]':>16} {'rattle step [ms]':>17}")
    for n in args.sizes:
        res = bench(n, args.repeat)
        for name, (lap, step, _) in res.items():
            print(f"{n:5d} {name:>8} {1e3 * lap:16.3f} {1e3 * step:17.3f}")
        if len(res) == 2:
            (a, b) = res.values()
            same = np.array_equal(a[2].q, b[2].q) and np.array_equal(a[2].p, b[2].p)
            print(f"{n:5d} speedup laplacian x{res['python'][0] / res['cython'][0]:.1f}, "
                  f"step x{res['python'][1] / res['cython'][1]:.1f}, bitwise equal: {same}")
    kernels.set_backend(original)


if __name__ == "__main__":
    main()
