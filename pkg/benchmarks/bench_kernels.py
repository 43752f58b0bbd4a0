"""Compiled vs pure-Python kernel throughput.

    python benchmarks/bench_kernels.py [--steps 2000] [--repeat 3]

For each grid size and problem, advances the same state with both backends,
reports the best-of-N wall time per step, the speedup, and the largest
nodewise difference between the two results.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from evorescue.core import Boundary, CoupledParams, Grid1D, InitialDatum, Scheme, ThresholdSchedule, sample_initial
from evorescue.solver import _backend
from evorescue.solver import _advance_coupled, _advance_scalar, StepperConfig


def _scalar_job(backend, grid, u0, steps, dt):
    u = u0.copy()
    thetas = np.asarray(ThresholdSchedule.exponential(0.3, 0.1).at((np.arange(steps) + 0.5) * dt))
    _advance_scalar(u, 0.0, dt, thetas, grid, Scheme.IMEX_CN, backend=backend)
    return u


def _coupled_job(backend, grid, u0, steps, dt):
    u = u0.copy()
    a = np.full_like(u, math.sqrt(0.3))
    _advance_coupled(u, a, 0.0, steps, dt, grid, CoupledParams(0.05, math.sqrt(0.3)), StepperConfig(dt), backend=backend)
    return np.concatenate([u, a])


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cells", type=int, nargs="+", default=[600, 1200, 2400])
    args = ap.parse_args(argv)

    names = _backend.available()
    if "compiled" not in names:
        print("compiled kernels not built; only the python backend is available")
    backends = {n: _backend.Backend(n) for n in names}
    dt = 0.02
    print(f"{'problem':<8} {'cells':>6} " + " ".join(f"{n + ' us/step':>18}" for n in names) + f" {'speedup':>8} {'max diff':>10}")
    for cells in args.cells:
        grid = Grid1D(150.0, cells, Boundary.NEUMANN)
        dt = min(0.02, grid.dx**2)
        u0 = np.asarray(sample_initial(InitialDatum.bump(0.6, 10.0), grid).values, dtype=float)
        for label, job in (("scalar", _scalar_job), ("coupled", _coupled_job)):
            times, outs = {}, {}
            for n, be in backends.items():
                times[n], outs[n] = _best(lambda be=be: job(be, grid, u0, args.steps, dt), args.repeat)
            per_step = " ".join(f"{1e6 * times[n] / args.steps:>18.2f}" for n in names)
            if len(names) == 2:
                speed = times["python"] / times["compiled"]
                diff = float(np.max(np.abs(outs["python"] - outs["compiled"])))
                print(f"{label:<8} {cells:>6} {per_step} {speed:>8.1f} {diff:>10.1e}")
            else:
                print(f"{label:<8} {cells:>6} {per_step}")


if __name__ == "__main__":
    main()
