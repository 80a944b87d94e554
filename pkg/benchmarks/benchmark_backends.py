#!/usr/bin/env python3
"""Time the compiled integration kernels against the pure-Python fallback.

Both backends implement identical arithmetic (same operation order, no FP
contraction), so outputs are compared bit for bit while timing.
"""

import time

import numpy as np

from sidare import INITIAL_STATE, ModelParams, SweepConfig, solve
from sidare.backend import BACKEND
from sidare.objective import CostWeights
from sidare.simulate import Strategy, TimeGrid
from sidare import _pykernels

try:
    from sidare import _kernels
except ImportError:
    _kernels = None


def time_sweeps(mod, u, x0, rates, dt, theta_a, theta_e, reps):
    states, bad = mod.forward_sweep(u, x0, rates, dt, 1e-9)
    assert bad < 0
    t0 = time.perf_counter()
    for _ in range(reps):
        mod.forward_sweep(u, x0, rates, dt, 1e-9)
    fwd = (time.perf_counter() - t0) / reps
    t0 = time.perf_counter()
    for _ in range(reps):
        mod.backward_sweep(states, u, rates, theta_a, theta_e, dt)
    bwd = (time.perf_counter() - t0) / reps
    lambdas = mod.backward_sweep(states, u, rates, theta_a, theta_e, dt)
    return fwd, bwd, states, lambdas


def main():
    grid = TimeGrid()
    p = ModelParams()
    x0 = np.array(INITIAL_STATE.as_vector())
    rates = np.array(p.as_rate_tuple())
    rng = np.random.default_rng(7)
    u = np.clip(rng.uniform(0.0, p.u_max, grid.n_nodes), 0.0, p.u_max)
    theta_a, theta_e = 1e5, 600.0

    print(f"grid: {grid.n_nodes} nodes, dt = {grid.dt} days")
    results = {}
    for name, mod, reps in (("python", _pykernels, 20),
                            ("compiled", _kernels, 200)):
        if mod is None:
            print(f"{name:>9}: not available")
            continue
        fwd, bwd, states, lambdas = time_sweeps(
            mod, u, x0, rates, grid.dt, theta_a, theta_e, reps)
        results[name] = (fwd, bwd, states, lambdas)
        print(f"{name:>9}: forward {1e3 * fwd:8.2f} ms   "
              f"backward {1e3 * bwd:8.2f} ms")

    if len(results) == 2:
        pf, pb, ps, pl = results["python"]
        cf, cb, cs, cl = results["compiled"]
        same = np.array_equal(ps, cs) and np.array_equal(pl, cl)
        print(f"  speedup: forward {pf / cf:6.1f}x   backward {pb / cb:6.1f}x")
        print(f"  outputs bit-identical: {same}")

    t0 = time.perf_counter()
    sol = solve(ModelParams(nu=0.0), INITIAL_STATE,
                CostWeights(0.0, 1600.0), SweepConfig())
    dt = time.perf_counter() - t0
    print(f"full solve ({BACKEND} backend): {dt:.2f} s, "
          f"{sol.iterations} iterations, converged = {sol.converged}")


if __name__ == "__main__":
    main()
