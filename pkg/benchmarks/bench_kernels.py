"""Benchmark the compiled pointwise kernels against the numpy fallback.

Micro-benchmarks call both implementations in-process; the full
split-step comparison re-runs this script in a subprocess with
CHOQUARD_PURE_PYTHON=1 so backend selection happens at import, exactly as
in production.

Usage: python benchmarks/bench_kernels.py [--n 96] [--steps 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def timeit(fn, reps=5):
    fn()
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def micro(n):
    from choquard import _kernels_py
    try:
        from choquard import _kernels as cy
    except ImportError:
        cy = None

    rng = np.random.default_rng(0)
    u = rng.standard_normal(n ** 3) + 1j * rng.standard_normal(n ** 3)
    A = rng.standard_normal(n ** 3) ** 2
    B = rng.standard_normal(n ** 3) ** 2
    V = rng.standard_normal(n ** 3)
    w = np.empty(n ** 3)
    o1 = np.empty(n ** 3)
    o2 = np.empty(n ** 3)
    oc = np.empty(n ** 3, dtype=np.complex128)
    flat = u.view(np.float64)

    rows = []
    rows.append(("abs_pow_pair",
                 timeit(lambda: _kernels_py.abs_pow_pair(u, 1.9, 4.0)),
                 None if cy is None else
                 timeit(lambda: cy.abs_pow_pair_flat(flat, 1.9, 4.0, o1, o2))))
    rows.append(("nl_phase",
                 timeit(lambda: _kernels_py.nl_phase(u.copy(), A, B, V, 1e-3, 1.9, 4.0)),
                 None if cy is None else
                 timeit(lambda: cy.nl_phase_flat(u.copy().view(np.float64),
                                                 A, B, V, True, 1e-3, 1.9, 4.0, w))))
    rows.append(("nl_force",
                 timeit(lambda: _kernels_py.nl_force(u, A, B, 1.9, 4.0)),
                 None if cy is None else
                 timeit(lambda: cy.nl_force_flat(flat, A, B, 1.9, 4.0,
                                                 oc.view(np.float64)))))
    print(f"\npointwise kernels at n={n}^3 ({n ** 3} samples), seconds/call:")
    print(f"{'kernel':>14} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, tp, tc in rows:
        if tc is None:
            print(f"{name:>14} {tp:10.4f} {'n/a':>10}")
        else:
            print(f"{name:>14} {tp:10.4f} {tc:10.4f} {tp / tc:7.2f}x")


def full_step(n, steps):
    from choquard import backend
    from choquard.dynamics import strang_step
    from choquard.grids import Field, Grid, ModelParams, gaussian
    from choquard.spectral import norm_l2_sq

    grid = Grid(3, n, 12.0)
    params = ModelParams(3, 2.0, 1.9)
    phi = gaussian(grid, width=1.5)
    phi = Field(grid, phi.values / np.sqrt(norm_l2_sq(phi)))
    u = phi
    t0 = time.perf_counter()
    for _ in range(steps):
        u = strang_step(u, None, params, 1e-3)
    dt = (time.perf_counter() - t0) / steps
    print(f"strang_step [{backend.backend_name():>6}] n={n}: {dt:.3f} s/step")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=96)
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--step-only", action="store_true")
    args = ap.parse_args()

    if args.step_only:
        full_step(args.n, args.steps)
        return

    from choquard import backend
    print(f"active backend: {backend.backend_name()}")
    micro(args.n)
    print()
    full_step(args.n, args.steps)
    sys.stdout.flush()
    env = dict(os.environ, CHOQUARD_PURE_PYTHON="1")
    subprocess.run([sys.executable, __file__, "--step-only",
                    "--n", str(args.n), "--steps", str(args.steps)],
                   env=env, check=False)


if __name__ == "__main__":
    main()
