"""Benchmark the compiled RK4 kernel against the pure-numpy fallback.

Runs the same master-equation workloads through both implementations of the
stepping loop and reports wall times and the speedup.  The two paths must
produce bitwise-identical output, which is checked here as well.

Usage:
    python3 benchmarks/bench_dynamics.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from cavitydark import kernels
from cavitydark.basis import ladder_spaces
from cavitydark.dynamics import (
    build_ladder_hamiltonian,
    excitation_diagonal,
    lowering_operator,
)
from cavitydark.hamiltonian import SystemParams
from cavitydark.states import basis_vector

WORKLOADS = [
    ("two-atom", SystemParams(n_atoms=2, delta_a=0.0, g=[1.0, 1.0], V=0.5,
                              kappa=0.3), 1, "0,eg"),
    ("three-atom", SystemParams(n_atoms=3, delta_a=0.0, g=[1.0, 0.8, 1.5],
                                V=0.5, kappa=0.3), 1, "0,egg"),
    ("four-atom pairs", SystemParams(n_atoms=4, delta_a=0.0,
                                     g=[1.0, 2.0, 2.0, -1.0], V=0.5,
                                     kappa=0.3), 2, "0,eegg"),
]


def prepare(params, n_max, initial_label, dt, n_steps):
    ladder = ladder_spaces(params.n_atoms, n_max)
    H = np.ascontiguousarray(build_ladder_hamiltonian(params, ladder))
    a_op = np.ascontiguousarray(lowering_operator(ladder), dtype=np.complex128)
    ad_op = np.ascontiguousarray(a_op.conj().T)
    n_op = np.ascontiguousarray(ad_op @ a_op)
    n_diag = np.ascontiguousarray(excitation_diagonal(ladder), dtype=np.float64)
    psi = basis_vector(ladder, initial_label)
    rho0 = np.ascontiguousarray(np.outer(psi, psi.conj()))
    watch = np.ascontiguousarray(psi[None, :], dtype=np.complex128)
    snap_steps = np.array([0, n_steps], dtype=np.int64)
    return (H, a_op, ad_op, n_op, n_diag, params.kappa, rho0, dt, n_steps,
            watch, snap_steps)


def best_time(impl, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def outputs_equal(a, b):
    return all(np.array_equal(np.asarray(x), np.asarray(y))
               for x, y in zip(a[:-1], b[:-1])) and a[-1] == b[-1]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20000,
                        help="integration steps per workload (default 20000)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="repetitions, best-of (default 3)")
    opts = parser.parse_args()

    compiled = kernels._impl
    fallback = kernels._lindblad_rk4_loop
    if compiled is fallback:
        print(f"active backend is {kernels.backend()!r}; the compiled path "
              "is disabled (CAVITYDARK_NO_NUMBA), timing the fallback twice")

    dt = 0.0025
    print(f"{'workload':<18}{'dim':>4}{'steps':>8}{'numba':>12}{'numpy':>12}"
          f"{'speedup':>9}")
    agree = True
    for name, params, n_max, label in WORKLOADS:
        args = prepare(params, n_max, label, dt, opts.steps)
        compiled(*args)  # warm up: first call absorbs compilation
        t_compiled = best_time(compiled, args, opts.repeat)
        t_fallback = best_time(fallback, args, opts.repeat)
        agree &= outputs_equal(compiled(*args), fallback(*args))
        dim = args[0].shape[0]
        print(f"{name:<18}{dim:>4}{opts.steps:>8}{t_compiled:>11.3f}s"
              f"{t_fallback:>11.3f}s{t_fallback / t_compiled:>8.1f}x")
    print(f"backends agree bitwise: {'yes' if agree else 'NO'}")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
