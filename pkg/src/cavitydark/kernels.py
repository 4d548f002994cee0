"""Fixed-step integration kernel for the dissipative dynamics.

The only hot code in the package is the RK4 time-stepping loop for the
photon-loss master equation.  It is written once, in plain numpy-compatible
Python, and compiled with numba when available.  Setting the environment
variable ``CAVITYDARK_NO_NUMBA=1`` (before import) forces the pure-numpy
path; the two backends produce bitwise-identical trajectories, and
``benchmarks/bench_dynamics.py`` times them against each other.

The kernel records populations of a fixed set of watch states, the trace,
the worst Hermiticity defect, and the excitation expectation at every step,
plus full density-matrix snapshots at requested steps.  Nothing is
renormalized along the way: trace and Hermiticity drift are integrity
metrics, so the integrator must not paper over them.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["evolve", "backend"]


def _lindblad_rk4_loop(H, a_op, ad_op, n_op, n_diag, kappa, rho0, dt, n_steps,
                       watch, snap_steps):
    """Integrate drho/dt = i[rho, H] + kappa/2 (2 a rho a+ - {a+a, rho}).

    Returns per-step watch populations, trace, Hermiticity defect and
    excitation expectation, the requested snapshots, the final state, and the
    index of the first step that produced a non-finite entry (-1 if none).
    """
    d = H.shape[0]
    nw = watch.shape[0]

    def rhs(r):
        out = 1j * (r @ H - H @ r)
        if kappa != 0.0:
            out = out + kappa * (a_op @ r @ ad_op) - (0.5 * kappa) * (
                n_op @ r + r @ n_op
            )
        return out

    pops = np.empty((n_steps + 1, nw))
    trace = np.empty(n_steps + 1)
    herm = np.empty(n_steps + 1)
    excite = np.empty(n_steps + 1)
    snaps = np.empty((snap_steps.shape[0], d, d), dtype=np.complex128)

    rho = rho0.copy()
    snap_ptr = 0
    fail_step = -1
    for step in range(n_steps + 1):
        tr = 0.0
        ex = 0.0
        hmax = 0.0
        for i in range(d):
            tr += rho[i, i].real
            ex += n_diag[i] * rho[i, i].real
            for j in range(d):
                delta = abs(rho[i, j] - np.conj(rho[j, i]))
                if delta > hmax:
                    hmax = delta
        trace[step] = tr
        excite[step] = ex
        herm[step] = hmax
        for w in range(nw):
            tmp = rho @ watch[w]
            acc = 0.0
            for i in range(d):
                acc += (np.conj(watch[w, i]) * tmp[i]).real
            pops[step, w] = acc
        if snap_ptr < snap_steps.shape[0] and snap_steps[snap_ptr] == step:
            snaps[snap_ptr] = rho
            snap_ptr += 1
        if step == n_steps:
            break

        k1 = rhs(rho)
        k2 = rhs(rho + (0.5 * dt) * k1)
        k3 = rhs(rho + (0.5 * dt) * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        finite = True
        for i in range(d):
            for j in range(d):
                v = rho[i, j]
                if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                    finite = False
                    break
            if not finite:
                break
        if not finite:
            fail_step = step + 1
            break
    return pops, trace, herm, excite, snaps, rho, fail_step


_BACKEND = "numpy"
_impl = _lindblad_rk4_loop

if os.environ.get("CAVITYDARK_NO_NUMBA", "").strip() in ("", "0"):
    try:
        from numba import njit

        _impl = njit(cache=True)(_lindblad_rk4_loop)
        _BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass


def backend():
    """Name of the active integration backend ("numba" or "numpy")."""
    return _BACKEND


def evolve(H, a_op, kappa, rho0, dt, n_steps, watch, snap_steps,
           excitation_diag):
    """Run the RK4 loop on the active backend.  See ``_lindblad_rk4_loop``.

    ``excitation_diag`` holds the conserved excitation number of each basis
    index; its expectation value is recorded every step (it must never grow
    under pure photon loss).
    """
    H = np.ascontiguousarray(H, dtype=np.complex128)
    a_op = np.ascontiguousarray(a_op, dtype=np.complex128)
    ad_op = np.ascontiguousarray(a_op.conj().T)
    n_op = np.ascontiguousarray(ad_op @ a_op)
    n_diag = np.ascontiguousarray(excitation_diag, dtype=np.float64)
    rho0 = np.ascontiguousarray(rho0, dtype=np.complex128)
    watch = np.ascontiguousarray(watch, dtype=np.complex128)
    snap_steps = np.ascontiguousarray(snap_steps, dtype=np.int64)
    return _impl(H, a_op, ad_op, n_op, n_diag, float(kappa), rho0, float(dt),
                 int(n_steps), watch, snap_steps)
