"""Dissipative dynamics under cavity photon loss.

The master equation

    drho/dt = i [rho, H] + kappa/2 (2 a rho a+ - a+a rho - rho a+a)

acts on the direct sum of all excitation subspaces from 0 up to the initial
excitation: photon loss only ever walks states down the ladder, so closing
the ladder at the initial excitation is exact, not a truncation.

Integration uses a fixed-step classical RK4 grid with the step bound
dt * max(kappa, max|H_ij|) <= 0.05.  The trajectory records watch-state
populations at every step together with integrity diagnostics (trace drift,
Hermiticity defect, excitation expectation); none of these are corrected
during the run, so they measure the integrator honestly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import csv
import numpy as np

from . import kernels
from .basis import ladder_spaces
from .hamiltonian import build_hamiltonian

__all__ = [
    "IntegrationError",
    "DensityMatrix",
    "SimulationConfig",
    "Trajectory",
    "build_ladder_hamiltonian",
    "lowering_operator",
    "excitation_diagonal",
    "liouvillian_apply",
    "population",
    "stability_bound",
    "simulate",
]

#: dt * max(kappa, max|H_ij|) must not exceed this
STABILITY_LIMIT = 0.05


class IntegrationError(RuntimeError):
    """Raised when the integrator produces non-finite entries or fails its
    step-halving convergence check."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


def build_ladder_hamiltonian(params, ladder):
    """Block-diagonal Hamiltonian over the excitation ladder."""
    H = np.zeros((ladder.dim, ladder.dim), dtype=complex)
    for n, sub in enumerate(ladder.subspaces):
        lo, hi = ladder.offsets[n], ladder.offsets[n + 1]
        H[lo:hi, lo:hi] = build_hamiltonian(params, basis=sub).matrix
    return H


def lowering_operator(ladder):
    """Photon annihilation operator a on the ladder: |m, S> -> sqrt(m) |m-1, S>."""
    a = np.zeros((ladder.dim, ladder.dim), dtype=complex)
    for n, sub in enumerate(ladder.subspaces):
        off = ladder.offsets[n]
        for i, state in enumerate(sub.states):
            if state.photons == 0:
                continue
            target = type(state)(photons=state.photons - 1, excited=state.excited)
            a[ladder.global_index(target), off + i] = sqrt(state.photons)
    return a


def excitation_diagonal(ladder):
    """Total excitation number carried by each ladder index (constant per block)."""
    out = np.empty(ladder.dim)
    for n, sub in enumerate(ladder.subspaces):
        out[ladder.offsets[n] : ladder.offsets[n + 1]] = n
    return out


def liouvillian_apply(H, a_op, kappa, rho):
    """One evaluation of the master-equation right-hand side (numpy reference,
    independent of the compiled stepping kernel)."""
    out = 1j * (rho @ H - H @ rho)
    if kappa != 0.0:
        ad = a_op.conj().T
        n_op = ad @ a_op
        out = out + kappa * (a_op @ rho @ ad) - 0.5 * kappa * (n_op @ rho + rho @ n_op)
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix bound to its excitation ladder, with integrity probes."""

    ladder: object
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def from_pure(cls, ladder, psi, norm_tol=1e-12):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (ladder.dim,):
            raise ValueError(
                f"state vector has shape {psi.shape}, ladder dimension is {ladder.dim}"
            )
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > norm_tol:
            raise ValueError(f"initial state is not normalized: |psi| = {nrm!r}")
        return cls(ladder=ladder, matrix=np.outer(psi, psi.conj()))

    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def hermiticity_defect(self):
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def min_eigenvalue(self):
        sym = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(sym)[0])


def population(rho, psi, norm_tol=1e-10):
    """<psi| rho |psi> for a normalized pure state against a density matrix.

    The result must come out real (imaginary part below 1e-12); values in
    [-1e-9, 0) are clipped to zero, anything lower is an error.
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > norm_tol:
        raise ValueError(f"population requires a normalized state, |psi| = {nrm!r}")
    val = complex(psi.conj() @ mat @ psi)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"population has non-real value {val!r}")
    p = val.real
    if p < -1e-9:
        raise ValueError(f"population {p!r} below -1e-9; state is not positive")
    return 0.0 if p < 0.0 else p


def stability_bound(params, H):
    """Largest dt allowed by the fixed-step stability rule."""
    scale = max(params.kappa, float(np.abs(H).max()), 1e-12)
    return STABILITY_LIMIT / scale


@dataclass
class SimulationConfig:
    """Everything one dissipative run needs.

    initial : normalized state vector over the ladder (dimension must match
        ``ladder_spaces(params.n_atoms, n_max)``)
    watch : mapping from column name to normalized state vector; populations
        of these states are recorded every step
    t_max : run length; defaults to 30 / |g_1|
    dt : step size; defaults to the largest stable step that divides t_max
    """

    params: object
    n_max: int
    initial: np.ndarray
    watch: dict
    t_max: float = None
    dt: float = None
    n_snapshots: int = 13

    def resolved_t_max(self):
        if self.t_max is not None:
            return float(self.t_max)
        g1 = abs(self.params.g[0])
        if g1 == 0.0:
            raise ValueError("t_max default needs g[0] != 0; pass t_max explicitly")
        return 30.0 / g1


def _resolve_grid(config, H):
    t_max = config.resolved_t_max()
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    bound = stability_bound(config.params, H)
    if config.dt is None:
        n_steps = max(1, int(np.ceil(t_max / bound - 1e-12)))
        return t_max / n_steps, n_steps
    dt = float(config.dt)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > bound * (1 + 1e-12):
        raise ValueError(
            f"dt={dt} violates the stability bound dt*max(kappa, |H|max) <= "
            f"{STABILITY_LIMIT} (largest allowed dt is {bound!r})"
        )
    n_steps = int(round(t_max / dt))
    if n_steps < 1 or abs(n_steps * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"dt={dt} does not divide t_max={t_max} into whole steps")
    return dt, n_steps


@dataclass(frozen=True)
class Trajectory:
    """Fixed-grid populations and integrity diagnostics of one run."""

    times: np.ndarray = field(repr=False)
    names: tuple
    populations: dict = field(repr=False)
    trace: np.ndarray = field(repr=False)
    hermiticity: np.ndarray = field(repr=False)
    excitation: np.ndarray = field(repr=False)
    snapshots: tuple = field(repr=False)
    final_state: DensityMatrix = field(repr=False)
    dt: float = 0.0
    backend: str = ""
    convergence_error: float = None

    @property
    def trace_drift(self):
        return float(np.abs(self.trace - 1.0).max())

    @property
    def hermiticity_drift(self):
        return float(self.hermiticity.max())

    @property
    def max_excitation_rise(self):
        return float(np.diff(self.excitation).max(initial=0.0))

    def population(self, name):
        return self.populations[name]

    def initial_populations(self):
        return {name: float(p[0]) for name, p in self.populations.items()}

    def final_populations(self):
        return {name: float(p[-1]) for name, p in self.populations.items()}

    def to_csv(self, path_or_file):
        """Write ``t, <watch name>...`` rows at full double precision."""
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *self.names])
        cols = [self.populations[name] for name in self.names]
        for i, t in enumerate(self.times):
            writer.writerow(
                [repr(float(t)), *(repr(float(c[i])) for c in cols)]
            )


def simulate(config, convergence_check=False):
    """Integrate the master equation and return the trajectory.

    With ``convergence_check=True`` the run is repeated at half the step size
    and the watch populations must agree to 1e-6 (their maximum difference is
    stored on the trajectory); disagreement raises IntegrationError.
    """
    params = config.params
    ladder = ladder_spaces(params.n_atoms, config.n_max)
    H = build_ladder_hamiltonian(params, ladder)
    a_op = lowering_operator(ladder)
    exc = excitation_diagonal(ladder)

    rho0 = DensityMatrix.from_pure(ladder, config.initial)
    names = tuple(config.watch)
    if len(names) != len(set(names)):
        raise ValueError("watch names must be unique")
    watch = np.zeros((len(names), ladder.dim), dtype=complex)
    for k, name in enumerate(names):
        vec = np.asarray(config.watch[name], dtype=complex)
        if vec.shape != (ladder.dim,):
            raise ValueError(
                f"watch state {name!r} has shape {vec.shape}, expected ({ladder.dim},)"
            )
        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"watch state {name!r} is not normalized: |psi| = {nrm!r}")
        watch[k] = vec

    dt, n_steps = _resolve_grid(config, H)

    def run(step_dt, step_count, snaps):
        pops, trace, herm, excite, snap_mats, rho_f, fail = kernels.evolve(
            H, a_op, params.kappa, rho0.matrix, step_dt, step_count, watch, snaps, exc
        )
        if fail >= 0:
            raise IntegrationError(
                f"non-finite density matrix at step {fail} (t = {fail * step_dt!r})",
                step=fail,
                time=fail * step_dt,
            )
        return pops, trace, herm, excite, snap_mats, rho_f

    n_snaps = max(2, min(config.n_snapshots, n_steps + 1))
    snap_steps = np.unique(np.round(np.linspace(0, n_steps, n_snaps)).astype(np.int64))
    pops, trace, herm, excite, snap_mats, rho_f = run(dt, n_steps, snap_steps)

    convergence_error = None
    if convergence_check:
        fine_pops, *_ = run(dt / 2.0, 2 * n_steps, np.zeros(0, dtype=np.int64))
        convergence_error = float(np.abs(pops - fine_pops[::2]).max())
        if convergence_error > 1e-6:
            raise IntegrationError(
                f"step-halving check failed: populations differ by "
                f"{convergence_error!r} (limit 1e-6)"
            )

    times = np.arange(n_steps + 1) * dt
    snapshots = tuple(
        (float(s * dt), DensityMatrix(ladder=ladder, matrix=m))
        for s, m in zip(snap_steps, snap_mats)
    )
    return Trajectory(
        times=times,
        names=names,
        populations={name: pops[:, k].copy() for k, name in enumerate(names)},
        trace=trace,
        hermiticity=herm,
        excitation=excite,
        snapshots=snapshots,
        final_state=DensityMatrix(ladder=ladder, matrix=rho_f),
        dt=dt,
        backend=kernels.backend(),
        convergence_error=convergence_error,
    )
