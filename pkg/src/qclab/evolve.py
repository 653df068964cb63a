"""Schrodinger propagation by Strang splitting, and checks along the way."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .coherent import CoherentParams, instantaneous_frame, omega
from .errors import (
    BoundaryLeakageError,
    LinearizationGateError,
    PhaseAdvanceError,
    StrideTooCoarseError,
)
from .grid import GridSpec, WaveFunction, real_inner, write_binary
from .potentials import PotentialSpec, linearization_ratio

logger = logging.getLogger(__name__)

MAX_PHASE_PER_STEP = 0.1
LEAKAGE_TOL = 1e-10
RENORM_TOL = 1e-10
GATE_TOL = 1e-3


def _masses(mass, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(mass, dtype=float), (dim,)).copy()


def kinetic_symbol(grid: GridSpec, mass, hbar: float) -> np.ndarray:
    """``sum_i hbar^2 k_i^2 / 2 m_i`` on the Fourier grid."""
    m = _masses(mass, grid.dim)
    return sum(hbar**2 * k**2 / (2 * mi) for k, mi in zip(grid.wavenumbers, m))


def apply_hamiltonian(phi: WaveFunction, V: PotentialSpec, mass=1.0, hbar: float = 1.0,
                      t: float = 0.0) -> WaveFunction:
    kin = np.fft.ifftn(kinetic_symbol(phi.grid, mass, hbar) * np.fft.fftn(phi.values))
    return phi.with_values(kin + V.values(phi.grid.coords, t) * phi.values)


def state_velocity(phi: WaveFunction, V: PotentialSpec, mass=1.0, hbar: float = 1.0,
                   t: float = 0.0) -> WaveFunction:
    """``-(i/hbar) h phi`` with the kinetic term applied spectrally."""
    hphi = apply_hamiltonian(phi, V, mass, hbar, t)
    return hphi.with_values(-1j / hbar * hphi.values)


def energy_moments(phi: WaveFunction, V: PotentialSpec, mass=1.0, hbar: float = 1.0,
                   t: float = 0.0) -> tuple[float, float]:
    """Mean energy and energy uncertainty ``||(h - E) phi||``."""
    hphi = apply_hamiltonian(phi, V, mass, hbar, t).values
    dv = phi.grid.cell_volume
    n2 = np.vdot(phi.values, phi.values).real * dv
    e = np.vdot(phi.values, hphi).real * dv / n2
    spread = np.sqrt(np.sum(np.abs(hphi - e * phi.values) ** 2) * dv / n2)
    return float(e), float(spread)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    energy_spread: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    width: np.ndarray
    force_mean: np.ndarray
    snapshot_times: np.ndarray
    snapshots: tuple[WaveFunction, ...]
    potential: PotentialSpec
    mass: np.ndarray
    hbar: float
    dt: float
    diagnostics_stride: int = 1
    log: list = field(default_factory=list)

    @property
    def sigma_t(self) -> np.ndarray:
        return self.width.mean(axis=1) if self.width.ndim > 1 else self.width

    @property
    def final_state(self) -> WaveFunction:
        return self.snapshots[-1]

    def to_csv(self, path) -> None:
        d = self.x_mean.shape[1]
        header = (["t", "norm", "E_mean", "dE"] + [f"x_mean_{i}" for i in range(d)]
                  + [f"p_mean_{i}" for i in range(d)] + ["sigma_t"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for n in range(len(self.times)):
                row = [self.times[n], self.norm[n], self.energy[n], self.energy_spread[n],
                       *self.x_mean[n], *self.p_mean[n], self.sigma_t[n]]
                w.writerow([repr(float(v)) for v in row])

    def write_snapshots(self, directory, stem: str = "state") -> list:
        paths = []
        for t, phi in zip(self.snapshot_times, self.snapshots):
            p = f"{directory}/{stem}_t{t:.6f}.bin"
            write_binary(phi, p)
            paths.append(p)
        return paths


def support_mask(phi: WaveFunction, rel: float = 1e-10) -> np.ndarray:
    rho = phi.density()
    return rho > rel * rho.max()


def check_phase_advance(phi: WaveFunction, V: PotentialSpec, mass, hbar: float, dt: float,
                        t: float = 0.0, limit: float = MAX_PHASE_PER_STEP) -> tuple[float, float]:
    """Largest kinetic and potential phase accumulated in one step over the packet's support.

    The kinetic bound uses the wavenumbers where the spectrum is above
    ``1e-10`` of its peak; the potential bound uses the spread of ``V``
    over the region where the density is above ``1e-10`` of its peak.
    """
    spec = np.abs(np.fft.fftn(phi.values)) ** 2
    kmask = spec > 1e-10 * spec.max()
    kin = kinetic_symbol(phi.grid, mass, hbar)
    kin_phase = abs(dt) * kin[kmask].max() / hbar
    v = V.values(phi.grid.coords, t)[support_mask(phi)]
    pot_phase = abs(dt) * (v.max() - v.min()) / hbar
    if kin_phase > limit or pot_phase > limit:
        raise PhaseAdvanceError(
            f"phase per step too large: kinetic {kin_phase:.3g}, potential {pot_phase:.3g} "
            f"(limit {limit})")
    return float(kin_phase), float(pot_phase)


def propagate(phi0: WaveFunction, V: PotentialSpec, mass=1.0, hbar: float = 1.0,
              dt: float = 1e-3, T: float = 1.0, snapshot_stride: int | None = None,
              diagnostics_stride: int = 1, leakage_tol: float = LEAKAGE_TOL,
              max_phase: float = MAX_PHASE_PER_STEP, t0: float = 0.0) -> Trajectory:
    """Strang splitting ``exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2)`` with fixed ``dt``.

    ``T`` may be negative (with negative ``dt``) to run backwards.  A
    time-dependent potential is sampled at the midpoint of each step.
    """
    grid = phi0.grid
    nsteps = int(round(T / dt))
    if nsteps < 0 or abs(nsteps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} is not a non-negative multiple of dt={dt}")
    check_phase_advance(phi0, V, mass, hbar, dt, t0, max_phase)
    if phi0.boundary_mass() > leakage_tol:
        raise BoundaryLeakageError(f"initial boundary mass {phi0.boundary_mass():.2e}")
    if snapshot_stride is None:
        snapshot_stride = max(nsteps, 1)

    dv = grid.cell_volume
    m = _masses(mass, grid.dim)
    ksym = kinetic_symbol(grid, m, hbar)
    kin_step = np.exp(-1j * ksym * dt / hbar)
    coords = grid.coords
    static_v = None if V.time_dependent else V.values(coords)
    static_g = None if V.time_dependent else V.gradient(coords)
    width_cells = max(1, int(round(0.05 * grid.points_per_axis)))
    inner = (slice(width_cells, grid.points_per_axis - width_cells),) * grid.dim

    nrec = nsteps // diagnostics_stride + 1
    rec = {k: np.empty(nrec) for k in ("t", "norm", "E", "dE")}
    xm = np.empty((nrec, grid.dim))
    pm = np.empty((nrec, grid.dim))
    wd = np.empty((nrec, grid.dim))
    fm = np.empty((nrec, grid.dim))
    snaps, snap_t, log = [], [], []

    def record(j, t, psi):
        vt = static_v if static_v is not None else V.values(coords, t)
        gt = static_g if static_g is not None else V.gradient(coords, t)
        rho = np.abs(psi) ** 2
        total = rho.sum()
        norm2 = total * dv
        boundary = (total - rho[inner].sum()) * dv
        if boundary > leakage_tol:
            raise BoundaryLeakageError(f"boundary mass {boundary:.2e} at t={t:.6g}")
        psi_k = np.fft.fftn(psi)
        spec = np.abs(psi_k) ** 2
        stot = spec.sum()
        hpsi = np.fft.ifftn(ksym * psi_k) + vt * psi
        e = np.vdot(psi, hpsi).real * dv / norm2
        rec["t"][j] = t
        rec["norm"][j] = np.sqrt(norm2)
        rec["E"][j] = e
        rec["dE"][j] = np.sqrt(np.sum(np.abs(hpsi - e * psi) ** 2) * dv / norm2)
        for i, (x, k, g) in enumerate(zip(coords, grid.wavenumbers, gt)):
            mean = (x * rho).sum() / total
            xm[j, i] = mean
            wd[j, i] = np.sqrt((((x - mean) ** 2) * rho).sum() / total)
            pm[j, i] = hbar * (k * spec).sum() / stot
            fm[j, i] = -(g * rho).sum() / total

    psi = phi0.values.copy()
    record(0, t0, psi)
    snaps.append(phi0)
    snap_t.append(t0)
    half_v = None if static_v is None else np.exp(-0.5j * static_v * dt / hbar)
    for n in range(1, nsteps + 1):
        t_prev = t0 + (n - 1) * dt
        if half_v is None:
            hv = np.exp(-0.5j * V.values(coords, t_prev + 0.5 * dt) * dt / hbar)
        else:
            hv = half_v
        psi = hv * np.fft.ifftn(kin_step * np.fft.fftn(hv * psi))
        t = t0 + n * dt
        norm = np.sqrt(np.sum(np.abs(psi) ** 2) * dv)
        if abs(norm - 1.0) > RENORM_TOL:
            msg = f"renormalized at t={t:.6g}: |norm-1|={abs(norm - 1):.3e}"
            logger.info(msg)
            log.append(msg)
            psi = psi / norm
        if n % diagnostics_stride == 0:
            record(n // diagnostics_stride, t, psi)
        if n % snapshot_stride == 0 or n == nsteps:
            if snap_t[-1] != t:
                snaps.append(WaveFunction(grid, psi))
                snap_t.append(t)

    return Trajectory(
        times=rec["t"], norm=rec["norm"], energy=rec["E"], energy_spread=rec["dE"],
        x_mean=xm, p_mean=pm, width=wd, force_mean=fm,
        snapshot_times=np.array(snap_t), snapshots=tuple(snaps), potential=V,
        mass=m, hbar=hbar, dt=dt, diagnostics_stride=diagnostics_stride, log=log)


@dataclass(frozen=True)
class EhrenfestResiduals:
    times: np.ndarray
    position: np.ndarray
    momentum: np.ndarray

    def max(self) -> tuple[float, float]:
        return float(self.position.max()), float(self.momentum.max())


def ehrenfest_residuals(traj: Trajectory, V: PotentialSpec | None = None) -> EhrenfestResiduals:
    """Centered-difference residuals of ``d<x>/dt = <p>/m`` and ``d<p>/dt = <-grad V>``.

    The mean force is the one recorded during propagation; passing ``V``
    only guards against pairing a trajectory with the wrong potential.
    """
    if traj.diagnostics_stride != 1:
        raise StrideTooCoarseError("Ehrenfest residuals need diagnostics at every step")
    if V is not None and V is not traj.potential and V != traj.potential:
        raise ValueError("trajectory was propagated under a different potential")
    h = traj.dt
    dx = (traj.x_mean[2:] - traj.x_mean[:-2]) / (2 * h)
    dp = (traj.p_mean[2:] - traj.p_mean[:-2]) / (2 * h)
    r1 = np.abs(dx - traj.p_mean[1:-1] / traj.mass)
    r2 = np.abs(dp - traj.force_mean[1:-1])
    return EhrenfestResiduals(traj.times[1:-1], r1, r2)


def gate(V: PotentialSpec, params: CoherentParams, t: float = 0.0, tol: float = GATE_TOL) -> float:
    ratio = linearization_ratio(V, params.center, params.sigma, t)
    if ratio > tol:
        raise LinearizationGateError(
            f"linear approximation of V fails over the packet: ratio {ratio:.3g} > {tol}")
    return ratio


def spatial_projection(phi: WaveFunction, V: PotentialSpec, mass=1.0, hbar: float = 1.0,
                       t: float = 0.0) -> np.ndarray:
    """``(dr/dt, -dr/dx^alpha normalised)`` for the current state."""
    frame = instantaneous_frame(phi, hbar)
    vel = state_velocity(phi, V, mass, hbar, t)
    return np.array([real_inner(vel, e) for e in frame.spatial])


@dataclass(frozen=True)
class ProjectionRate:
    rate: np.ndarray
    expected: np.ndarray
    residual: float
    gate_ratio: float


def projection_rate_check(params: CoherentParams, V: PotentialSpec, grid: GridSpec,
                          mass: float = 1.0, hbar: float = 1.0, t0: float = 0.0,
                          step: float = 1e-3, substeps: int = 20) -> ProjectionRate:
    """Time derivative of the spatial velocity component at ``t0`` against ``-V'(a) / (2 m sigma)``."""
    ratio = gate(V, params, t0)
    phi0 = omega(params, grid, hbar)
    dt = step / substeps
    fwd = propagate(phi0, V, mass, hbar, dt, step, t0=t0).final_state
    bwd = propagate(phi0, V, mass, hbar, -dt, -step, t0=t0).final_state
    p_plus = spatial_projection(fwd, V, mass, hbar, t0 + step)
    p_minus = spatial_projection(bwd, V, mass, hbar, t0 - step)
    rate = (p_plus - p_minus) / (2 * step)
    expected = V.force_at(params.center, t0) / (mass * 2 * params.sigma)
    return ProjectionRate(rate, expected, float(np.abs(rate - expected).max()), ratio)
