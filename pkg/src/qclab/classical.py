"""Newtonian reference dynamics, the coherent-manifold constrained flow, and the action.

The constrained flow keeps a packet of fixed width on the coherent manifold:
the Schrodinger velocity of ``omega(a, p, sigma)`` is projected on the
spatial and momentum directions and converted back into rates for ``a`` and
``p``.  Everything orthogonal to those directions, spreading included, is
dropped; its size is logged per step.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coherent import CoherentParams, omega, tangent_frame
from .errors import IntegratorInstabilityError
from .evolve import GATE_TOL, gate, state_velocity
from .grid import GridSpec, l2_norm, real_inner
from .kernel_space import (
    KernelSpace,
    delta,
    delta_h_inner,
    h_norm,
    path_derivatives,
    uniform_step,
    velocity_element,
)
from .potentials import PotentialSpec


def rk4(rhs: Callable[[float, np.ndarray], np.ndarray], y0, dt: float, nsteps: int,
        t0: float = 0.0, on_step: Callable | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Classic fourth-order Runge-Kutta with fixed step; returns ``(times, states)``."""
    y = np.asarray(y0, dtype=float).copy()
    out = np.empty((nsteps + 1,) + y.shape)
    out[0] = y
    times = t0 + dt * np.arange(nsteps + 1)
    for n in range(nsteps):
        t = times[n]
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegratorInstabilityError(f"non-finite state at t={times[n + 1]:.6g}")
        out[n + 1] = y
        if on_step is not None:
            on_step(times[n + 1], y)
    return times, out


def _step_count(dt: float, T: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(round(T / dt))
    if n < 0 or abs(n * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} is not a non-negative multiple of dt={dt}")
    return n


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    energy: np.ndarray

    def relative_energy_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.abs(self.energy - e0).max() / scale)


def newton_integrate(m, V: PotentialSpec, a0, v0, dt: float, T: float,
                     t0: float = 0.0) -> ClassicalTrajectory:
    """``m a'' = -grad V(a, t)`` by RK4 on ``(a, v)``; ``m`` may be per axis."""
    a0 = np.atleast_1d(np.asarray(a0, dtype=float))
    v0 = np.broadcast_to(np.atleast_1d(np.asarray(v0, dtype=float)), a0.shape)
    d = a0.size
    mass = np.broadcast_to(np.atleast_1d(np.asarray(m, dtype=float)), (d,))

    def rhs(t, y):
        return np.concatenate([y[d:], V.force_at(y[:d], t) / mass])

    times, ys = rk4(rhs, np.concatenate([a0, v0]), dt, _step_count(dt, T), t0)
    pos, vel = ys[:, :d], ys[:, d:]
    pot = np.array([float(V.values(tuple(p), t)) for p, t in zip(pos, times)])
    energy = 0.5 * np.sum(mass * vel**2, axis=1) + pot
    return ClassicalTrajectory(times, pos, vel, energy)


@dataclass(frozen=True)
class ConstrainedTrajectory:
    times: np.ndarray
    center: np.ndarray
    momentum: np.ndarray
    sigma: float
    discarded_norm: np.ndarray
    spreading: np.ndarray
    gate_ratio: np.ndarray
    extras: dict = field(default_factory=dict)

    def to_csv(self, path, newton: ClassicalTrajectory | None = None, mass=1.0) -> None:
        """Aligned columns; with ``newton`` given, its position and momentum sit alongside."""
        d = self.center.shape[1]
        header = (["t"] + [f"a_{i}" for i in range(d)] + [f"p_{i}" for i in range(d)]
                  + ["discarded_norm", "spreading"])
        if newton is not None:
            if len(newton.times) != len(self.times) or not np.allclose(newton.times, self.times):
                raise ValueError("trajectories are not sampled on the same times")
            header += [f"a_newton_{i}" for i in range(d)] + [f"p_newton_{i}" for i in range(d)]
        m = np.broadcast_to(np.atleast_1d(np.asarray(mass, dtype=float)), (d,))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for n, t in enumerate(self.times):
                row = [t, *self.center[n], *self.momentum[n], self.discarded_norm[n],
                       self.spreading[n]]
                if newton is not None:
                    row += [*newton.position[n], *(m * newton.velocity[n])]
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class ProjectedRates:
    center_rate: np.ndarray
    momentum_rate: np.ndarray
    discarded_norm: float
    spreading: float


def projected_rates(params: CoherentParams, V: PotentialSpec, grid: GridSpec, mass=1.0,
                    hbar: float = 1.0, t: float = 0.0) -> ProjectedRates:
    """Rates of ``(a, p)`` read off the Schrodinger velocity of ``omega(a, p, sigma)``.

    ``a' = 2 sigma * spatial`` and ``p' = (hbar / sigma) * momentum`` invert the
    normalisation of the unit frame vectors.
    """
    frame = tangent_frame(params, grid, hbar, check=False)
    vel = state_velocity(frame.base, V, mass, hbar, t)
    s = params.sigma
    spatial = np.array([real_inner(vel, e) for e in frame.spatial])
    mom = np.array([real_inner(vel, e) for e in frame.momentum])
    kept = float(np.sum(spatial**2) + np.sum(mom**2))
    discarded = float(np.sqrt(max(l2_norm(vel) ** 2 - kept, 0.0)))
    spread = real_inner(vel, frame.spreading)
    return ProjectedRates(2 * s * spatial, hbar / s * mom, discarded, spread)


def constrained_evolve(params0: CoherentParams, V: PotentialSpec, grid: GridSpec, mass=1.0,
                       hbar: float = 1.0, dt: float = 1e-3, T: float = 1.0, t0: float = 0.0,
                       gate_tol: float = GATE_TOL) -> ConstrainedTrajectory:
    """RK4 on the projected rates with ``sigma`` frozen.

    The linearisation gate is evaluated at every accepted step.
    """
    d = params0.dim
    s = params0.sigma
    gates = [gate(V, params0, t0, gate_tol)]
    discarded, spreading = [], []

    def params_of(y):
        return params0.replace(center=y[:d], momentum=y[d:])

    def rhs(t, y):
        r = projected_rates(params_of(y), V, grid, mass, hbar, t)
        return np.concatenate([r.center_rate, r.momentum_rate])

    def log_step(t, y):
        p = params_of(y)
        gates.append(gate(V, p, t, gate_tol))
        r = projected_rates(p, V, grid, mass, hbar, t)
        discarded.append(r.discarded_norm)
        spreading.append(r.spreading)

    first = projected_rates(params0, V, grid, mass, hbar, t0)
    discarded.append(first.discarded_norm)
    spreading.append(first.spreading)
    y0 = np.concatenate([params0.center, params0.momentum])
    times, ys = rk4(rhs, y0, dt, _step_count(dt, T), t0, on_step=log_step)
    return ConstrainedTrajectory(times, ys[:, :d], ys[:, d:], s, np.array(discarded),
                                 np.array(spreading), np.array(gates))


@dataclass(frozen=True)
class ActionValue:
    h_action: float
    classical_action: float

    @property
    def relative_difference(self) -> float:
        scale = max(abs(self.classical_action), 1e-300)
        return abs(self.h_action - self.classical_action) / scale


def action_functional(path, times, m, V: PotentialSpec, K: KernelSpace) -> ActionValue:
    """Action of the point path ``a(t)`` computed through its image ``delta_{a(t)}``.

    Kinetic density: ``(2 sigma)^2 (m/2) ||d delta_a / dt||_H^2``.  Potential
    density: ``V(a) (delta_a, delta_a)_H``, the sifting property applied to
    the pairing.  Both integrals use the trapezoid rule on the samples, and the
    classical ``m/2 |a'|^2 - V(a)`` is integrated the same way for comparison.
    """
    dt = uniform_step(times)
    times = np.asarray(times, dtype=float)
    a, vel, _ = path_derivatives(path, times)
    d = a.shape[1]
    mass = np.broadcast_to(np.atleast_1d(np.asarray(m, dtype=float)), (d,))
    scale = 2 * K.sigma
    h_density = np.empty(len(times))
    c_density = np.empty(len(times))
    for n, t in enumerate(times):
        pot = float(V.values(tuple(a[n]), t))
        kin_h = 0.0
        for i in range(d):
            # per-axis mass: each axis contributes its own |d_i delta|^2 term
            comp = velocity_element(a[n], np.eye(d)[i] * vel[n])
            kin_h += 0.5 * mass[i] * scale**2 * h_norm(comp, K) ** 2
        pairing = delta_h_inner(delta(a[n]), delta(a[n]), K).real
        h_density[n] = kin_h - pot * pairing
        c_density[n] = 0.5 * np.sum(mass * vel[n] ** 2) - pot
    return ActionValue(float(np.trapezoid(h_density, dx=dt)), float(np.trapezoid(c_density, dx=dt)))


def oscillator_action(A: float, B: float, T: float, m: float = 1.0, k: float = 1.0) -> float:
    """Exact action of ``a(t) = A cos(wt) + B sin(wt)`` on ``[0, T]``: ``(m/2)[a a']_0^T``."""
    w = np.sqrt(k / m)
    a_T = A * np.cos(w * T) + B * np.sin(w * T)
    v_T = w * (-A * np.sin(w * T) + B * np.cos(w * T))
    return 0.5 * m * (a_T * v_T - A * B * w)
