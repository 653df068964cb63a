"""Coherent packets as a phase-space manifold inside L2.

``omega(a, p, sigma)`` sends a phase-space point to the Gaussian packet
centred at ``a`` with mean momentum ``p``.  Writing a state as
``r exp(i theta)``, the tangent directions used below are

* spatial:    ``-dr/dx^alpha exp(i theta)``
* momentum:   ``i dtheta/dp^beta r exp(i theta)``
* spreading:  ``i dr/dsigma exp(i theta)``
* phase:      ``-i phi``

each normalised in the real metric ``Re (u, v)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FrameDegenerateError
from .grid import (
    GridSpec,
    WaveFunction,
    l2_inner,
    l2_norm,
    measured_width,
    position_expectation,
    real_inner,
    sample_coherent,
    spectral_derivative,
)

FRAME_MIN_NORM = 1e-6
FRAME_ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class CoherentParams:
    center: np.ndarray
    momentum: np.ndarray
    sigma: float
    global_phase: float = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        p = np.atleast_1d(np.asarray(self.momentum, dtype=float)).copy()
        if p.size == 1 and c.size > 1:
            p = np.full_like(c, p[0])
        if c.shape != p.shape:
            raise ValueError("center and momentum must have the same length")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        c.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "momentum", p)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def dim(self) -> int:
        return self.center.size

    def replace(self, **changes) -> "CoherentParams":
        kw = dict(center=self.center, momentum=self.momentum, sigma=self.sigma,
                  global_phase=self.global_phase)
        kw.update(changes)
        return CoherentParams(**kw)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "momentum": self.momentum.tolist(),
                "sigma": self.sigma, "global_phase": self.global_phase}


def omega(params: CoherentParams, grid: GridSpec, hbar: float = 1.0) -> WaveFunction:
    return sample_coherent(params, grid, hbar)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    base: WaveFunction
    phase: WaveFunction
    spatial: tuple[WaveFunction, ...]
    momentum: tuple[WaveFunction, ...]
    spreading: WaveFunction
    # real direction d r/d sigma exp(i theta); only needed once the packet chirps
    spreading_real: WaveFunction | None = None

    def labelled(self) -> list[tuple[str, WaveFunction]]:
        out = [("phase", self.phase)]
        out += [(f"spatial{i}", v) for i, v in enumerate(self.spatial)]
        out += [(f"momentum{i}", v) for i, v in enumerate(self.momentum)]
        out.append(("spreading", self.spreading))
        return out

    def gram(self) -> np.ndarray:
        vecs = [v for _, v in self.labelled()]
        return np.array([[real_inner(u, v) for v in vecs] for u in vecs])


def _unit(values: np.ndarray, grid: GridSpec, label: str) -> WaveFunction:
    w = WaveFunction(grid, values)
    n = l2_norm(w)
    if n < FRAME_MIN_NORM:
        raise FrameDegenerateError(f"{label} direction has norm {n:.2e}")
    return WaveFunction(grid, values / n)


def _check_orthonormal(frame: TangentFrame) -> None:
    G = frame.gram()
    off = np.abs(G - np.eye(len(G))).max()
    if off > FRAME_ORTHO_TOL:
        raise FrameDegenerateError(f"frame not orthonormal: max deviation {off:.2e}")


def _frame_from_parts(phi: WaveFunction, r: np.ndarray, dr_dx: list[np.ndarray],
                      center: np.ndarray, width: float, hbar: float,
                      check: bool) -> TangentFrame:
    grid = phi.grid
    with np.errstate(invalid="ignore", divide="ignore"):
        unimodular = np.where(r > 1e-300, phi.values / np.where(r > 1e-300, r, 1.0), 0.0)
    d = grid.dim
    offsets = [x - a for x, a in zip(grid.coords, center)]
    spatial = tuple(_unit(-g * unimodular, grid, f"spatial{i}") for i, g in enumerate(dr_dx))
    momentum = tuple(_unit(1j * y / hbar * phi.values, grid, f"momentum{i}")
                     for i, y in enumerate(offsets))
    radial2 = sum(y**2 for y in offsets)
    dr_dsigma = r * (radial2 / (2 * width**3) - d / (2 * width))
    spreading = _unit(1j * dr_dsigma * unimodular, grid, "spreading")
    spreading_real = _unit(dr_dsigma * unimodular, grid, "spreading (real)")
    frame = TangentFrame(phi, phi.with_values(-1j * phi.values), spatial, momentum, spreading,
                         spreading_real)
    if check:
        _check_orthonormal(frame)
    return frame


def tangent_frame(params: CoherentParams, grid: GridSpec, hbar: float = 1.0,
                  check: bool = True) -> TangentFrame:
    """Orthonormal tangent directions at ``omega(params)``, from analytic ``r`` and ``theta``."""
    phi = omega(params, grid, hbar)
    r = np.abs(phi.values)
    s = params.sigma
    dr_dx = [-(x - a) / (2 * s**2) * r for x, a in zip(grid.coords, params.center)]
    return _frame_from_parts(phi, r, dr_dx, params.center, s, hbar, check)


def instantaneous_frame(phi: WaveFunction, hbar: float = 1.0) -> TangentFrame:
    """Frame built from a general packet: ``r = |phi|``, measured centre and width.

    Used after evolution has chirped the packet, where the orthogonality
    relations of the initial frame no longer all hold; no check is made.
    """
    r = np.abs(phi.values)
    rw = phi.with_values(r)
    dr_dx = [spectral_derivative(rw, axis=i, check_band=False).values.real
             for i in range(phi.grid.dim)]
    return _frame_from_parts(phi, r, dr_dx, position_expectation(phi), measured_width(phi),
                             hbar, check=False)


@dataclass(frozen=True)
class VelocityDecomposition:
    phase_component: float
    spatial: np.ndarray
    momentum: np.ndarray
    spreading: float
    residual_norm: float
    velocity_norm: float
    extras: dict = field(default_factory=dict, compare=False)

    def sum_of_squares(self) -> float:
        return float(self.phase_component**2 + np.sum(self.spatial**2)
                     + np.sum(self.momentum**2) + self.spreading**2)

    def completeness_error(self) -> float:
        """Relative mismatch of the Pythagorean identity."""
        total = self.velocity_norm**2
        return abs(self.sum_of_squares() + self.residual_norm**2 - total) / total

    def to_dict(self) -> dict:
        return {
            "phase_component": float(self.phase_component),
            "spatial": [float(v) for v in self.spatial],
            "momentum": [float(v) for v in self.momentum],
            "spreading": float(self.spreading),
            "residual_norm": float(self.residual_norm),
            "velocity_norm": float(self.velocity_norm),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def table(self) -> str:
        rows = [("phase", self.phase_component)]
        rows += [(f"spatial[{i}]", v) for i, v in enumerate(self.spatial)]
        rows += [(f"momentum[{i}]", v) for i, v in enumerate(self.momentum)]
        rows += [("spreading", self.spreading), ("residual", self.residual_norm),
                 ("|dphi/dt|", self.velocity_norm)]
        return "\n".join(f"{name:<14s}{value: .10f}" for name, value in rows)


def decompose_velocity(phi_dot: WaveFunction, frame: TangentFrame,
                       params: CoherentParams | None = None) -> VelocityDecomposition:
    """Riemannian projections of ``phi_dot`` on the frame, plus what is left over.

    ``params`` is accepted for symmetry with :func:`tangent_frame`; the
    projections only use the frame.
    """
    coeffs = []
    remainder = phi_dot.values.copy()
    for _, vec in frame.labelled():
        c = real_inner(phi_dot, vec)
        coeffs.append(c)
        remainder -= c * vec.values
    d = len(frame.spatial)
    res = WaveFunction(phi_dot.grid, remainder)
    return VelocityDecomposition(
        phase_component=coeffs[0],
        spatial=np.array(coeffs[1:1 + d]),
        momentum=np.array(coeffs[1 + d:1 + 2 * d]),
        spreading=coeffs[-1],
        residual_norm=l2_norm(res),
        velocity_norm=l2_norm(phi_dot),
    )


def spreading_magnitude(phi_dot: WaveFunction, frame: TangentFrame) -> float:
    """Length of the projection on the complex line through ``dr/dsigma exp(i theta)``."""
    a = real_inner(phi_dot, frame.spreading)
    b = real_inner(phi_dot, frame.spreading_real)
    return float(np.hypot(a, b))


def phase_space_speed(d_center, d_momentum, d_sigma, params: CoherentParams,
                      hbar: float = 1.0) -> float:
    """Squared speed of a path through the extended phase space, in the induced metric.

    ``|dA|^2 / 4 s^2 + s^2 |dP|^2 / hbar^2 + d |ds|^2 / 2 s^2`` where ``d`` is
    the spatial dimension.
    """
    s = params.sigma
    if not s > 0:
        raise ValueError("sigma must be positive")
    dA = np.atleast_1d(np.asarray(d_center, dtype=float))
    dP = np.atleast_1d(np.asarray(d_momentum, dtype=float))
    return float(np.sum(dA**2) / (4 * s**2) + s**2 * np.sum(dP**2) / hbar**2
                 + params.dim * float(d_sigma) ** 2 / (2 * s**2))


def omega_path_velocity(path, tau: float, grid: GridSpec, hbar: float = 1.0,
                        step: float = 1e-3) -> tuple[WaveFunction, WaveFunction]:
    """State and velocity of ``omega(path(tau))`` by a fourth-order central difference.

    ``path`` maps a parameter value to :class:`CoherentParams`.
    """
    def state(t):
        return omega(path(t), grid, hbar).values

    h = step
    vel = (-state(tau + 2 * h) + 8 * state(tau + h) - 8 * state(tau - h)
           + state(tau - 2 * h)) / (12 * h)
    return omega(path(tau), grid, hbar), WaveFunction(grid, vel)


def horizontal_speed_squared(phi: WaveFunction, phi_dot: WaveFunction) -> float:
    """``|phi_dot|^2`` with the component along the phase circle removed."""
    return float(l2_norm(phi_dot) ** 2 - abs(l2_inner(phi_dot, phi)) ** 2)
