"""Two distinguishable particles on a line each: product states on a 2D grid.

Axis 0 carries particle 1 and axis 1 carries particle 2.  Per-particle tangent
vectors are a 1D frame vector of one factor tensored with the other factor;
the phase direction is common to both particles.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .classical import ClassicalTrajectory, _step_count, newton_integrate, rk4
from .coherent import CoherentParams, VelocityDecomposition, tangent_frame
from .errors import EntangledStateError, GridMismatchError
from .evolve import Trajectory, gate, propagate, state_velocity
from .grid import GridSpec, WaveFunction, l2_norm, real_inner
from .potentials import PotentialSpec

PRODUCT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class TwoBodyState(WaveFunction):
    """A state on a 2D grid; ``factors`` certifies a product of two coherent packets."""

    factors: tuple[CoherentParams, CoherentParams] | None = None

    def __post_init__(self):
        if self.grid.dim != 2:
            raise GridMismatchError("two-body states live on a 2D grid")
        super().__post_init__()


def axis_grid(grid2d: GridSpec) -> GridSpec:
    return GridSpec(1, grid2d.points_per_axis, grid2d.box_length)


def tensor_state(params1: CoherentParams, params2: CoherentParams, grid2d: GridSpec,
                 hbar: float = 1.0) -> TwoBodyState:
    if grid2d.dim != 2:
        raise GridMismatchError("tensor_state needs a 2D grid")
    if params1.dim != 1 or params2.dim != 1:
        raise ValueError("each particle is one dimensional")
    g1 = axis_grid(grid2d)
    f1 = tangent_frame(params1, g1, hbar, check=False).base
    f2 = tangent_frame(params2, g1, hbar, check=False).base
    vals = np.multiply.outer(f1.values, f2.values)
    return TwoBodyState(grid2d, vals, normalized=True, factors=(params1, params2))


def schmidt_coefficients(psi: WaveFunction) -> np.ndarray:
    """Squared singular values of the amplitude matrix, summing to one."""
    s = np.linalg.svd(psi.values, compute_uv=False)
    w = s**2
    return w / w.sum()


def schmidt_number(psi: WaveFunction) -> float:
    """``1 / sum(lambda_i^2)``; one for a product state."""
    lam = schmidt_coefficients(psi)
    return float(1.0 / np.sum(lam**2))


def two_body_propagate(psi0: WaveFunction, m1: float, m2: float, V: PotentialSpec,
                       dt: float, T: float, hbar: float = 1.0, **kw) -> Trajectory:
    if psi0.grid.dim != 2:
        raise GridMismatchError("two-body propagation needs a 2D grid")
    return propagate(psi0, V, mass=(m1, m2), hbar=hbar, dt=dt, T=T, **kw)


@dataclass(frozen=True)
class ParticleFrames:
    phase: WaveFunction
    particle1: dict
    particle2: dict

    def vectors(self) -> list[tuple[str, WaveFunction]]:
        out = [("phase", self.phase)]
        out += [(f"{k}1", v) for k, v in self.particle1.items()]
        out += [(f"{k}2", v) for k, v in self.particle2.items()]
        return out

    def gram(self) -> np.ndarray:
        vecs = [v for _, v in self.vectors()]
        return np.array([[real_inner(u, v) for v in vecs] for u in vecs])


def particle_frames(params1: CoherentParams, params2: CoherentParams, grid2d: GridSpec,
                    hbar: float = 1.0) -> ParticleFrames:
    g1 = axis_grid(grid2d)
    fr1 = tangent_frame(params1, g1, hbar)
    fr2 = tangent_frame(params2, g1, hbar)

    def lift(u, v):
        return WaveFunction(grid2d, np.multiply.outer(u.values, v.values))

    base = lift(fr1.base, fr2.base)
    p1 = {"spatial": lift(fr1.spatial[0], fr2.base), "momentum": lift(fr1.momentum[0], fr2.base),
          "spreading": lift(fr1.spreading, fr2.base)}
    p2 = {"spatial": lift(fr1.base, fr2.spatial[0]), "momentum": lift(fr1.base, fr2.momentum[0]),
          "spreading": lift(fr1.base, fr2.spreading)}
    return ParticleFrames(base.with_values(-1j * base.values), p1, p2)


def cross_orthogonality(frames: ParticleFrames) -> float:
    """Largest deviation of the frame's Gram matrix from the identity."""
    G = frames.gram()
    return float(np.abs(G - np.eye(len(G))).max())


def _require_product(psi: WaveFunction) -> float:
    k = schmidt_number(psi)
    if k > 1 + PRODUCT_TOL:
        raise EntangledStateError(f"Schmidt number {k:.8f} exceeds 1 + {PRODUCT_TOL}")
    return k


def per_particle_components(psi: WaveFunction, params1: CoherentParams,
                            params2: CoherentParams, m1: float, m2: float, V: PotentialSpec,
                            hbar: float = 1.0, t: float = 0.0, check_product: bool = True
                            ) -> tuple[VelocityDecomposition, VelocityDecomposition]:
    """Projections of the two-body Schrodinger velocity on each particle's frame.

    Both results carry the shared phase component; ``residual_norm`` and
    ``velocity_norm`` refer to the whole two-body velocity.  The Schmidt
    test costs an SVD; callers that build ``psi`` as a product may skip it.
    """
    k = _require_product(psi) if check_product else 1.0
    frames = particle_frames(params1, params2, psi.grid, hbar)
    vel = state_velocity(psi, V, (m1, m2), hbar, t)
    coeffs = {name: real_inner(vel, vec) for name, vec in frames.vectors()}
    remainder = vel.values.copy()
    for name, vec in frames.vectors():
        remainder = remainder - coeffs[name] * vec.values
    res = l2_norm(WaveFunction(psi.grid, remainder))
    total = l2_norm(vel)
    out = []
    for i in (1, 2):
        out.append(VelocityDecomposition(
            phase_component=coeffs["phase"],
            spatial=np.array([coeffs[f"spatial{i}"]]),
            momentum=np.array([coeffs[f"momentum{i}"]]),
            spreading=coeffs[f"spreading{i}"],
            residual_norm=res,
            velocity_norm=total,
            extras={"schmidt_number": k, "particle": i},
        ))
    return out[0], out[1]


@dataclass(frozen=True)
class TwoBodyConstrained:
    times: np.ndarray
    centers: np.ndarray
    momenta: np.ndarray


def constrained_two_body(params1: CoherentParams, params2: CoherentParams, V: PotentialSpec,
                         grid2d: GridSpec, m1: float = 1.0, m2: float = 1.0,
                         hbar: float = 1.0, dt: float = 1e-2, T: float = 1.0,
                         t0: float = 0.0) -> TwoBodyConstrained:
    """Per-particle constrained flow under a shared potential, widths frozen.

    ``a_i' = 2 sigma_i * spatial_i`` and ``p_i' = (hbar / sigma_i) * momentum_i``.
    """
    s = np.array([params1.sigma, params2.sigma])

    def split(y):
        return (params1.replace(center=y[0:1], momentum=y[2:3]),
                params2.replace(center=y[1:2], momentum=y[3:4]))

    def rhs(t, y):
        q1, q2 = split(y)
        psi = tensor_state(q1, q2, grid2d, hbar)
        c1, c2 = per_particle_components(psi, q1, q2, m1, m2, V, hbar, t, check_product=False)
        spatial = np.array([c1.spatial[0], c2.spatial[0]])
        mom = np.array([c1.momentum[0], c2.momentum[0]])
        return np.concatenate([2 * s * spatial, hbar / s * mom])

    def on_step(t, y):
        pair = CoherentParams(y[:2], y[2:], float(s.max()))
        gate(V, pair, t)

    y0 = np.array([params1.center[0], params2.center[0], params1.momentum[0],
                   params2.momentum[0]])
    times, ys = rk4(rhs, y0, dt, _step_count(dt, T), t0, on_step=on_step)
    return TwoBodyConstrained(times, ys[:, :2], ys[:, 2:])


def two_body_newton(params1: CoherentParams, params2: CoherentParams, V: PotentialSpec,
                    m1: float = 1.0, m2: float = 1.0, dt: float = 1e-2, T: float = 1.0,
                    t0: float = 0.0) -> ClassicalTrajectory:
    a0 = [params1.center[0], params2.center[0]]
    v0 = [params1.momentum[0] / m1, params2.momentum[0] / m2]
    return newton_integrate((m1, m2), V, a0, v0, dt, T, t0)


def write_grid_csv(psi: WaveFunction, path, quantity: str = "density") -> None:
    """Matrix layout for heat maps: first row holds ``x2``, first column holds ``x1``."""
    if psi.grid.dim != 2:
        raise GridMismatchError("grid CSV export is for 2D states")
    if quantity == "density":
        data = psi.density()
    elif quantity == "real":
        data = psi.values.real
    elif quantity == "imag":
        data = psi.values.imag
    else:
        raise ValueError("quantity must be density, real or imag")
    x = psi.grid.axis
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1\\x2", *[repr(float(v)) for v in x]])
        for xi, row in zip(x, data):
            w.writerow([repr(float(xi)), *[repr(float(v)) for v in row]])
