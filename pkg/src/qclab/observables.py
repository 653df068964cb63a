"""Observables as linear vector fields ``phi -> -i A phi`` on the unit sphere.

Expectation values, variances, projective speed and the split of the
Schrodinger acceleration are all read off as projections on ``-i phi``,
``phi`` and their orthogonal complement.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepSizeError
from .grid import WaveFunction, l2_inner, l2_norm, real_inner
from .potentials import PotentialSpec


@dataclass(frozen=True)
class LinearOperator:
    """An operator given by its action on grid values.

    ``kind`` is ``"position"`` (multiplication by a real function),
    ``"momentum"`` (a function of the wavenumber), or ``"composite"``.
    """

    action: Callable[[WaveFunction], np.ndarray]
    kind: str = "composite"
    self_adjoint: bool = True
    label: str = ""

    def __call__(self, phi: WaveFunction) -> WaveFunction:
        return phi.with_values(self.action(phi))

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(lambda phi: self.action(phi) + other.action(phi), "composite",
                              self.self_adjoint and other.self_adjoint,
                              f"({self.label} + {other.label})")

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "LinearOperator":
        real = np.isreal(scalar)
        return LinearOperator(lambda phi: scalar * self.action(phi), self.kind,
                              self.self_adjoint and bool(real), f"{scalar}*{self.label}")

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        def action(phi):
            return self.action(phi.with_values(other.action(phi)))
        same_family = self.kind == other.kind and self.kind in ("position", "momentum")
        return LinearOperator(action, self.kind if same_family else "composite",
                              self.self_adjoint and other.self_adjoint
                              and (other is self or same_family),
                              f"{self.label}{other.label}")


def identity() -> LinearOperator:
    return LinearOperator(lambda phi: phi.values.copy(), "position", True, "I")


def position_function(f: Callable, label: str = "f(x)") -> LinearOperator:
    """Multiplication by ``f(coords)``, where ``coords`` is the tuple of grid coordinate arrays."""
    def action(phi):
        return np.asarray(f(phi.grid.coords)) * phi.values
    return LinearOperator(action, "position", True, label)


def momentum_function(g: Callable, hbar: float = 1.0, label: str = "g(p)") -> LinearOperator:
    """``g(p)`` applied in Fourier space; ``g`` receives the tuple of momentum arrays ``hbar k``."""
    def action(phi):
        p = tuple(hbar * k for k in phi.grid.wavenumbers)
        return np.fft.ifftn(np.asarray(g(p)) * np.fft.fftn(phi.values))
    return LinearOperator(action, "momentum", True, label)


def position(axis: int = 0) -> LinearOperator:
    return position_function(lambda c: c[axis], f"x{axis}")


def momentum(axis: int = 0, hbar: float = 1.0) -> LinearOperator:
    return momentum_function(lambda p: p[axis], hbar, f"p{axis}")


def hamiltonian(V: PotentialSpec, mass=1.0, hbar: float = 1.0, t: float = 0.0) -> LinearOperator:
    def kinetic(p):
        masses = np.broadcast_to(np.atleast_1d(np.asarray(mass, dtype=float)), (len(p),))
        return sum(pi**2 / (2 * mi) for pi, mi in zip(p, masses))
    T = momentum_function(kinetic, hbar, "T")
    U = position_function(lambda c: V.values(c, t), "V")
    return LinearOperator((T + U).action, "composite", True, "h")


def polynomial_position(coefficients, axis: int = 0) -> LinearOperator:
    coeffs = list(coefficients)
    return position_function(lambda c: np.polynomial.polynomial.polyval(c[axis], coeffs),
                             f"poly(x{axis})")


def polynomial_momentum(coefficients, hbar: float = 1.0, axis: int = 0) -> LinearOperator:
    coeffs = list(coefficients)
    return momentum_function(lambda p: np.polynomial.polynomial.polyval(p[axis], coeffs), hbar,
                             f"poly(p{axis})")


def operator_from_config(desc: dict, grid=None, hbar: float = 1.0) -> LinearOperator:
    """Build an operator from ``{kind, coefficients | table | terms}``."""
    kind = desc["kind"]
    axis = int(desc.get("axis", 0))
    if kind == "identity":
        return identity()
    if kind == "position":
        if "table" in desc:
            table = np.asarray(desc["table"], dtype=float)
            return position_function(lambda c: table.reshape(c[0].shape), "table(x)")
        return polynomial_position(desc["coefficients"], axis)
    if kind == "momentum":
        return polynomial_momentum(desc["coefficients"], hbar, axis)
    if kind == "hamiltonian":
        from .config import potential_from_config
        return hamiltonian(potential_from_config(desc.get("potential", {"family": "free"})),
                           desc.get("mass", 1.0), hbar)
    if kind == "sum":
        ops = [operator_from_config(d, grid, hbar) for d in desc["terms"]]
        out = ops[0]
        for op in ops[1:]:
            out = out + op
        return out
    raise ValueError(f"unknown operator kind {kind!r}")


def self_adjointness_defect(A: LinearOperator, phi: WaveFunction, psi: WaveFunction) -> float:
    """``|(A phi, psi) - (phi, A psi)|``."""
    return abs(l2_inner(A(phi), psi) - l2_inner(phi, A(psi)))


def vector_field(A: LinearOperator, phi: WaveFunction) -> WaveFunction:
    if not A.self_adjoint:
        raise ValueError(f"operator {A.label!r} is not flagged self-adjoint")
    return phi.with_values(-1j * A.action(phi))


def commutator(A: LinearOperator, B: LinearOperator, phi: WaveFunction) -> WaveFunction:
    return phi.with_values(A.action(B(phi)) - B.action(A(phi)))


def _directional(F, phi: WaveFunction, v: WaveFunction, h: float) -> np.ndarray:
    return (F(phi + h * v).values - F(phi - h * v).values) / (2 * h)


@dataclass(frozen=True)
class BracketCheck:
    bracket: WaveFunction
    expected: WaveFunction
    residual: float
    relative: float


def lie_bracket(A: LinearOperator, B: LinearOperator, phi: WaveFunction,
                rel_step: float = 1e-4, richardson_tol: float = 1e-6) -> WaveFunction:
    """``DB(phi)[A_phi] - DA(phi)[B_phi]`` for the fields ``X_phi = -i X phi``, by central differences.

    The difference quotient is repeated at half the step; if the two
    disagree by more than ``richardson_tol`` (relative), the step is rejected.
    """
    def XA(psi):
        return psi.with_values(-1j * A.action(psi))

    def XB(psi):
        return psi.with_values(-1j * B.action(psi))

    fa, fb = XA(phi), XB(phi)

    def bracket_at(h_rel):
        ha = h_rel * l2_norm(phi) / max(l2_norm(fa), 1e-300)
        hb = h_rel * l2_norm(phi) / max(l2_norm(fb), 1e-300)
        return _directional(XB, phi, fa, ha) - _directional(XA, phi, fb, hb)

    b1 = bracket_at(rel_step)
    b2 = bracket_at(rel_step / 2)
    # floor for brackets that vanish: roundoff of the difference quotients
    floor = 1e-8 * np.linalg.norm(fa.values) * np.linalg.norm(fb.values) / np.linalg.norm(phi.values)
    if np.linalg.norm(b1 - b2) > max(richardson_tol * np.linalg.norm(b1), floor):
        raise StepSizeError("finite-difference bracket unstable under step halving")
    return phi.with_values((4 * b2 - b1) / 3)


def lie_bracket_check(A: LinearOperator, B: LinearOperator, phi: WaveFunction,
                      expected: WaveFunction | None = None) -> BracketCheck:
    """Compare the field bracket with ``[A, B] phi`` (or a supplied closed form)."""
    br = lie_bracket(A, B, phi)
    target = commutator(A, B, phi) if expected is None else expected
    res = l2_norm(br - target)
    scale = l2_norm(target)
    return BracketCheck(br, target, res, res / scale if scale > 0 else res)


@dataclass(frozen=True)
class MeanVariance:
    mean: float
    variance: float
    direct_mean: float
    direct_variance: float

    @property
    def discrepancy(self) -> float:
        return max(abs(self.mean - self.direct_mean), abs(self.variance - self.direct_variance))


def expectation_variance(A: LinearOperator, phi: WaveFunction) -> MeanVariance:
    """Mean as the projection of ``-iA phi`` on ``-i phi``; variance as ``|| -i A_perp phi ||^2``."""
    field = phi.with_values(-1j * A.action(phi))
    phase_dir = phi.with_values(-1j * phi.values)
    mean = real_inner(field, phase_dir)
    perp = field - mean * phase_dir
    variance = l2_norm(perp) ** 2
    aphi = A(phi)
    direct_mean = l2_inner(aphi, phi).real
    direct_var = l2_inner(A(aphi), phi).real - direct_mean**2
    return MeanVariance(mean, variance, direct_mean, direct_var)


def fubini_study_distance(phi: WaveFunction, psi: WaveFunction) -> float:
    """Distance between the rays of two normalised states, in ``[0, pi/2]``.

    Uses ``2 arcsin(|psi - e^{ia} phi| / 2)`` with the optimal phase, which is
    ``arccos|(phi, psi)|`` without the loss of precision near zero distance.
    """
    overlap = l2_inner(psi, phi)
    mag = abs(overlap)
    if mag == 0.0:
        return float(np.pi / 2)
    aligned = (overlap / mag) * phi.values
    chord = np.sqrt(np.sum(np.abs(psi.values - aligned) ** 2) * phi.grid.cell_volume)
    return float(min(2 * np.arcsin(min(chord / 2, 1.0)), np.pi / 2))


def taylor_evolve(phi: WaveFunction, h_op: LinearOperator, tau: float, hbar: float = 1.0,
                  terms: int = 60) -> WaveFunction:
    """``exp(-i h tau / hbar) phi`` by its Taylor series; only for ``|tau| ||h|| / hbar`` of order one."""
    out = phi.values.copy()
    term = phi.values.copy()
    for n in range(1, terms + 1):
        term = (-1j * tau / (hbar * n)) * h_op.action(phi.with_values(term))
        out = out + term
        if np.abs(term).max() < 1e-18 * np.abs(out).max():
            break
    return phi.with_values(out)


@dataclass(frozen=True)
class ProjectiveSpeed:
    speed: float
    finite_difference: float
    full_speed: float
    mean_energy: float


def projective_speed(phi: WaveFunction, h_op: LinearOperator, hbar: float = 1.0,
                     step: float | None = None) -> ProjectiveSpeed:
    """``|| -i h_perp phi || / hbar`` and the rate of change of Fubini-Study distance.

    The distance between ``phi(-tau)`` and ``phi(tau)`` is divided by ``2 tau``
    at two step sizes and Richardson-extrapolated.  The default step keeps
    the Taylor series short: ``tau`` times the largest energy the grid
    resolves is about one half.
    """
    hphi = h_op(phi)
    e = l2_inner(hphi, phi).real
    speed = l2_norm(hphi - e * phi) / hbar
    if step is None:
        probe = phi.with_values(np.random.default_rng(0).standard_normal(phi.grid.shape) + 0j)
        for _ in range(20):
            probe = probe * (1.0 / l2_norm(probe))
            probe = h_op(probe)
        step = 0.5 * hbar / max(l2_norm(probe), 1e-12)

    def chord_rate(tau):
        fwd = taylor_evolve(phi, h_op, tau, hbar)
        bwd = taylor_evolve(phi, h_op, -tau, hbar)
        return fubini_study_distance(bwd, fwd) / (2 * tau)

    r1, r2 = chord_rate(2 * step), chord_rate(step)
    fd = (4 * r2 - r1) / 3
    return ProjectiveSpeed(speed, fd, l2_norm(hphi) / hbar, e)


@dataclass(frozen=True)
class AccelerationSplit:
    phase_tangential: float
    radial: float
    orthogonal_norm: float
    speed_squared: float


def acceleration_decomposition(phi: WaveFunction, h_op: LinearOperator,
                               hbar: float = 1.0) -> AccelerationSplit:
    """Split ``-h^2 phi / hbar^2`` along ``-i phi``, along ``phi``, and the rest."""
    hphi = h_op(phi)
    h2phi = h_op(hphi)
    acc = h2phi * (-1.0 / hbar**2)
    phase_dir = phi.with_values(-1j * phi.values)
    tangential = real_inner(acc, phase_dir)
    radial = real_inner(acc, phi)
    rest = acc - radial * phi - tangential * phase_dir
    return AccelerationSplit(tangential, radial, l2_norm(rest), l2_norm(hphi) ** 2 / hbar**2)
