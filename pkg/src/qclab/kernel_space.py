"""Gaussian-kernel Hilbert space and exact calculus on delta functions.

The kernel ``k(x, y) = exp(-|x - y|^2 / 8 sigma^2)`` makes point evaluations
and their first and second derivatives into finite-norm vectors.  Pairings
between such distributional elements are evaluated in closed form from the
derivative table of the one-dimensional Gaussian; the smoothing map
``rho_sigma`` carries them to ordinary grid functions for cross-checks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    KernelUnderResolvedError,
    NonUniformTimeGridError,
    OutOfBoxError,
    UnsupportedDerivativeError,
)
from .grid import GridSpec, WaveFunction, l2_inner

MAX_ORDER = 2


@dataclass(frozen=True)
class KernelSpace:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def decay(self) -> float:
        """Coefficient ``c`` in ``k = exp(-c r^2)``."""
        return 1.0 / (8 * self.sigma**2)

    def kernel(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return np.exp(-self.decay * np.sum((x - y) ** 2, axis=-1))

    def gram(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return self.kernel(pts[:, None, :], pts[None, :, :])


def gaussian_derivative(order: int, r, c: float):
    """``d^n/dr^n exp(-c r^2)`` for n <= 4 (hand-expanded Hermite forms)."""
    r = np.asarray(r, dtype=float)
    g = np.exp(-c * r**2)
    if order == 0:
        return g
    if order == 1:
        return -2 * c * r * g
    if order == 2:
        return (4 * c**2 * r**2 - 2 * c) * g
    if order == 3:
        return (-8 * c**3 * r**3 + 12 * c**2 * r) * g
    if order == 4:
        return (16 * c**4 * r**4 - 48 * c**3 * r**2 + 12 * c**2) * g
    raise UnsupportedDerivativeError(f"kernel derivative of order {order}")


@dataclass(frozen=True)
class Term:
    point: tuple[float, ...]
    multi_index: tuple[int, ...]
    weight: complex

    @property
    def order(self) -> int:
        return sum(self.multi_index)


@dataclass(frozen=True)
class DistributionalElement:
    """Finite combination ``sum_k w_k d^{alpha_k} delta_{a_k}``."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("element needs at least one term")
        dims = {len(t.point) for t in terms}
        if len(dims) != 1:
            raise ValueError("all terms must share a dimension")
        for t in terms:
            if len(t.multi_index) != len(t.point) or min(t.multi_index) < 0:
                raise ValueError(f"bad multi-index {t.multi_index}")
            if t.order > MAX_ORDER:
                raise UnsupportedDerivativeError(f"derivative order {t.order} > {MAX_ORDER}")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0].point)

    def __add__(self, other: "DistributionalElement") -> "DistributionalElement":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return DistributionalElement(self.terms + other.terms)

    def __mul__(self, scalar) -> "DistributionalElement":
        return DistributionalElement(
            tuple(Term(t.point, t.multi_index, complex(scalar) * t.weight) for t in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "DistributionalElement":
        return -1 * self

    def __sub__(self, other):
        return self + (-other)

    def to_json(self) -> str:
        return json.dumps([
            {"point": list(t.point), "multi_index": list(t.multi_index),
             "weight_re": t.weight.real, "weight_im": t.weight.imag}
            for t in self.terms])

    @classmethod
    def from_json(cls, text: str) -> "DistributionalElement":
        items = json.loads(text)
        return cls(tuple(
            Term(tuple(float(v) for v in it["point"]), tuple(int(v) for v in it["multi_index"]),
                 complex(it["weight_re"], it["weight_im"]))
            for it in items))


def _as_point(a) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(a, dtype=float)))


def delta(a, weight: complex = 1.0, multi_index=None) -> DistributionalElement:
    point = _as_point(a)
    mi = tuple(multi_index) if multi_index is not None else (0,) * len(point)
    return DistributionalElement((Term(point, mi, complex(weight)),))


def unit_index(dim: int, *axes: int) -> tuple[int, ...]:
    mi = [0] * dim
    for ax in axes:
        mi[ax] += 1
    return tuple(mi)


def embed_point(a, K: KernelSpace | None = None) -> DistributionalElement:
    """The point ``a`` as the delta function ``delta_a``.

    Addition and scaling of embedded points act on the parameter, so
    ``embed_point(a) (+) embed_point(b)`` is ``embed_point(a + b)``; see
    :func:`point_of` for the inverse.
    """
    return delta(a)


def point_of(e: DistributionalElement) -> np.ndarray:
    if len(e.terms) != 1 or e.terms[0].order != 0 or e.terms[0].weight != 1:
        raise ValueError("element is not an embedded point")
    return np.array(e.terms[0].point)


def pair_terms(t1: Term, t2: Term, K: KernelSpace) -> complex:
    c = K.decay
    value = (-1.0) ** t1.order
    for a, b, i, j in zip(t1.point, t2.point, t1.multi_index, t2.multi_index):
        value *= float(gaussian_derivative(i + j, a - b, c))
    return value * t1.weight * np.conj(t2.weight)


def delta_h_inner(e1: DistributionalElement, e2: DistributionalElement,
                  K: KernelSpace) -> complex:
    """Closed-form kernel pairing, linear in ``e1`` and antilinear in ``e2``."""
    if e1.dim != e2.dim:
        raise ValueError("dimension mismatch")
    return complex(sum(pair_terms(t1, t2, K) for t1, t2 in product(e1.terms, e2.terms)))


def h_norm(e: DistributionalElement, K: KernelSpace) -> float:
    return float(np.sqrt(delta_h_inner(e, e, K).real))


# -- grid realisation --------------------------------------------------------

def rho_sigma(e: DistributionalElement, K: KernelSpace, grid: GridSpec) -> WaveFunction:
    """Image of ``e`` under Gaussian smoothing: ``delta_a`` becomes the packet centred at ``a``."""
    if e.dim != grid.dim:
        raise ValueError("element and grid dimensions differ")
    c = 1.0 / (4 * K.sigma**2)
    prefactor = (2 * np.pi * K.sigma**2) ** (-grid.dim / 4)
    out = np.zeros(grid.shape, dtype=np.complex128)
    for t in e.terms:
        if not grid.contains(t.point, margin=8 * K.sigma):
            raise OutOfBoxError(f"point {t.point} outside guard band")
        piece = np.full(grid.shape, prefactor * t.weight, dtype=np.complex128)
        for x, a, order in zip(grid.coords, t.point, t.multi_index):
            piece *= gaussian_derivative(order, x - a, c)
        out += piece
    return WaveFunction(grid, out)


def _check_kernel_resolved(K: KernelSpace, grid: GridSpec) -> None:
    if 2 * K.sigma < 3 * grid.spacing:
        raise KernelUnderResolvedError(
            f"kernel width 2 sigma = {2 * K.sigma} below 3 dx = {3 * grid.spacing:.4g}")


def _spectral_filter(grid: GridSpec, profile) -> np.ndarray:
    out = np.ones(grid.shape)
    for k in grid.wavenumbers:
        out = out * profile(k)
    return out


def kernel_convolve(psi: WaveFunction, K: KernelSpace) -> WaveFunction:
    """``(k * psi)(x) = int k(x, y) psi(y) dy`` via the analytic Fourier transform of k."""
    _check_kernel_resolved(K, psi.grid)
    s = K.sigma
    filt = _spectral_filter(psi.grid, lambda k: np.sqrt(8 * np.pi) * s * np.exp(-2 * s**2 * k**2))
    return psi.with_values(np.fft.ifftn(np.fft.fftn(psi.values) * filt))


def apply_rho(phi: WaveFunction, K: KernelSpace) -> WaveFunction:
    """Smoothing of a grid function by the kernel ``(2 pi s^2)^{-d/4} exp(-r^2 / 4 s^2)``."""
    _check_kernel_resolved(K, phi.grid)
    s = K.sigma
    filt = _spectral_filter(
        phi.grid,
        lambda k: (2 * np.pi * s**2) ** -0.25 * np.sqrt(4 * np.pi) * s * np.exp(-s**2 * k**2))
    return phi.with_values(np.fft.ifftn(np.fft.fftn(phi.values) * filt))


def h_inner_grid(phi: WaveFunction, psi: WaveFunction, K: KernelSpace) -> complex:
    """Double integral ``int int k(x, y) phi(x) conj(psi(y))`` on the grid."""
    return l2_inner(phi, kernel_convolve(psi, K))


# -- paths of embedded points ---------------------------------------------------

@dataclass(frozen=True)
class PathProjections:
    """Projections of the velocity and acceleration of ``delta_{a(t)}``.

    Components are taken on the unit vectors ``-2 sigma d_i delta_a``, so they
    are the Euclidean rates expressed in units of ``2 sigma``.
    """

    times: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    h_speed: np.ndarray
    euclidean_speed: np.ndarray


def uniform_step(times) -> float:
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise NonUniformTimeGridError("time samples must be uniformly spaced")
    return float(steps[0])


def path_derivatives(path, times) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dt = uniform_step(times)
    a = np.asarray(path, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    vel = np.gradient(a, dt, axis=0, edge_order=2)
    acc = np.gradient(vel, dt, axis=0, edge_order=2)
    return a, vel, acc


def velocity_element(a, vel) -> DistributionalElement:
    d = len(a)
    return DistributionalElement(tuple(
        Term(_as_point(a), unit_index(d, i), complex(-vel[i])) for i in range(d)))


def acceleration_element(a, vel, acc) -> DistributionalElement:
    d = len(a)
    point = _as_point(a)
    terms = [Term(point, unit_index(d, i, j), complex(vel[i] * vel[j]))
             for i in range(d) for j in range(d)]
    terms += [Term(point, unit_index(d, i), complex(-acc[i])) for i in range(d)]
    return DistributionalElement(tuple(terms))


def delta_path_projections(path, times, K: KernelSpace) -> PathProjections:
    a, vel, acc = path_derivatives(path, times)
    d = a.shape[1]
    v_proj = np.empty_like(a)
    a_proj = np.empty_like(a)
    h_speed = np.empty(len(a))
    scale = 2 * K.sigma
    for n in range(len(a)):
        dphi = velocity_element(a[n], vel[n])
        ddphi = acceleration_element(a[n], vel[n], acc[n])
        for i in range(d):
            e_i = delta(a[n], weight=-scale, multi_index=unit_index(d, i))
            v_proj[n, i] = delta_h_inner(dphi, e_i, K).real
            a_proj[n, i] = delta_h_inner(ddphi, e_i, K).real
        h_speed[n] = h_norm(dphi, K)
    return PathProjections(np.asarray(times, dtype=float), v_proj, a_proj, h_speed,
                           np.linalg.norm(vel, axis=1) / scale)


def rho_path_speed(path, times, K: KernelSpace, grid: GridSpec) -> np.ndarray:
    """L2 speed of the smoothed path ``rho_sigma(delta_{a(t)})``, sampled on ``grid``."""
    a, vel, _ = path_derivatives(path, times)
    speeds = np.empty(len(a))
    for n in range(len(a)):
        w = rho_sigma(velocity_element(a[n], vel[n]), K, grid)
        speeds[n] = np.sqrt(l2_inner(w, w).real)
    return speeds
