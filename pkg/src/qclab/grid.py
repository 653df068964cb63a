"""Uniform periodic grids and sampled wavefunctions.

States live on a box ``[-L/2, L/2)^d`` with ``n`` points per axis; all
derivatives are spectral.  ``WaveFunction`` values are read-only, so every
operation returns a new state.
"""
from __future__ import annotations

import logging
import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    AliasingWarning,
    GridMismatchError,
    GridSpecError,
    PacketNearBoundaryError,
    PacketTooNarrowError,
)

logger = logging.getLogger(__name__)

DEFAULT_POINT_CAP = 2**22
NORMALIZED_TOL = 1e-12
RENORM_TOL = 1e-10

# Lengths in units of the packet diameter 2*sigma, i.e. sigma = 1/2.
UNIT_PRESETS = {
    "natural": {"hbar": 1.0, "mass": 1.0},
    "diameter": {"hbar": 1.0, "mass": 1.0, "sigma": 0.5},
}


@dataclass(frozen=True)
class GridSpec:
    dim: int
    points_per_axis: int
    box_length: float
    max_points: int = DEFAULT_POINT_CAP

    def __post_init__(self):
        n = self.points_per_axis
        if self.dim not in (1, 2):
            raise GridSpecError(f"dim must be 1 or 2, got {self.dim}")
        if n < 64 or n & (n - 1):
            raise GridSpecError(f"points_per_axis must be a power of two >= 64, got {n}")
        if not self.box_length > 0:
            raise GridSpecError("box_length must be positive")
        if n**self.dim > self.max_points:
            raise GridSpecError(f"{n}^{self.dim} points exceeds cap {self.max_points}")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def half_length(self) -> float:
        return 0.5 * self.box_length

    @cached_property
    def axis(self) -> np.ndarray:
        n = self.points_per_axis
        return -self.half_length + self.spacing * np.arange(n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays, one per axis, broadcast to ``shape``."""
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def wavenumber_axis(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.wavenumber_axis] * self.dim), indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavenumbers)

    def contains(self, point, margin: float = 0.0) -> bool:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return bool(np.all(np.abs(point) + margin <= self.half_length))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "points_per_axis": self.points_per_axis,
                "box_length": self.box_length}


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.complex128, copy=True)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: GridSpec
    values: np.ndarray
    normalized: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = _freeze(self.values)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", vals)
        if self.normalized:
            drift = abs(l2_norm(self) - 1.0)
            if drift > NORMALIZED_TOL:
                raise ValueError(f"state flagged normalized but |norm-1| = {drift:.3e}")

    def with_values(self, values, normalized: bool = False) -> "WaveFunction":
        return WaveFunction(self.grid, values, normalized=normalized)

    def norm(self) -> float:
        return l2_norm(self)

    def normalize(self) -> "WaveFunction":
        return self.with_values(self.values / self.norm(), normalized=True)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def boundary_mass(self, shell: float = 0.05) -> float:
        """Probability in the outer ``shell`` fraction of the box, every axis."""
        n = self.grid.points_per_axis
        width = max(1, int(round(shell * n)))
        rho = self.density()
        outer = np.ones(rho.shape, dtype=bool)
        outer[(slice(width, n - width),) * self.grid.dim] = False
        return float(rho[outer].sum() * self.grid.cell_volume)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "WaveFunction") -> "WaveFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "WaveFunction":
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "WaveFunction":
        return self.with_values(-self.values)


def _check_same_grid(phi: WaveFunction, psi: WaveFunction) -> None:
    if phi.grid != psi.grid:
        raise GridMismatchError(f"grids differ: {phi.grid} vs {psi.grid}")


def l2_inner(phi: WaveFunction, psi: WaveFunction) -> complex:
    """Riemann sum of ``phi * conj(psi)``; linear in the first slot."""
    _check_same_grid(phi, psi)
    return complex(np.vdot(psi.values, phi.values) * phi.grid.cell_volume)


def real_inner(phi: WaveFunction, psi: WaveFunction) -> float:
    """Riemannian metric on the realified space: ``Re (phi, psi)``."""
    return l2_inner(phi, psi).real


def l2_norm(phi: WaveFunction) -> float:
    return float(np.sqrt(np.sum(np.abs(phi.values) ** 2) * phi.grid.cell_volume))


def spectral_inner(phi: WaveFunction, psi: WaveFunction) -> complex:
    """Inner product evaluated from the discrete Fourier coefficients."""
    _check_same_grid(phi, psi)
    grid = phi.grid
    a = np.fft.fftn(phi.values)
    b = np.fft.fftn(psi.values)
    return complex(np.vdot(b, a) * grid.cell_volume / a.size)


def spectral_tail(values: np.ndarray, fraction: float = 0.1) -> float:
    """Largest Fourier magnitude in the outer ``fraction`` of the band, relative to the peak."""
    spec = np.abs(np.fft.fftn(values))
    peak = spec.max()
    if peak == 0.0:
        return 0.0
    n = values.shape[0]
    kidx = np.abs(np.fft.fftfreq(n) * n)
    cutoff = (0.5 - 0.5 * fraction) * n
    masks = np.meshgrid(*([kidx >= cutoff] * values.ndim), indexing="ij")
    outer = np.logical_or.reduce(masks)
    return float(spec[outer].max() / peak)


def spectral_derivative(phi: WaveFunction, axis: int = 0, order: int = 1,
                        check_band: bool = True) -> WaveFunction:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if check_band:
        tail = spectral_tail(phi.values)
        if tail > 1e-10:
            warnings.warn(f"state not band-limited (spectral tail {tail:.1e}); "
                          "derivative may alias", AliasingWarning, stacklevel=2)
    k = phi.grid.wavenumbers[axis]
    out = np.fft.ifftn((1j * k) ** order * np.fft.fftn(phi.values))
    return phi.with_values(out)


def laplacian(phi: WaveFunction) -> WaveFunction:
    out = np.fft.ifftn(-phi.grid.k_squared * np.fft.fftn(phi.values))
    return phi.with_values(out)


def position_expectation(phi: WaveFunction) -> np.ndarray:
    rho = phi.density()
    total = rho.sum()
    return np.array([(x * rho).sum() / total for x in phi.grid.coords])


def position_variance(phi: WaveFunction) -> np.ndarray:
    """Per-axis variance of ``|phi|^2``."""
    rho = phi.density()
    total = rho.sum()
    mean = position_expectation(phi)
    return np.array([((x - m) ** 2 * rho).sum() / total
                     for x, m in zip(phi.grid.coords, mean)])


def measured_width(phi: WaveFunction) -> float:
    """RMS width per axis, averaged over axes."""
    return float(np.sqrt(position_variance(phi).mean()))


def momentum_expectation(phi: WaveFunction, hbar: float = 1.0) -> np.ndarray:
    spec = np.abs(np.fft.fftn(phi.values)) ** 2
    total = spec.sum()
    return np.array([hbar * (k * spec).sum() / total for k in phi.grid.wavenumbers])


def momentum_variance(phi: WaveFunction, hbar: float = 1.0) -> np.ndarray:
    spec = np.abs(np.fft.fftn(phi.values)) ** 2
    total = spec.sum()
    mean = momentum_expectation(phi, hbar)
    return np.array([((hbar * k - m) ** 2 * spec).sum() / total
                     for k, m in zip(phi.grid.wavenumbers, mean)])


def coherent_values(grid: GridSpec, center, momentum, sigma: float,
                    hbar: float = 1.0, global_phase: float = 0.0) -> np.ndarray:
    """Unnormalised analytic samples of the coherent packet."""
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    momentum = np.broadcast_to(np.asarray(momentum, dtype=float), (grid.dim,))
    exponent = np.zeros(grid.shape, dtype=np.complex128)
    for x, a, p in zip(grid.coords, center, momentum):
        exponent += -((x - a) ** 2) / (4 * sigma**2) + 1j * p * (x - a) / hbar
    prefactor = (2 * np.pi * sigma**2) ** (-grid.dim / 4)
    return prefactor * np.exp(exponent + 1j * global_phase)


def check_packet(grid: GridSpec, center, sigma: float) -> None:
    if sigma < 3 * grid.spacing:
        raise PacketTooNarrowError(f"sigma={sigma} < 3*dx={3 * grid.spacing:.4g}")
    if not grid.contains(center, margin=10 * sigma):
        raise PacketNearBoundaryError(
            f"center {np.asarray(center)} closer than 10 sigma to the boundary")


def sample_coherent(params, grid: GridSpec, hbar: float = 1.0) -> WaveFunction:
    """Grid samples of the Gaussian packet described by ``params``.

    ``params`` needs ``center``, ``momentum``, ``sigma`` and optionally
    ``global_phase`` attributes.
    """
    check_packet(grid, params.center, params.sigma)
    vals = coherent_values(grid, params.center, params.momentum, params.sigma, hbar,
                           getattr(params, "global_phase", 0.0))
    norm = np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume)
    if abs(norm - 1.0) > RENORM_TOL:
        raise PacketTooNarrowError(f"sampled packet norm drift {abs(norm - 1):.2e}")
    return WaveFunction(grid, vals / norm, normalized=True)


def renormalize_if_drifted(phi: WaveFunction, tol: float = RENORM_TOL) -> WaveFunction:
    norm = l2_norm(phi)
    if abs(norm - 1.0) > tol:
        logger.info("renormalizing state: |norm - 1| = %.3e", abs(norm - 1.0))
        return phi.with_values(phi.values / norm, normalized=True)
    return phi


# -- serialization ---------------------------------------------------------

_HEADER = struct.Struct("<qqd")


def to_bytes(phi: WaveFunction) -> bytes:
    grid = phi.grid
    header = _HEADER.pack(grid.dim, grid.points_per_axis, grid.box_length)
    payload = np.empty(phi.values.size * 2, dtype="<f8")
    flat = phi.values.ravel(order="C")
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    return header + payload.tobytes()


def from_bytes(blob: bytes) -> WaveFunction:
    dim, n, length = _HEADER.unpack_from(blob)
    grid = GridSpec(int(dim), int(n), float(length))
    payload = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    if payload.size != 2 * n**dim:
        raise ValueError(f"payload has {payload.size} doubles, expected {2 * n**dim}")
    values = (payload[0::2] + 1j * payload[1::2]).reshape(grid.shape)
    return WaveFunction(grid, values)


def write_binary(phi: WaveFunction, path) -> None:
    Path(path).write_bytes(to_bytes(phi))


def read_binary(path) -> WaveFunction:
    return from_bytes(Path(path).read_bytes())


def write_csv(phi: WaveFunction, path) -> None:
    """Long-format CSV: one row per grid point with coordinates, re, im, |phi|^2."""
    grid = phi.grid
    cols = [x.ravel() for x in grid.coords]
    vals = phi.values.ravel()
    data = np.column_stack(cols + [vals.real, vals.imag, np.abs(vals) ** 2])
    names = [f"x{i + 1}" for i in range(grid.dim)] if grid.dim > 1 else ["x"]
    header = ",".join(names + ["re", "im", "density"])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
