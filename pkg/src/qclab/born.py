"""Born rule on embedded points and its agreement with the normal law.

Two embedded classical points ``a`` and ``b`` have overlap
``exp(-|a - b|^2 / 8 sigma^2)``, so the transition probability is
``exp(-|a - b|^2 / 4 sigma^2)``: a normal law in the separation, and also
``cos^2`` of their Fubini-Study distance.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import multivariate_normal

from .coherent import CoherentParams
from .errors import ProbeUnderResolvedError, UnderflowGuardError
from .grid import GridSpec, WaveFunction, coherent_values, l2_inner, sample_coherent
from .observables import fubini_study_distance

MAX_SEPARATION_SIGMAS = 6.0


def born_density(params: CoherentParams, b) -> float:
    """``|phi_a(b)|^2`` for the packet of ``params``: the normal density with mean ``a``."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = params.dim
    r2 = float(np.sum((b - params.center) ** 2))
    return float((2 * np.pi * params.sigma**2) ** (-d / 2) * np.exp(-r2 / (2 * params.sigma**2)))


def normal_pdf(params: CoherentParams, b) -> float:
    """Independent reference: scipy's multivariate normal with covariance ``sigma^2 I``."""
    return float(multivariate_normal(mean=params.center,
                                     cov=params.sigma**2 * np.eye(params.dim)).pdf(b))


def transition_probability(phi: WaveFunction, psi: WaveFunction) -> float:
    return float(min(abs(l2_inner(phi, psi)) ** 2, 1.0))


def isotropic_probability_law(rho: float) -> float:
    """``cos^2`` of the ray distance; the law fixed on embedded points, extended by isotropy."""
    if not 0.0 <= rho <= np.pi / 2 + 1e-15:
        raise ValueError("distance must lie in [0, pi/2]")
    return float(np.cos(rho) ** 2)


def embedded_state(a, sigma: float, grid: GridSpec) -> WaveFunction:
    """``delta~_a``: the packet of width ``sigma`` at rest at ``a``, L2-normalised."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return sample_coherent(CoherentParams(a, np.zeros_like(a), sigma), grid)


def _guard(a, b, sigma: float) -> float:
    sep = float(np.linalg.norm(np.atleast_1d(a) - np.atleast_1d(b)))
    if sep > MAX_SEPARATION_SIGMAS * sigma:
        raise UnderflowGuardError(
            f"separation {sep:.3g} exceeds {MAX_SEPARATION_SIGMAS} sigma; overlap below grid precision")
    return sep


@dataclass(frozen=True)
class Equivalence:
    separation: float
    normal_side: float
    born_side: float
    distance: float

    @property
    def residual(self) -> float:
        return abs(self.normal_side - self.born_side)


def born_normal_equivalence(a, b, sigma: float, grid: GridSpec) -> Equivalence:
    """``exp(-|a-b|^2/4 sigma^2)`` against ``cos^2`` of the grid Fubini-Study distance."""
    sep = _guard(a, b, sigma)
    phi = embedded_state(a, sigma, grid)
    psi = embedded_state(b, sigma, grid)
    rho = fubini_study_distance(phi, psi)
    return Equivalence(sep, float(np.exp(-sep**2 / (4 * sigma**2))),
                       isotropic_probability_law(rho), rho)


def equivalence_sweep(sigma: float, grid: GridSpec, count: int = 50, center=None,
                      max_sigmas: float = MAX_SEPARATION_SIGMAS) -> list[Equivalence]:
    """Separations spaced evenly on ``[0, max_sigmas * sigma]``, placed symmetrically about ``center``."""
    c = np.zeros(grid.dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    e = np.zeros(grid.dim)
    e[0] = 1.0
    out = []
    for s in np.linspace(0.0, max_sigmas * sigma, count):
        out.append(born_normal_equivalence(c - 0.5 * s * e, c + 0.5 * s * e, sigma, grid))
    return out


def write_sweep_csv(sweep: list[Equivalence], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["separation", "lhs", "rhs", "residual"])
        for row in sweep:
            w.writerow([repr(row.separation), repr(row.normal_side), repr(row.born_side),
                        repr(row.residual)])


def separation_for_distance(target: float, sigma: float, grid: GridSpec, tol: float = 1e-3,
                            center=None) -> tuple[float, float]:
    """Separation whose embedded pair sits at ray distance ``target`` on the grid.

    Returns ``(separation, achieved_distance)``; the root is bracketed on
    ``[0, 6 sigma]`` and refined on the grid distance itself.
    """
    if not 0.0 <= target < np.pi / 2:
        raise ValueError("target distance must lie in [0, pi/2)")
    c = np.zeros(grid.dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    e = np.zeros(grid.dim)
    e[0] = 1.0

    def dist(s):
        return born_normal_equivalence(c - 0.5 * s * e, c + 0.5 * s * e, sigma, grid).distance

    hi = MAX_SEPARATION_SIGMAS * sigma
    if target == 0.0:
        return 0.0, dist(0.0)
    if dist(hi) < target:
        raise UnderflowGuardError("target distance not reachable within the guarded separation")
    s = brentq(lambda s: dist(s) - target, 0.0, hi, xtol=1e-12 * sigma)
    achieved = dist(s)
    if abs(achieved - target) > tol:
        raise UnderflowGuardError(f"grid distance {achieved:.6g} misses target {target:.6g}")
    return float(s), achieved


def _cell_probe(grid: GridSpec, center, side: float) -> np.ndarray:
    """Indicator of the cube of edge ``side`` at ``center``, with fractional cell weights."""
    h = grid.spacing
    x = grid.axis
    weights = [np.clip(np.minimum(x + h / 2, c + side / 2) - np.maximum(x - h / 2, c - side / 2),
                       0.0, h) / h
               for c in np.atleast_1d(center)]
    out = weights[0]
    for w in weights[1:]:
        out = np.multiply.outer(out, w)
    return out


@dataclass(frozen=True)
class SharpLimit:
    probe: str
    probe_widths: np.ndarray
    ratios: np.ndarray
    errors: np.ndarray
    deviations: np.ndarray
    orders: np.ndarray
    analytic_limit: float
    flagged: tuple

    @property
    def observed_order(self) -> float:
        return float(self.orders[-1]) if self.orders.size else float("nan")


def sharp_state_limit(params: CoherentParams, b, probe_widths, grid: GridSpec,
                      probe: str = "gaussian") -> SharpLimit:
    """Overlap of the packet with ever sharper probes at ``b`` against ``f(b) dx^d``.

    The probe peak ``h`` fixes the cell size through ``h^2 dx^d = 1``.

    ``probe="gaussian"`` uses the normalised packet of width ``s`` at ``b``.
    At ``b = a`` its ratio is ``(2 / (1 + (s/sigma)^2))^d``, so it converges
    at second order but to ``2^d``: a Gaussian of peak ``h`` and unit norm
    has integral ``2^{d/2}`` times that of the cube with the same peak and norm.
    ``probe="cell"`` uses that cube (edge ``s``, height ``s^{-d/2}``), whose
    ratio tends to one at second order in ``s / sigma``.

    ``errors`` are distances from ``analytic_limit``; ``deviations`` are
    distances from one.

    Widths equal to the packet width are reported in ``flagged``: the sharp
    approximation does not apply there.
    """
    widths = np.asarray(probe_widths, dtype=float)
    if np.any(np.diff(widths) >= 0):
        raise ValueError("probe widths must decrease")
    if probe not in ("gaussian", "cell"):
        raise ValueError("probe must be 'gaussian' or 'cell'")
    min_width = 3 * grid.spacing
    if widths.min() < min_width:
        raise ProbeUnderResolvedError(
            f"probe width {widths.min():.3g} below three grid spacings ({min_width:.3g})")
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = params.dim
    phi = sample_coherent(params, grid)
    f_b = born_density(params, b)
    ratios = []
    for s in widths:
        if probe == "gaussian":
            vals = coherent_values(grid, b, np.zeros(d), s)
            peak = (2 * np.pi * s**2) ** (-d / 4)
        else:
            peak = s ** (-d / 2)
            vals = peak * _cell_probe(grid, b, s)
        psi = WaveFunction(grid, vals)
        cell = peak ** (-2.0 / d)
        ratios.append(abs(l2_inner(phi, psi)) ** 2 / (f_b * cell**d))
    ratios = np.array(ratios)
    limit = 2.0**d if probe == "gaussian" else 1.0
    errors = np.abs(ratios - limit)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(errors[:-1] / errors[1:]) / np.log(widths[:-1] / widths[1:])
    flagged = tuple(float(s) for s in widths if np.isclose(s, params.sigma))
    return SharpLimit(probe, widths, ratios, errors, np.abs(ratios - 1.0), orders, limit, flagged)
