"""Potential families with analytic gradients.

A potential is evaluated on coordinate tuples ``(x1, ..., xd)`` of any
common shape, so the same object serves grid sampling and point queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

FAMILIES = ("free", "linear", "harmonic", "coupled", "custom")


def _coords(x) -> tuple[np.ndarray, ...]:
    if isinstance(x, tuple):
        return tuple(np.asarray(c, dtype=float) for c in x)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return tuple(arr[..., i] if arr.ndim > 1 else arr[i] for i in range(arr.shape[-1]))


@dataclass(frozen=True)
class PotentialSpec:
    """``V(x, t)``.

    * ``free``: 0
    * ``linear``: ``-F . x``
    * ``harmonic``: ``k/2 |x - c|^2``
    * ``coupled``: ``k/2 (x1 - x2)^2`` (two coordinates)
    * ``custom``: user callables ``func(coords)`` and ``grad(coords)``

    ``schedule`` makes the potential time dependent, either as
    ``s(t) V(x)`` (multiplicative) or ``V(x) + s(t)`` (additive).
    """

    family: str = "free"
    force: tuple = ()
    stiffness: float = 0.0
    center: tuple = ()
    func: Callable | None = None
    grad: Callable | None = None
    schedule: Callable[[float], float] | None = None
    schedule_mode: str = "multiplicative"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.family == "custom" and (self.func is None or self.grad is None):
            raise ValueError("custom potentials need func and grad")
        if self.schedule_mode not in ("multiplicative", "additive"):
            raise ValueError("schedule_mode must be multiplicative or additive")
        object.__setattr__(self, "force", tuple(float(f) for f in np.atleast_1d(self.force)))
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @classmethod
    def free(cls, **kw):
        return cls("free", **kw)

    @classmethod
    def linear(cls, force, **kw):
        return cls("linear", force=force, **kw)

    @classmethod
    def harmonic(cls, stiffness, center=0.0, **kw):
        return cls("harmonic", stiffness=stiffness, center=center, **kw)

    @classmethod
    def coupled(cls, stiffness, **kw):
        return cls("coupled", stiffness=stiffness, **kw)

    @classmethod
    def custom(cls, func, grad, **kw):
        return cls("custom", func=func, grad=grad, **kw)

    @classmethod
    def from_table(cls, grid, values, gradient, tol: float = 1e-4, **kw):
        """Tabulated 1D potential; the gradient table must match the values by finite differences."""
        if grid.dim != 1:
            raise ValueError("tabulated potentials are one dimensional")
        x = grid.axis
        values = np.asarray(values, dtype=float)
        gradient = np.asarray(gradient, dtype=float)
        fd = np.gradient(values, x, edge_order=2)
        scale = max(1.0, np.abs(gradient).max())
        if np.abs(fd - gradient).max() > tol * scale:
            raise ValueError("gradient table inconsistent with value table")

        def func(c):
            return np.interp(c[0], x, values)

        def grad(c):
            return (np.interp(c[0], x, gradient),)

        return cls("custom", func=func, grad=grad, **kw)

    @property
    def time_dependent(self) -> bool:
        return self.schedule is not None

    def _vec(self, values, d):
        v = np.atleast_1d(np.asarray(values, dtype=float))
        if v.size == 0:
            return np.zeros(d)
        return np.broadcast_to(v, (d,))

    def _static_values(self, xs):
        shape = np.broadcast(*xs).shape
        fam = self.family
        if fam == "free":
            return np.zeros(shape)
        if fam == "linear":
            F = self._vec(self.force, len(xs))
            return -sum(f * x for f, x in zip(F, xs))
        if fam == "harmonic":
            c = self._vec(self.center, len(xs))
            return 0.5 * self.stiffness * sum((x - ci) ** 2 for x, ci in zip(xs, c))
        if fam == "coupled":
            return 0.5 * self.stiffness * (xs[0] - xs[1]) ** 2
        return np.asarray(self.func(xs), dtype=float) * np.ones(shape)

    def _static_gradient(self, xs):
        shape = np.broadcast(*xs).shape
        fam = self.family
        if fam == "free":
            return tuple(np.zeros(shape) for _ in xs)
        if fam == "linear":
            F = self._vec(self.force, len(xs))
            return tuple(-f * np.ones(shape) for f in F)
        if fam == "harmonic":
            c = self._vec(self.center, len(xs))
            return tuple(self.stiffness * (x - ci) for x, ci in zip(xs, c))
        if fam == "coupled":
            g = self.stiffness * (xs[0] - xs[1])
            return (g, -g)
        return tuple(np.asarray(g, dtype=float) * np.ones(shape) for g in self.grad(xs))

    def values(self, x, t: float = 0.0) -> np.ndarray:
        xs = _coords(x)
        v = self._static_values(xs)
        if self.schedule is None:
            return v
        s = self.schedule(t)
        return s * v if self.schedule_mode == "multiplicative" else v + s

    def gradient(self, x, t: float = 0.0) -> tuple[np.ndarray, ...]:
        xs = _coords(x)
        g = self._static_gradient(xs)
        if self.schedule is not None and self.schedule_mode == "multiplicative":
            s = self.schedule(t)
            g = tuple(s * gi for gi in g)
        return g

    def force_at(self, point, t: float = 0.0) -> np.ndarray:
        """``-grad V`` at a single point."""
        return -np.array([float(g) for g in self.gradient(tuple(np.atleast_1d(point)), t)])


def gaussian_mean_force(V: PotentialSpec, center, sigma: float, t: float = 0.0,
                        nodes: int = 40) -> np.ndarray:
    """``<-grad V>`` under a normal density of standard deviation ``sigma`` per axis."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    z, w = hermegauss(nodes)
    w = w / w.sum()
    d = center.size
    grids = np.meshgrid(*([z] * d), indexing="ij")
    weights = np.prod(np.meshgrid(*([w] * d), indexing="ij"), axis=0)
    pts = tuple(c + sigma * g for c, g in zip(center, grids))
    grad = V.gradient(pts, t)
    return -np.array([np.sum(weights * g) for g in grad])


def linearization_ratio(V: PotentialSpec, center, sigma: float, t: float = 0.0) -> float:
    """How far the packet-averaged force departs from the force at the centre.

    ``|<F> - F(a)| / (|F(a)| + sigma |V''(a)|)``; zero for potentials that
    are at most quadratic, growing with the third derivative times ``sigma^2``.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    f_mean = gaussian_mean_force(V, center, sigma, t)
    f0 = V.force_at(center, t)
    h = 1e-4 * max(1.0, sigma)
    curv = 0.0
    for i in range(center.size):
        e = np.zeros_like(center)
        e[i] = h
        curv = max(curv, np.abs(V.force_at(center + e, t) - V.force_at(center - e, t)).max() / (2 * h))
    scale = np.linalg.norm(f0) + sigma * curv
    err = np.linalg.norm(f_mean - f0)
    if err == 0.0:
        return 0.0
    return float(err / scale) if scale > 0 else float("inf")


def linear_ramp(rate: float, offset: float = 1.0) -> Callable[[float], float]:
    def schedule(t):
        return offset + rate * t
    return schedule


def sinusoid(amplitude: float, frequency: float, offset: float = 1.0) -> Callable[[float], float]:
    def schedule(t):
        return offset + amplitude * np.sin(frequency * t)
    return schedule
