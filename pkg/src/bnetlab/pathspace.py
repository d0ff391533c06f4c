"""Compactified space-time: the Theta map, point and path metrics, Hausdorff
distance on finite path sets, and the diffusive scaling map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import LatticePath
from ._tags import claim

__all__ = [
    "STAR",
    "CompactPoint",
    "SampledPath",
    "theta_map",
    "point_dist",
    "path_dist",
    "hausdorff_dist",
    "rescale_path",
]


class _Star:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "STAR"


STAR = _Star()


@dataclass(frozen=True)
class CompactPoint:
    x: object
    t: float

    def __post_init__(self):
        pole = math.isinf(self.t)
        if pole != (self.x is STAR):
            raise ValueError("x must be STAR exactly when t is infinite")
        if not pole and math.isnan(float(self.x)):
            raise ValueError("x must not be NaN")


def _theta1(x, t):
    return np.tanh(x) / (1.0 + np.abs(t))


@claim("compactification")
def theta_map(p: CompactPoint) -> tuple[float, float]:
    if p.x is STAR:
        return 0.0, math.copysign(1.0, p.t)
    return float(_theta1(float(p.x), p.t)), math.tanh(p.t)


@claim("point-metric")
def point_dist(p1: CompactPoint, p2: CompactPoint) -> float:
    u1, v1 = theta_map(p1)
    u2, v2 = theta_map(p2)
    return max(abs(u1 - u2), abs(v1 - v2))


@dataclass(frozen=True)
class SampledPath:
    """Path started at ``sigma`` with ``values[k]`` at time sigma + k * step."""

    sigma: float
    step: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        if not math.isfinite(self.sigma):
            raise ValueError("sampled paths need a finite starting time")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")

    @property
    def horizon(self) -> float:
        return self.sigma + self.step * (self.values.size - 1)

    @property
    def times(self) -> np.ndarray:
        return self.sigma + self.step * np.arange(self.values.size)

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


def _common_grid(p1: SampledPath, p2: SampledPath):
    if not math.isclose(p1.step, p2.step, rel_tol=1e-12):
        raise ValueError("paths sampled with different steps")
    h = p1.step
    if not math.isclose(p1.horizon, p2.horizon, rel_tol=1e-12, abs_tol=1e-12 * h):
        raise ValueError("paths must share a horizon")
    off = (p1.sigma - p2.sigma) / h
    if abs(off - round(off)) > 1e-9:
        raise ValueError("starting times are not aligned with the grid")
    return h, int(round(off))


@claim("path-metric")
def path_dist(p1: SampledPath, p2: SampledPath) -> float:
    """Path distance, with the supremum taken over all times.

    Before its own start a path is frozen at its initial value. On the
    common grid the sup is taken pointwise; below the earlier start both
    paths are constant, so that stretch reduces to one closed-form term.
    Restricting the sup to times after the earlier start breaks the
    triangle inequality.
    """
    _common_grid(p1, p2)
    n = max(p1.values.size, p2.values.size)
    base = p1 if p1.values.size >= p2.values.size else p2
    t = base.times
    v1 = np.concatenate([np.full(n - p1.values.size, p1.values[0]), p1.values])
    v2 = np.concatenate([np.full(n - p2.values.size, p2.values[0]), p2.values])
    d_start = abs(math.tanh(p1.sigma) - math.tanh(p2.sigma))
    d_path = float(np.max(np.abs(_theta1(v1, t) - _theta1(v2, t))))
    # 1 / (1 + |t|) on (-inf, m] peaks at t = min(0, m)
    m = min(p1.sigma, p2.sigma)
    d_pre = abs(math.tanh(p1.values[0]) - math.tanh(p2.values[0])) / (1.0 + max(0.0, -m))
    return max(d_start, d_path, d_pre)


@claim("hausdorff-metric")
def hausdorff_dist(K1: Sequence[SampledPath], K2: Sequence[SampledPath]) -> float:
    if len(K1) == 0 or len(K2) == 0:
        raise ValueError("path sets must be nonempty")
    D = np.array([[path_dist(a, b) for b in K2] for a in K1])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@claim("diffusive-scaling")
def rescale_path(p, eps: float, step: float | None = None) -> SampledPath:
    """Apply (x, t) -> (eps x, eps^2 t).

    A lattice path becomes a sampled path on a grid of step eps^2 (or the
    given multiple of it); dual lattice paths are mapped in reversed time,
    so they start at -eps^2 t0. Sampled paths are rescaled in place of their
    grid.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if isinstance(p, SampledPath):
        return SampledPath(eps**2 * p.sigma, eps**2 * p.step, eps * p.values)
    if not isinstance(p, LatticePath):
        raise TypeError("expected a LatticePath or SampledPath")
    pos = p.positions.astype(float)
    t0 = -p.t0 if p.dual else p.t0
    path = SampledPath(eps**2 * t0, eps**2, eps * pos)
    if step is None:
        return path
    ratio = step / eps**2
    if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
        raise ValueError("resampling step must be an integer multiple of eps^2")
    r = int(round(ratio))
    return SampledPath(path.sigma, step, path.values[::r])
