"""Branching-coalescing particle sets driven by an arrow configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import BOTH, LEFT, RIGHT, BoundaryError
from .lattice import ArrowConfig
from ._tags import claim

__all__ = [
    "ParticleSet",
    "HalfStepEdges",
    "evolve",
    "evolve_final",
    "bernoulli_intensity",
    "bernoulli_slice",
    "half_step_statistics",
    "backbone_slice",
    "single_source_slice",
]


@dataclass(frozen=True)
class ParticleSet:
    time: int
    occupied: np.ndarray = field(repr=False)

    def __post_init__(self):
        occ = np.asarray(self.occupied, dtype=np.int64)
        object.__setattr__(self, "occupied", occ)
        if occ.size:
            if np.any(np.diff(occ) <= 0):
                raise ValueError("occupied sites must be strictly increasing")
            if np.any((occ + self.time) % 2):
                raise ValueError(f"occupied sites must have the parity of time {self.time}")

    @classmethod
    def from_iterable(cls, time: int, xs) -> "ParticleSet":
        return cls(time, np.unique(np.asarray(list(xs), dtype=np.int64)))

    def __len__(self):
        return int(self.occupied.size)

    def __contains__(self, x):
        i = np.searchsorted(self.occupied, x)
        return bool(i < self.occupied.size and self.occupied[i] == x)

    def issubset(self, other: "ParticleSet") -> bool:
        return self.time == other.time and bool(np.all(np.isin(self.occupied, other.occupied)))

    def restrict(self, lo: int, hi: int) -> "ParticleSet":
        occ = self.occupied
        return ParticleSet(self.time, occ[(occ >= lo) & (occ <= hi)])


@dataclass(frozen=True)
class HalfStepEdges:
    """Arrows used between time ``time - 1/2`` and ``time + 1/2``.

    ``lower[i]`` is the occupied site at the integer time below, ``upper[i]``
    the site reached one step later.
    """

    time: float
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    def lower_set(self) -> np.ndarray:
        return np.unique(self.lower)

    def upper_set(self) -> np.ndarray:
        return np.unique(self.upper)

    def pairs(self) -> set[frozenset]:
        return {frozenset((int(a), int(b))) for a, b in zip(self.lower, self.upper)}

    def __len__(self):
        return int(self.lower.size)


def _check_inside(config: ArrowConfig, xs: np.ndarray):
    w = config.window
    if xs.size and (xs[0] <= w.x_min or xs[-1] >= w.x_max):
        raise BoundaryError(f"particles reached the x-boundary ({w.x_min}, {w.x_max})")


@claim("particle-dynamics")
def evolve(config: ArrowConfig, initial: ParticleSet, t_end: int, impl=None):
    """Exact trajectory from ``initial`` up to ``t_end``.

    Returns a list of (ParticleSet, HalfStepEdges) pairs: the k-th entry holds
    the set at time initial.time + k and the edges leaving it (empty for the
    final entry).
    """
    w = config.window
    if initial.time < w.t_min:
        raise ValueError("initial time lies below the window")
    if t_end > w.t_max or t_end < initial.time:
        raise ValueError("t_end must lie in [initial.time, t_max]")
    _check_inside(config, initial.occupied)
    out = []
    cur = initial.occupied
    for t in range(initial.time, t_end):
        new, lo, hi = _kernels.step_with_edges(config.seed, config.beta, cur, t, impl=impl)
        out.append((ParticleSet(t, cur), HalfStepEdges(t + 0.5, lo, hi)))
        _check_inside(config, new)
        cur = new
    empty = np.empty(0, dtype=np.int64)
    out.append((ParticleSet(t_end, cur), HalfStepEdges(t_end + 0.5, empty, empty)))
    return out


def evolve_final(config: ArrowConfig, initial: ParticleSet, t_end: int,
                 keep: tuple[int, int] | None = None, impl=None) -> ParticleSet:
    """Only the final set; with ``keep`` the result is restricted to that
    interval, and particles outside its backward light cone are dropped early."""
    w = config.window
    if t_end > w.t_max or t_end < initial.time or initial.time < w.t_min:
        raise ValueError("evolution times must lie inside the window")
    _check_inside(config, initial.occupied)
    lo, hi = keep if keep is not None else (w.x_min - (t_end - initial.time) - 1, w.x_max + (t_end - initial.time) + 1)
    out = _kernels.evolve_pruned(config.seed, config.beta, initial.occupied, initial.time,
                                 t_end - initial.time, w.x_min, w.x_max, lo, hi, impl=impl)
    return ParticleSet(t_end, out)


@claim("invariant-intensity")
def bernoulli_intensity(beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    return 4.0 * beta / (1.0 + beta) ** 2


def bernoulli_slice(rng: np.random.Generator, rho: float, x_lo: int, x_hi: int, t: int) -> ParticleSet:
    """Independent occupation with probability rho of each site in [x_lo, x_hi] of parity t."""
    first = x_lo if (x_lo + t) % 2 == 0 else x_lo + 1
    sites = np.arange(first, x_hi + 1, 2, dtype=np.int64)
    return ParticleSet(t, sites[rng.random(sites.size) < rho])


@claim("half-step-product")
def half_step_statistics(config: ArrowConfig, trajectory, x_lo: int | None = None,
                         x_hi: int | None = None, step: int = 0) -> dict:
    """Per-site frequencies of the outgoing edges at slice ``step`` of a trajectory.

    Sites counted are all sites of the right parity in [x_lo, x_hi] (default:
    the occupied range). Returns the counts and frequencies of the left edge
    {x, x-1}, the right edge {x, x+1}, and both.
    """
    pset, edges = trajectory[step]
    occ = pset.occupied
    if x_lo is None:
        x_lo = int(occ[0]) if occ.size else 0
    if x_hi is None:
        x_hi = int(occ[-1]) if occ.size else 0
    t = pset.time
    first = x_lo if (x_lo + t) % 2 == 0 else x_lo + 1
    sites = np.arange(first, x_hi + 1, 2, dtype=np.int64)
    left = set(edges.lower[edges.upper == edges.lower - 1].tolist())
    right = set(edges.lower[edges.upper == edges.lower + 1].tolist())
    has_l = np.fromiter((x in left for x in sites.tolist()), dtype=bool, count=sites.size)
    has_r = np.fromiter((x in right for x in sites.tolist()), dtype=bool, count=sites.size)
    n = sites.size
    out = {
        "n_sites": n,
        "n_left": int(has_l.sum()),
        "n_right": int(has_r.sum()),
        "n_both": int((has_l & has_r).sum()),
        "n_occupied": int(np.isin(sites, occ).sum()),
    }
    for k in ("left", "right", "both", "occupied"):
        out[f"p_{k}"] = out[f"n_{k}"] / n if n else float("nan")
    del config
    return out


@claim("backbone-bernoulli-slice")
def backbone_slice(config: ArrowConfig, burn_in: int, x_lo: int | None = None,
                   x_hi: int | None = None, impl=None) -> ParticleSet:
    """Sites at the top of the window reached from the full slice ``burn_in``
    steps below, restricted to [x_lo, x_hi] (default: a central interval
    leaving room for the light cone)."""
    w = config.window
    t_top = w.t_max
    t_bot = t_top - int(burn_in)
    if burn_in <= 0 or t_bot < w.t_min:
        raise ValueError("burn_in must be positive and fit inside the window")
    if x_lo is None or x_hi is None:
        x_lo = w.x_min + burn_in + 1
        x_hi = w.x_max - burn_in - 1
    lo = x_lo - burn_in
    hi = x_hi + burn_in
    if lo <= w.x_min or hi >= w.x_max:
        raise BoundaryError("backbone cone does not fit inside the window")
    first = lo if (lo + t_bot) % 2 == 0 else lo + 1
    start = ParticleSet(t_bot, np.arange(first, hi + 1, 2, dtype=np.int64))
    return evolve_final(config, start, t_top, keep=(x_lo, x_hi), impl=impl)


@claim("backbone-cone")
def single_source_slice(config: ArrowConfig, source: tuple[int, int], x_lo: int, x_hi: int,
                        impl=None) -> ParticleSet:
    """Sites in [x_lo, x_hi] at the top of the window reached from one site."""
    x, t = source
    return evolve_final(config, ParticleSet(t, np.array([x])), config.window.t_max,
                        keep=(x_lo, x_hi), impl=impl)


# state constants re-exported for callers that inspect raw fields
SITE_LEFT, SITE_RIGHT, SITE_BOTH = LEFT, RIGHT, BOTH
