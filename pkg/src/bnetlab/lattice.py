"""Arrow configurations on the even space-time lattice, their duals and paths.

A site (x, t) is valid when x + t is even. Each valid site carries one of three
states: an arrow to (x - 1, t + 1), an arrow to (x + 1, t + 1), or both. The
state is a pure function of (seed, x, t), so configurations never need to be
stored; ``ArrowConfig.states`` materialises a dense block only on request.

Dual arrows live on odd sites and point down: the dual arrow from (x, t + 1)
to (x +- 1, t) exists iff the forward arrow from (x, t) to (x -+ 1, t + 1)
exists.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from ._kernels import BOTH, LEFT, RIGHT, BoundaryError
from ._tags import claim

__all__ = [
    "SiteState",
    "Side",
    "Window",
    "ArrowConfig",
    "DualArrowConfig",
    "LatticePath",
    "BoundaryError",
    "HopError",
    "sample_config",
    "dual_config",
    "forward_from_dual",
    "trace_extremal",
    "trace_lr_pair",
    "trace_dual_extremal",
    "crossing_times",
    "intersection_times",
    "hop_at_crossings",
    "random_hopped_path",
    "validate_path",
    "check_noncrossing",
    "wedge_entry_violations",
]


class SiteState(enum.IntEnum):
    LeftOnly = LEFT
    RightOnly = RIGHT
    Both = BOTH


class Side(enum.IntEnum):
    Left = 0
    Right = 1


class HopError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Finite block [x_min, x_max] x [t_min, t_max] of the lattice.

    Paths started at least ``margin`` sites inside the x-range can run for the
    full time range without reaching the edge.
    """

    x_min: int
    x_max: int
    t_min: int
    t_max: int
    margin: int = 1

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"window needs x_min < x_max, got {self.x_min}, {self.x_max}")
        if not self.t_min < self.t_max:
            raise ValueError(f"window needs t_min < t_max, got {self.t_min}, {self.t_max}")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        need = 2 * (self.t_max - self.t_min) + 2 * self.margin
        if self.x_max - self.x_min < need:
            raise ValueError(
                f"window too narrow: width {self.x_max - self.x_min} < 2*height + 2*margin = {need}"
            )

    @classmethod
    def centered(cls, half_width: int, t_min: int, t_max: int, margin: int = 1) -> "Window":
        return cls(-half_width, half_width, t_min, t_max, margin)

    @classmethod
    def for_paths(cls, nsteps: int, t_min: int = 0, reach: int = 0, margin: int = 2) -> "Window":
        """Smallest centred window holding nsteps-long paths started in [-reach, reach]."""
        half = nsteps + reach + margin
        return cls(-half, half, t_min, t_min + nsteps, margin)

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.t_max - self.t_min

    def contains(self, x, t) -> bool:
        return self.x_min <= x <= self.x_max and self.t_min <= t <= self.t_max


@dataclass(frozen=True)
class ArrowConfig:
    window: Window
    beta: float
    seed: int

    def state_at(self, x, t):
        """States at (x, t); arrays broadcast. Parity is not checked here."""
        x = np.asarray(x, dtype=np.int64)
        out = _kernels.site_states(self.seed, self.beta, x, np.broadcast_to(t, x.shape)).reshape(x.shape)
        return out if out.ndim else SiteState(int(out[()]))

    @cached_property
    def states(self) -> np.ndarray:
        """Dense (height, width + 1) int8 block; row k is time t_min + k.

        Cells with odd x + t hold -1.
        """
        w = self.window
        xs = np.arange(w.x_min, w.x_max + 1, dtype=np.int64)
        ts = np.arange(w.t_min, w.t_max, dtype=np.int64)
        X, T = np.meshgrid(xs, ts)
        block = _kernels.site_states(self.seed, self.beta, X, T)
        block[(X + T) % 2 != 0] = -1
        return block

    def arrows(self) -> set[tuple[int, int, int]]:
        """Set of forward arrows as (x, t, d) with d = -1 or +1."""
        out = set()
        w = self.window
        st = self.states
        ts, ix = np.nonzero(st >= 0)
        for k, i in zip(ts.tolist(), ix.tolist()):
            x, t, s = w.x_min + i, w.t_min + k, st[k, i]
            if s != RIGHT:
                out.add((x, t, -1))
            if s != LEFT:
                out.add((x, t, 1))
        return out

    def has_arrow(self, x: int, t: int, d: int) -> bool:
        if (x + t) % 2:
            return False
        s = int(self.state_at(x, t))
        return (d == -1 and s != RIGHT) or (d == 1 and s != LEFT)


@dataclass(frozen=True)
class DualArrowConfig:
    """Dual view: arrows from odd sites (x, t + 1) down to (x +- 1, t)."""

    config: ArrowConfig

    @property
    def window(self) -> Window:
        return self.config.window

    def has_arrow(self, x: int, t: int, d: int) -> bool:
        """Dual arrow from odd site (x, t) to (x + d, t - 1)?"""
        if (x + t) % 2 == 0:
            return False
        return self.config.has_arrow(x, t - 1, -d)

    def arrows(self) -> set[tuple[int, int, int]]:
        """Dual arrows as (x, t, d): from (x, t) to (x + d, t - 1)."""
        return {(x, t + 1, -d) for (x, t, d) in self.config.arrows()}

    def branch_count(self, t_lo: int | None = None, t_hi: int | None = None) -> tuple[int, int]:
        """(odd sites with two dual arrows, odd sites with any dual arrow) over a time range."""
        arr = self.arrows()
        sites: dict[tuple[int, int], int] = {}
        for x, t, _ in arr:
            if (t_lo is None or t >= t_lo) and (t_hi is None or t <= t_hi):
                sites[(x, t)] = sites.get((x, t), 0) + 1
        return sum(1 for v in sites.values() if v == 2), len(sites)


@dataclass(frozen=True)
class LatticePath:
    """Nearest-neighbour path. ``steps`` are +-1; dual paths run backwards in time."""

    x0: int
    t0: int
    steps: np.ndarray = field(repr=False)
    dual: bool = False

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.int64)
        object.__setattr__(self, "steps", steps)
        if steps.size and not np.all(np.abs(steps) == 1):
            raise ValueError("steps must be +1 or -1")
        parity = (self.x0 + self.t0) % 2
        if parity != (1 if self.dual else 0):
            kind = "dual" if self.dual else "forward"
            raise ValueError(f"{kind} path cannot start at ({self.x0}, {self.t0}): wrong parity")

    @classmethod
    def from_positions(cls, positions, t0: int, dual: bool = False) -> "LatticePath":
        positions = np.asarray(positions, dtype=np.int64)
        return cls(int(positions[0]), int(t0), np.diff(positions), dual)

    @property
    def positions(self) -> np.ndarray:
        return np.concatenate([[self.x0], self.x0 + np.cumsum(self.steps)]).astype(np.int64)

    @property
    def times(self) -> np.ndarray:
        k = np.arange(self.steps.size + 1, dtype=np.int64)
        return self.t0 - k if self.dual else self.t0 + k

    @property
    def t_end(self) -> int:
        return int(self.t0 - self.steps.size if self.dual else self.t0 + self.steps.size)

    def __len__(self) -> int:
        return self.steps.size + 1

    def at(self, t: int) -> int:
        k = (self.t0 - t) if self.dual else (t - self.t0)
        if not 0 <= k <= self.steps.size:
            raise IndexError(f"time {t} outside path domain")
        return int(self.x0 + self.steps[:k].sum())

    def __eq__(self, other):
        if not isinstance(other, LatticePath):
            return NotImplemented
        return (self.x0, self.t0, self.dual) == (other.x0, other.t0, other.dual) and np.array_equal(
            self.steps, other.steps
        )

    def __hash__(self):
        return hash((self.x0, self.t0, self.dual, self.steps.tobytes()))


@claim("arrow-site-law")
def sample_config(window: Window, beta: float, seed: int) -> ArrowConfig:
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if not isinstance(window, Window):
        raise TypeError("window must be a Window")
    return ArrowConfig(window, float(beta), int(seed) & 0xFFFFFFFFFFFFFFFF)


@claim("arrow-duality")
def dual_config(config: ArrowConfig) -> DualArrowConfig:
    return DualArrowConfig(config)


def forward_from_dual(dual_arrows: set[tuple[int, int, int]]) -> set[tuple[int, int, int]]:
    """Invert the duality relation on explicit arrow sets."""
    return {(x, t - 1, -d) for (x, t, d) in dual_arrows}


def _check_start(config: ArrowConfig, x: int, t: int, dual: bool):
    w = config.window
    if ((x + t) % 2 == 1) != dual:
        raise ValueError(f"({x}, {t}) is not a valid {'dual' if dual else 'forward'} site")
    if not (w.x_min < x < w.x_max and w.t_min <= t <= w.t_max):
        raise ValueError(f"({x}, {t}) lies outside the window interior")


def trace_extremal(config: ArrowConfig, z: tuple[int, int], side: Side) -> LatticePath:
    """Left-most (or right-most) path from z up to the top of the window."""
    x, t = int(z[0]), int(z[1])
    _check_start(config, x, t, dual=False)
    w = config.window
    pos = _kernels.trace(config.seed, config.beta, [x], t, w.t_max - t, int(side), False, w.x_min, w.x_max)
    return LatticePath.from_positions(pos[0], t)


@claim("extremal-envelope")
def trace_lr_pair(config: ArrowConfig, z: tuple[int, int]) -> tuple[LatticePath, LatticePath]:
    return trace_extremal(config, z, Side.Left), trace_extremal(config, z, Side.Right)


def trace_dual_extremal(dual: DualArrowConfig, z: tuple[int, int], side: Side) -> LatticePath:
    """Dual left-most (``Side.Left``) path runs down from odd site z to t_min.

    Sides follow the rotated picture: the dual left-most path takes the +1
    arrow at dual branch points and never crosses forward left-most paths.
    """
    config = dual.config
    x, t = int(z[0]), int(z[1])
    _check_start(config, x, t, dual=True)
    w = config.window
    pos = _kernels.trace(config.seed, config.beta, [x], t, t - w.t_min, int(side), True, w.x_min, w.x_max)
    return LatticePath.from_positions(pos[0], t, dual=True)


def _overlap(p1: LatticePath, p2: LatticePath):
    lo = max(p1.t0, p2.t0)
    hi = min(p1.t_end, p2.t_end)
    if lo > hi:
        return None
    a = p1.positions[lo - p1.t0 : hi - p1.t0 + 1]
    b = p2.positions[lo - p2.t0 : hi - p2.t0 + 1]
    return lo, a, b


def crossing_times(p1: LatticePath, p2: LatticePath) -> list[float]:
    """Times at which one forward path crosses the other.

    Paths are linear between integer times. A crossing is reported at the last
    moment of contact before the strict order flips; a direct swap inside one
    step is reported at the interpolated meeting time.
    """
    if p1.dual or p2.dual:
        raise ValueError("crossing_times expects forward paths")
    ov = _overlap(p1, p2)
    if ov is None:
        return []
    lo, a, b = ov
    d = a - b
    out: list[float] = []
    last_sign = 0
    last_zero: float | None = None
    for k in range(d.size):
        s = int(np.sign(d[k]))
        if s == 0:
            last_zero = float(lo + k)
            continue
        if last_sign and s != last_sign:
            if last_zero is not None:
                out.append(last_zero)
            else:
                # strict swap within one step
                d0, d1 = float(d[k - 1]), float(d[k])
                out.append(lo + k - 1 + d0 / (d0 - d1))
        last_sign = s
        last_zero = None
    return out


def intersection_times(p1: LatticePath, p2: LatticePath) -> list[int]:
    """Integer times t > both starting times with p1(t) == p2(t)."""
    ov = _overlap(p1, p2)
    if ov is None:
        return []
    lo, a, b = ov
    return [lo + k for k in np.nonzero(a == b)[0].tolist() if lo + k > max(p1.t0, p2.t0)]


@claim("hopping-closure")
def hop_at_crossings(paths: Sequence[LatticePath], hop_times: Sequence[int]) -> LatticePath:
    """Follow paths[0] until hop_times[0], then paths[1], and so on.

    Each hop time must be an intersection time of the two paths involved and
    lie strictly after both of their starting times.
    """
    if len(paths) == 0:
        raise HopError("need at least one path")
    if len(hop_times) != len(paths) - 1:
        raise HopError("need exactly one hop time per consecutive pair of paths")
    prev = -np.inf
    for i, h in enumerate(hop_times):
        a, b = paths[i], paths[i + 1]
        if a.dual or b.dual:
            raise HopError("hopping is defined for forward paths")
        if h <= max(a.t0, b.t0):
            raise HopError(f"hop time {h} is not after both starting times")
        if h <= prev:
            raise HopError("hop times must increase")
        if not (a.t0 <= h <= a.t_end and b.t0 <= h <= b.t_end) or a.at(h) != b.at(h):
            raise HopError(f"hop time {h} is not an intersection time")
        prev = h
    first = paths[0]
    pieces = []
    start = first.t0
    for i, h in enumerate(list(hop_times) + [paths[-1].t_end]):
        p = paths[i]
        pieces.append(p.steps[start - p.t0 : h - p.t0])
        start = h
    return LatticePath(first.x0, first.t0, np.concatenate(pieces) if pieces else np.empty(0, np.int64))


def random_hopped_path(config: ArrowConfig, z: tuple[int, int], rng: np.random.Generator, max_hops: int = 6):
    """A net path from z built by repeated hopping between extremal paths.

    Candidate partners are extremal paths from random sites at or below the
    current hop time; each hop uses the earliest admissible intersection time.
    Returns (path, pieces, hop_times).
    """
    w = config.window
    cur = trace_extremal(config, z, Side(int(rng.integers(2))))
    pieces, hops = [cur], []
    now = cur.t0
    for _ in range(max_hops):
        t_start = int(rng.integers(w.t_min, max(w.t_min + 1, w.t_max - 1)))
        lo = w.x_min + w.margin + (w.t_max - t_start)
        hi = w.x_max - w.margin - (w.t_max - t_start)
        if hi <= lo:
            continue
        x_start = int(rng.integers(lo, hi + 1))
        if (x_start + t_start) % 2:
            x_start += 1 if x_start < hi else -1
        try:
            other = trace_extremal(config, (x_start, t_start), Side(int(rng.integers(2))))
        except (ValueError, BoundaryError):
            continue
        times = [t for t in intersection_times(pieces[-1], other) if t > now]
        if not times:
            continue
        hops.append(times[0])
        pieces.append(other)
        now = times[0]
    return hop_at_crossings(pieces, hops), pieces, hops


def validate_path(config: ArrowConfig, p: LatticePath) -> bool:
    """True iff every step of p follows an arrow of config (or of its dual)."""
    pos = p.positions
    ts = p.times
    if p.dual:
        lower_x = pos[:-1]
        below = ts[:-1] - 1
        d = -(pos[1:] - pos[:-1])
        st = config.state_at(lower_x, below)
    else:
        d = pos[1:] - pos[:-1]
        st = config.state_at(pos[:-1], ts[:-1])
    if d.size == 0:
        return True
    st = np.asarray(st)
    if np.any((pos[:-1] + ts[:-1]) % 2 != (1 if p.dual else 0)):
        return False
    ok = np.where(d == -1, st != RIGHT, st != LEFT)
    return bool(np.all(ok & (np.abs(d) == 1)))


def _cell_occupancy(config: ArrowConfig, fwd_choice, dual_choice):
    """Mark unit cells [c, c+1] x [t, t+1] holding a forward or a dual diagonal.

    fwd_choice / dual_choice map the dense state block to a per-site step in
    {-1, 0, +1} (0 = no edge chosen at that site).
    """
    w = config.window
    st = config.states
    H, W = st.shape
    fwd = np.zeros((H, W - 1), dtype=bool)
    dual = np.zeros((H, W - 1), dtype=bool)
    f = fwd_choice(st)
    g = dual_choice(st)
    for step, occ in ((f, fwd), (g, dual)):
        # forward edge from (x, t) with step d lies in cell min(x, x + d);
        # dual edge from (x, t + 1) down to (x + d, t) lies in the same slab
        right = step == 1
        left = step == -1
        occ[:, :] |= right[:, :-1]
        occ[:, :] |= left[:, 1:]
    del w
    return fwd, dual


@claim("forward-dual-noncrossing")
def check_noncrossing(config: ArrowConfig, webs_only: bool = True) -> bool:
    """True iff no forward edge and dual edge cross (share a cell as an X).

    Dual arrows from (x, t + 1) are read off the forward state at (x, t). With
    ``webs_only`` (default) the check pairs the left-most forward web with the
    dual left-most web, and likewise on the right. Without it, the full arrow
    sets are compared, which fails at every branch site once beta > 0.
    """
    valid = config.states >= 0

    def single(st):
        return np.where(valid & (st == LEFT), -1, np.where(valid & (st == RIGHT), 1, 0))

    if webs_only:
        pairs = []
        for branch in (-1, 1):
            fwd = lambda st, b=branch: single(st) + np.where(valid & (st == BOTH), b, 0)
            # dual arrows point opposite to the forward arrow they cross;
            # the dual web paired with the forward web takes -branch at dual branch points
            dual = lambda st, b=branch: -single(st) + np.where(valid & (st == BOTH), -b, 0)
            pairs.append((fwd, dual))
        return all(not np.any(np.logical_and(*_cell_occupancy(config, f, d))) for f, d in pairs)
    checks = []
    for d in (-1, 1):
        # full sets, one arrow direction at a time
        fwd = lambda st, d=d: np.where(valid & ((st == BOTH) | (st == (LEFT if d == -1 else RIGHT))), d, 0)
        for e in (-1, 1):
            dual = lambda st, e=e: np.where(valid & ((st == BOTH) | (st == (RIGHT if e == -1 else LEFT))), e, 0)
            checks.append(np.logical_and(*_cell_occupancy(config, fwd, dual)))
    return not any(np.any(c) for c in checks)


def _wedge_inside(pi: LatticePath, rhat: LatticePath, lhat: LatticePath, T: int, s: int):
    """For each quarter time in pi's domain: +1 inside the wedge, -1 outside its
    closure, 0 on the closure boundary. Coordinates are scaled by 4."""
    t_lo, t_hi = pi.t0, pi.t_end
    q = np.arange(4 * t_lo, 4 * t_hi + 1, dtype=np.int64)

    def interp(path: LatticePath, qt):
        base = np.floor_divide(qt, 4)
        frac = qt - 4 * base
        pos = path.positions
        if path.dual:
            idx0 = path.t0 - base
            idx1 = path.t0 - (base + 1)
        else:
            idx0 = base - path.t0
            idx1 = base + 1 - path.t0
        idx1 = np.where(frac == 0, idx0, idx1)
        return pos[idx0] * (4 - frac) + pos[idx1] * frac

    status = np.full(q.shape, -1, dtype=np.int64)
    in_time = (q > 4 * T) & (q < 4 * s)
    on_time = (q >= 4 * T) & (q <= 4 * s)
    sel = on_time
    if np.any(sel):
        qq = q[sel]
        x = interp(pi, qq)
        r = interp(rhat, qq)
        l_ = interp(lhat, qq)
        strict = (x > r) & (x < l_) & in_time[sel]
        closed = (x >= r) & (x <= l_)
        st = np.where(strict, 1, np.where(closed, 0, -1))
        status[sel] = st
    return q, status


def _enters_from_outside(q, status, sigma4) -> bool:
    outside_seen = False
    for qt, st in zip(q.tolist(), status.tolist()):
        if qt > sigma4 and st == -1:
            outside_seen = True
        elif st == 1 and outside_seen:
            return True
    return False


@claim("wedge-avoidance")
def wedge_entry_violations(config: ArrowConfig, samples: int, rng: np.random.Generator | None = None,
                           paths_per_wedge: int = 8) -> int:
    """Count forward net paths that enter a dual wedge from outside.

    Each sample draws a dual right-most path r and a dual left-most path l
    from odd sites at a common level with r < l, forms the wedge between them
    above their first meeting, and tests extremal and hopped forward paths
    against it on a quarter-step grid (exact for piecewise-linear paths whose
    kinks sit at integer times).
    """
    rng = rng or np.random.default_rng(config.seed)
    w = config.window
    dual = dual_config(config)
    violations = 0
    for _ in range(samples):
        s = int(rng.integers(w.t_min + 2, w.t_max + 1))
        lo = w.x_min + w.margin + (s - w.t_min)
        hi = w.x_max - w.margin - (s - w.t_min)
        if hi - lo < 4:
            continue
        xs = np.sort(rng.choice(np.arange(lo, hi + 1), size=2, replace=False))
        a, b = int(xs[0]), int(xs[1])
        if (a + s) % 2 == 0:
            a += 1
        if (b + s) % 2 == 0:
            b -= 1
        if not a < b:
            continue
        rhat = trace_dual_extremal(dual, (a, s), Side.Right)
        lhat = trace_dual_extremal(dual, (b, s), Side.Left)
        meet = np.nonzero(rhat.positions == lhat.positions)[0]
        T = s - int(meet[0]) if meet.size else w.t_min - 1
        # forward paths from random sites below s
        for _ in range(paths_per_wedge):
            t0 = int(rng.integers(w.t_min, s))
            plo = w.x_min + w.margin + (w.t_max - t0)
            phi = w.x_max - w.margin - (w.t_max - t0)
            x0 = int(rng.integers(plo, phi + 1))
            if (x0 + t0) % 2:
                x0 += 1 if x0 < phi else -1
            if rng.random() < 0.5:
                pi = trace_extremal(config, (x0, t0), Side(int(rng.integers(2))))
            else:
                pi, _, _ = random_hopped_path(config, (x0, t0), rng, max_hops=3)
            # restrict to [t0, s]
            n = min(s, pi.t_end) - pi.t0
            if n <= 0:
                continue
            pi = LatticePath(pi.x0, pi.t0, pi.steps[:n])
            rr = _clip_dual(rhat, pi.t0)
            ll = _clip_dual(lhat, pi.t0)
            q, status = _wedge_inside(pi, rr, ll, max(T, pi.t0 - 1), s)
            if _enters_from_outside(q, status, 4 * pi.t0):
                violations += 1
    return violations


def _clip_dual(p: LatticePath, t_floor: int) -> LatticePath:
    """Dual path restricted to times >= t_floor - 1 (keeps interpolation in range)."""
    keep = max(0, min(p.steps.size, p.t0 - max(t_floor - 1, p.t_end)))
    return LatticePath(p.x0, p.t0, p.steps[:keep], dual=True)
