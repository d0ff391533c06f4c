"""Pathwise solutions of the sticky left-right pair and related systems.

The pair is solved through its time-change representation: in the clock
tau = T_t the process Y_tau = (L0 - R0 + Bl_tau - Br_tau)/2 - tau drives the
sticky clock S = max(0, running sup of Y), and real time is t = tau + S.
Suprema over each grid step are sampled exactly from the Brownian bridge
maximum, so the only discretisation is the piecewise-linear interpolation
between nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._tags import claim

__all__ = [
    "DrivingNoise",
    "LRSolution",
    "ReflectedPath",
    "LLRResult",
    "sample_noise",
    "refine_noise",
    "solve_lr",
    "sticky_time",
    "lr_terminal_batch",
    "sticky_times_batch",
    "solve_reflected",
    "reflection_identity_error",
    "isolated_sticky_fraction",
    "solve_llr",
    "llr_batch",
    "solve_coalescing_system",
]


def _n_steps(step: float, horizon: float) -> int:
    return int(math.ceil(horizon / step - 1e-9))


@dataclass(frozen=True)
class DrivingNoise:
    """Increment streams on a grid of step h.

    dBl, dBr, dBs have variance h; U are uniforms in (0, 1] used for exact
    bridge suprema; ``extra`` holds a second uniform stream when requested.
    Arrays are 1-d (one replica) or 2-d (rows are replicas). One spare step
    beyond the horizon is included so a free phase never starves the sticky
    phase of noise.
    """

    step: float
    horizon: float
    dBl: np.ndarray = field(repr=False)
    dBr: np.ndarray = field(repr=False)
    dBs: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    extra: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.dBl.shape[-1]

    @classmethod
    def zeros(cls, step: float, horizon: float) -> "DrivingNoise":
        """Degenerate noise (all increments 0, bridge suprema at the endpoints)."""
        n = _n_steps(step, horizon) + 1
        z = np.zeros(n)
        return cls(step, horizon, z, z.copy(), z.copy(), np.ones(n), np.ones(n))

    def row(self, i: int) -> "DrivingNoise":
        ex = None if self.extra is None else self.extra[i]
        return DrivingNoise(self.step, self.horizon, self.dBl[i], self.dBr[i], self.dBs[i], self.U[i], ex)


def sample_noise(step: float, horizon: float, seed, rows: int | None = None, extra: bool = False) -> DrivingNoise:
    if not step > 0:
        raise ValueError("step must be positive")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(seed)
    n = _n_steps(step, horizon) + 1
    shape = (n,) if rows is None else (rows, n)
    sd = math.sqrt(step)
    dBl = rng.standard_normal(shape) * sd
    dBr = rng.standard_normal(shape) * sd
    dBs = rng.standard_normal(shape) * sd
    # 1 - uniform lies in (0, 1], so log() is finite
    U = 1.0 - rng.random(shape)
    ex = 1.0 - rng.random(shape) if extra else None
    return DrivingNoise(float(step), float(horizon), dBl, dBr, dBs, U, ex)


def refine_noise(noise: DrivingNoise, seed) -> DrivingNoise:
    """Same Brownian paths on a grid of step h/2 (each increment split by a
    Brownian bridge draw). Uniform streams are redrawn."""
    rng = np.random.default_rng(seed)
    h = noise.step

    def split(d):
        mid = 0.5 * d + rng.standard_normal(d.shape) * math.sqrt(h / 4)
        out = np.empty(d.shape[:-1] + (2 * d.shape[-1],))
        out[..., 0::2] = mid
        out[..., 1::2] = d - mid
        return out

    dBl, dBr, dBs = split(noise.dBl), split(noise.dBr), split(noise.dBs)
    U = 1.0 - rng.random(dBl.shape)
    ex = None if noise.extra is None else 1.0 - rng.random(dBl.shape)
    return DrivingNoise(h / 2, noise.horizon, dBl, dBr, dBs, U, ex)


def _bridge_max(a, b, h_var, u):
    """Exact supremum of a Brownian bridge from a to b, total variance h_var."""
    return 0.5 * (a + b + np.sqrt((b - a) ** 2 - h_var * np.log(u)))


def _solve_row(dBl, dBr, Zs, U, l0, r0, h, horizon):
    """Node arrays (t, L, R, T, S, sticky) for one replica. Zs are standard normals."""
    n = dBl.shape[0]
    t_parts, L_parts, R_parts, T_parts, S_parts, st_parts = [], [], [], [], [], []
    meet_time = 0.0 if l0 <= r0 else -1.0
    off = 0
    t_star = 0.0
    L, R = float(l0), float(r0)
    if l0 > r0:
        Lf = np.concatenate([[l0], dBl - h]).cumsum()
        Rf = np.concatenate([[r0], dBr + h]).cumsum()
        tf = np.arange(n + 1) * h
        below = np.nonzero(Lf[1:] <= Rf[1:])[0]
        k = int(below[0]) if below.size else n
        # first horizon crossing of the free phase grid
        kh = int(np.nonzero(tf[1:] >= horizon)[0][0])
        meet_ok = False
        if k <= kh:
            th = (Lf[k] - Rf[k]) / ((Lf[k] - Rf[k]) - (Lf[k + 1] - Rf[k + 1]))
            tm = (k + th) * h
            meet_ok = tm < horizon
        if not meet_ok:
            w = (horizon - kh * h) / h
            Le = Lf[kh] + w * (Lf[kh + 1] - Lf[kh])
            Re = Rf[kh] + w * (Rf[kh + 1] - Rf[kh])
            t = np.concatenate([tf[: kh + 1], [horizon]])
            Lv = np.concatenate([Lf[: kh + 1], [Le]])
            Rv = np.concatenate([Rf[: kh + 1], [Re]])
            z = np.zeros_like(t)
            return dict(t=t, L=Lv, R=Rv, T=t.copy(), S=z, sticky=z.astype(bool), meet_time=-1.0)
        Lm = Lf[k] + th * (Lf[k + 1] - Lf[k])
        t_parts.append(tf[: k + 1])
        L_parts.append(Lf[: k + 1])
        R_parts.append(Rf[: k + 1])
        T_parts.append(tf[: k + 1])
        S_parts.append(np.zeros(k + 1))
        st_parts.append(np.zeros(k + 1, dtype=bool))
        L = R = Lm
        t_star = tm
        off = k + 1
        meet_time = tm
    rem = horizon - t_star
    m = n - off
    Y = np.concatenate([[0.5 * (L - R)], 0.5 * (dBl[off:] - dBr[off:]) - h]).cumsum()
    M = _bridge_max(Y[:-1], Y[1:], h, U[off:])
    S = np.maximum.accumulate(np.concatenate([[0.0], M]))
    tau = np.arange(m + 1) * h
    tn = tau + S
    j = int(np.nonzero(tn >= rem)[0][0])
    Bl = np.concatenate([[0.0], dBl[off:]]).cumsum()
    Bs = np.concatenate([[0.0], np.sqrt(np.diff(S)) * Zs[off:]]).cumsum()
    i = j - 1
    Te, Ye, Ble, Bse, together = _kernels.cell_point(rem - tn[i], h, tau[i], S[i], Y[i], Y[j], S[j],
                                                     Bl[i], Bl[j], Bs[i], Bs[j])
    # clamp rounding so S stays monotone across the last cell
    Se = min(max(rem - Te, S[i]), S[j])
    if together:
        # inside the sticky stretch the pair sits together
        Ye = Se
    Tn = np.concatenate([tau[:j], [Te]])
    Sn = np.concatenate([S[:j], [Se]])
    Yn = np.concatenate([Y[:j], [Ye]])
    Bln = np.concatenate([Bl[:j], [Ble]])
    Bsn = np.concatenate([Bs[:j], [Bse]])
    Ln = L + Bln + Bsn - (Tn + Sn)
    Rn = Ln + 2.0 * (Sn - Yn)
    sticky = np.concatenate([[False], np.diff(Sn) > 0])
    if t_parts:
        # the meeting node opens the sticky phase; drop the duplicate
        Tn_full = t_star + Tn
        t_parts.append(Tn_full + Sn)
        L_parts.append(Ln)
        R_parts.append(Rn)
        T_parts.append(Tn_full)
        S_parts.append(Sn)
        st_parts.append(sticky)
        cat = np.concatenate
        t, Lv, Rv, T, Sv, stv = map(cat, (t_parts, L_parts, R_parts, T_parts, S_parts, st_parts))
        return dict(t=t, L=Lv, R=Rv, T=T, S=Sv, sticky=stv, meet_time=meet_time)
    return dict(t=Tn + Sn, L=Ln, R=Rn, T=Tn, S=Sn, sticky=sticky, meet_time=meet_time)


@dataclass(frozen=True)
class LRSolution:
    """Node values of the pair. ``t == T + S`` holds element-wise by construction."""

    t: np.ndarray = field(repr=False)
    L: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    sticky: np.ndarray = field(repr=False)
    l0: float = 0.0
    r0: float = 0.0
    meet_time: float = 0.0
    horizon: float = 0.0

    def at(self, t) -> dict:
        """Linear interpolation of all components at times t."""
        return {k: np.interp(t, self.t, getattr(self, k)) for k in ("L", "R", "T", "S")}


@claim("space-time-equation")
def solve_lr(noise: DrivingNoise, l0: float, r0: float) -> LRSolution:
    if not (np.isfinite(l0) and np.isfinite(r0)):
        raise ValueError("initial positions must be finite")
    if noise.dBl.ndim != 1:
        raise ValueError("solve_lr takes a single-replica noise; use noise.row(i)")
    h = noise.step
    out = _solve_row(noise.dBl, noise.dBr, noise.dBs / math.sqrt(h), noise.U, float(l0), float(r0), h, noise.horizon)
    if np.any(np.diff(out["t"]) < 0):
        raise ArithmeticError("time-change inversion is not monotone")
    return LRSolution(out["t"], out["L"], out["R"], out["T"], out["S"], out["sticky"],
                      float(l0), float(r0), float(out["meet_time"]), noise.horizon)


@claim("sticky-clock")
def sticky_time(sol: LRSolution, t: float) -> float:
    if t > sol.horizon + 1e-12:
        raise ValueError("t beyond the horizon")
    if t <= 0:
        return 0.0
    return float(np.interp(t, sol.t, sol.S))


def _seed_seq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _chunk_rows(n_steps: int, budget: int = 2_000_000) -> int:
    return max(1, budget // max(1, n_steps))


def lr_terminal_batch(h: float, horizon: float, l0: float, r0: float, replicas: int, seed,
                      impl=None) -> np.ndarray:
    """Terminal (L, R, S, T, meet_time) for many independent replicas.

    Noise for replica chunk c comes from the generator spawned as child c of
    ``seed``, so results do not depend on the kernel implementation.
    """
    n = _n_steps(h, horizon) + 1
    rows = _chunk_rows(n)
    ss = _seed_seq(seed)
    nchunks = -(-replicas // rows)
    out = np.empty((replicas, 5))
    sd = math.sqrt(h)
    for c, child in enumerate(ss.spawn(nchunks)):
        rng = np.random.default_rng(child)
        m = min(rows, replicas - c * rows)
        dBl = rng.standard_normal((m, n)) * sd
        dBr = rng.standard_normal((m, n)) * sd
        Zs = rng.standard_normal((m, n))
        U = 1.0 - rng.random((m, n))
        out[c * rows : c * rows + m] = _kernels.lr_terminal(dBl, dBr, Zs, U, l0, r0, h, horizon, impl=impl)
    if np.any(np.isnan(out)):
        raise ArithmeticError("noise stream exhausted before the horizon")
    return out


@dataclass(frozen=True)
class ReflectedPath:
    tau: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    compensator: np.ndarray = field(repr=False)


@claim("reflected-distance")
def solve_reflected(noise: DrivingNoise, l0: float, r0: float) -> ReflectedPath:
    """X = W~ + C with W~_tau = R0 - L0 + Br - Bl + 2 tau and C the minimal
    compensator keeping X >= 0, built from the same bridge extremes as the
    sticky clock, so that R_t - L_t = X at tau = T_t on every node."""
    if l0 > r0:
        raise ValueError("need l0 <= r0")
    h = noise.step
    Wt = np.concatenate([[r0 - l0], noise.dBr - noise.dBl + 2 * h]).cumsum()
    Y = np.concatenate([[0.5 * (l0 - r0)], 0.5 * (noise.dBl - noise.dBr) - h]).cumsum()
    M = _bridge_max(Y[:-1], Y[1:], h, noise.U)
    S = np.maximum.accumulate(np.concatenate([[0.0], M]))
    C = 2.0 * S
    X = np.maximum(Wt + C, 0.0)
    # X = 2 (S - Y) >= 0 exactly; the clip only absorbs rounding in W~ + C
    X = np.where(X > 0, 2.0 * (S - Y), 0.0)
    tau = np.arange(Y.size) * h
    return ReflectedPath(tau, X, C)


def reflection_identity_error(sol: LRSolution, refl: ReflectedPath) -> float:
    """max over nodes of |(R - L) - X at tau = T|."""
    Xi = np.interp(sol.T, refl.tau, refl.X)
    return float(np.max(np.abs((sol.R - sol.L) - Xi)))


@claim("sticky-set-resolution")
def isolated_sticky_fraction(sol: LRSolution, radius: float) -> float:
    """Fraction of sticky nodes with no other sticky node within ``radius``
    (in real time). NaN when there are no sticky nodes."""
    ts = sol.t[sol.sticky]
    if ts.size == 0:
        return float("nan")
    if ts.size == 1:
        return 1.0
    gaps = np.diff(ts)
    left = np.concatenate([[np.inf], gaps])
    right = np.concatenate([gaps, [np.inf]])
    return float(np.mean(np.minimum(left, right) > radius))


def sticky_times_batch(h: float, horizon: float, l0: float, r0: float, replicas: int, seed,
                       impl=None) -> np.ndarray:
    return lr_terminal_batch(h, horizon, l0, r0, replicas, seed, impl=impl)[:, 2]


@dataclass(frozen=True)
class LLRResult:
    times: np.ndarray = field(repr=False)
    L: np.ndarray = field(repr=False)
    Lhat: np.ndarray = field(repr=False)
    Rhat: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    survived: bool = True
    kill_index: int = -1


def _llr_core(dB1, dBl, dBr, U, U2, eta, h, n):
    """Vectorised over rows. Returns L, Lhat, Rhat, Delta and the first step
    index at which the pair (Lhat, Rhat) met (n if never)."""
    m = dB1.shape[0]
    zero = np.zeros((m, 1))
    L = np.concatenate([zero, dB1[:, :n] - h], axis=1).cumsum(axis=1)
    Vf = np.concatenate([zero, dBl[:, :n] - dB1[:, :n]], axis=1).cumsum(axis=1)
    # bridge minimum of the free difference (variance 2 per unit time)
    mins = 0.5 * (Vf[:, :-1] + Vf[:, 1:] - np.sqrt((Vf[:, 1:] - Vf[:, :-1]) ** 2 - 4 * h * np.log(U[:, :n])))
    delta = np.maximum.accumulate(np.concatenate([zero, np.maximum(-mins, 0.0)], axis=1), axis=1)
    V = Vf + delta
    Lhat = L + V
    Rhat = eta + np.concatenate([zero, dBr[:, :n] + h], axis=1).cumsum(axis=1)
    X = Rhat - Lhat
    a, b = X[:, :-1], X[:, 1:]
    with np.errstate(over="ignore"):
        p_hit = np.where((a > 0) & (b > 0), np.exp(-np.clip(a * b, 0, None) / h), 1.0)
    hit = U2[:, :n] < p_hit
    any_hit = hit.any(axis=1)
    first = np.where(any_hit, hit.argmax(axis=1), n)
    if eta <= 0:
        first[:] = 0
    return L, Lhat, Rhat, delta, first


@claim("three-path-system")
def solve_llr(noise: DrivingNoise, eta: float, t: float | None = None) -> LLRResult:
    """Three-path system: L (drift -1), Lhat (drift -1, reflected up off L),
    Rhat (drift +1), started at (0, 0, eta). Streams: dBs drives L, dBl
    drives Lhat, dBr drives Rhat, U the reflection bridges, extra the
    killing bridges."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if noise.extra is None:
        raise ValueError("solve_llr needs a noise sample with the extra uniform stream")
    h = noise.step
    t = noise.horizon if t is None else t
    n = _n_steps(h, t)
    if n > noise.n:
        raise ValueError("noise too short for horizon t")
    rows = lambda a: np.atleast_2d(a)
    L, Lh, Rh, delta, first = _llr_core(rows(noise.dBs), rows(noise.dBl), rows(noise.dBr), rows(noise.U),
                                        rows(noise.extra), float(eta), h, n)
    times = np.arange(n + 1) * h
    k = int(first[0])
    return LLRResult(times, L[0], Lh[0], Rh[0], delta[0], survived=k >= n, kill_index=-1 if k >= n else k)


def llr_batch(eta: float, t: float, h: float, replicas: int, seed, checkpoints: int = 5):
    """Survival flags and the proxy F(t - s, X_s, Y_s) 1{s < tau} at
    s = j t / checkpoints, j = 0..checkpoints; X = Rhat - Lhat,
    Y = (Rhat - L) + (Lhat - L). At s = t the proxy is the survival flag."""
    from .closed_forms import supermartingale_F

    n = _n_steps(h, t)
    rows = _chunk_rows(n, 1_000_000)
    ss = _seed_seq(seed)
    nchunks = -(-replicas // rows)
    surv = np.empty(replicas, dtype=bool)
    proxy = np.empty((replicas, checkpoints + 1))
    idx = [round(j * n / checkpoints) for j in range(checkpoints + 1)]
    sd = math.sqrt(h)
    for c, child in enumerate(ss.spawn(nchunks)):
        rng = np.random.default_rng(child)
        m = min(rows, replicas - c * rows)
        dB1, dBl, dBr = (rng.standard_normal((m, n)) * sd for _ in range(3))
        U = 1.0 - rng.random((m, n))
        U2 = rng.random((m, n))
        L, Lh, Rh, _, first = _llr_core(dB1, dBl, dBr, U, U2, float(eta), h, n)
        sl = slice(c * rows, c * rows + m)
        surv[sl] = first >= n
        for j, k in enumerate(idx):
            alive = first >= k if k > 0 else np.full(m, eta > 0)
            X = np.maximum(Rh[:, k] - Lh[:, k], 0.0)
            Y = (Rh[:, k] - L[:, k]) + (Lh[:, k] - L[:, k])
            rem = t - k * h
            if k == n or rem <= 0:
                val = (first >= n).astype(float)
            else:
                val = np.where(alive & (X > 0), supermartingale_F(rem, X, np.maximum(X, Y)), 0.0)
            proxy[sl, j] = val
    return surv, proxy, np.array(idx) * h


@claim("coalescing-system")
def solve_coalescing_system(lefts, rights, h: float, horizon: float, rng: np.random.Generator):
    """Left-right coalescing motions started at time 0 from the given positions.

    Motions are ordered by position (lefts before rights on ties) and
    partitioned into adjacent (left, right) pairs and singletons. Elements run
    independently (pairs by the sticky pair solver, singletons as drifted
    Brownian motions) on a uniform grid until the first coalescence of two
    same-type motions or the first time a right motion reaches a left motion
    from its left; then the system is repartitioned and restarted.

    Returns (times, L, R) with L of shape (k, n+1) and R of shape (k', n+1).
    """
    lefts = [float(x) for x in lefts]
    rights = [float(x) for x in rights]
    n = _n_steps(h, horizon)
    times = np.arange(n + 1) * h
    times[-1] = horizon
    k, kp = len(lefts), len(rights)
    Lout = np.full((k, n + 1), np.nan)
    Rout = np.full((kp, n + 1), np.nan)
    # motions: list of dicts {kind, members, pos}
    motions = []
    for kind, xs in (("L", lefts), ("R", rights)):
        for i, x in enumerate(xs):
            for mo in motions:
                if mo["kind"] == kind and mo["pos"] == x:
                    mo["members"].append(i)
                    break
            else:
                motions.append({"kind": kind, "members": [i], "pos": x})
    cur = 0
    events = 0
    while cur < n:
        motions.sort(key=lambda mo: (mo["pos"], 0 if mo["kind"] == "L" else 1))
        elems = []
        i = 0
        while i < len(motions):
            if motions[i]["kind"] == "L" and i + 1 < len(motions) and motions[i + 1]["kind"] == "R":
                elems.append((i, i + 1))
                i += 2
            else:
                elems.append((i,))
                i += 1
        steps = n - cur
        rem_t = times[-1] - times[cur]
        paths = np.empty((len(motions), steps + 1))
        grid = times[cur:] - times[cur]
        for el in elems:
            if len(el) == 2:
                a, b = motions[el[0]], motions[el[1]]
                noise = sample_noise(h, rem_t, rng)
                sol = solve_lr(noise, a["pos"], b["pos"])
                paths[el[0]] = np.interp(grid, sol.t, sol.L)
                paths[el[1]] = np.interp(grid, sol.t, sol.R)
            else:
                mo = motions[el[0]]
                drift = -1.0 if mo["kind"] == "L" else 1.0
                inc = rng.standard_normal(steps) * np.sqrt(np.diff(grid)) + drift * np.diff(grid)
                paths[el[0]] = mo["pos"] + np.concatenate([[0.0], inc.cumsum()])
        # first event between neighbouring motions in different elements
        owner = np.empty(len(motions), dtype=int)
        for e, el in enumerate(elems):
            owner[list(el)] = e
        ev_step = steps + 1
        ev_pair = None
        for i in range(len(motions) - 1):
            if owner[i] == owner[i + 1]:
                continue
            a, b = motions[i], motions[i + 1]
            hit = np.nonzero(paths[i + 1, 1:] <= paths[i, 1:])[0]
            if hit.size and hit[0] + 1 < ev_step:
                ev_step = int(hit[0]) + 1
                ev_pair = (i, i + 1)
        last = min(ev_step, steps)
        for j, mo in enumerate(motions):
            target = Lout if mo["kind"] == "L" else Rout
            for mem in mo["members"]:
                target[mem, cur : cur + last + 1] = paths[j, : last + 1]
            mo["pos"] = float(paths[j, last])
        cur += last
        if ev_pair is None or cur >= n:
            break
        events += 1
        i, j = ev_pair
        a, b = motions[i], motions[j]
        meet = 0.5 * (a["pos"] + b["pos"])
        if a["kind"] == b["kind"]:
            a["members"] += b["members"]
            a["pos"] = meet
            for mem in a["members"]:
                (Lout if a["kind"] == "L" else Rout)[mem, cur] = meet
            motions.pop(j)
        else:
            # a right motion reached a left motion from the left: they cross
            # and continue as an ordered (left, right) pair started together
            a["pos"] = b["pos"] = meet
            for mo in (a, b):
                for mem in mo["members"]:
                    (Lout if mo["kind"] == "L" else Rout)[mem, cur] = meet
        if events > 10 * (k + kp + k * kp + 1):
            raise RuntimeError("too many events; grid too coarse")
    return times, Lout, Rout
