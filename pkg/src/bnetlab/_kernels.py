"""Hot lattice loops, each in a numba flavour and a numpy flavour.

The two flavours must agree bit for bit: both draw the per-site arrow from the
same counter-based hash, so the only difference is how the loop is driven.
Public callers go through the dispatchers at the bottom of the module.
"""

import numpy as np

from ._accel import njit, numba_enabled

LEFT = 0
RIGHT = 1
BOTH = 2

# splitmix64 constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

OK = 0
HIT_BOUNDARY = 1


class BoundaryError(RuntimeError):
    """A traced path or particle reached the x-edge of its window."""


# ---------------------------------------------------------------------------
# hashing


def _mix_np(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


def site_uniform_np(seed, x, t):
    """Uniform in [0, 1) attached to lattice site (x, t); vectorised over x, t."""
    x = np.asarray(x, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    with np.errstate(over="ignore"):
        h = _mix_np(np.asarray(seed, dtype=np.uint64))
        h = _mix_np(h ^ x.astype(np.uint64))
        h = _mix_np(h ^ t.astype(np.uint64))
    return (h >> _S11).astype(np.float64) * _INV53


def site_state_np(seed, beta, x, t):
    u = site_uniform_np(seed, x, t)
    out = np.where(u < beta, BOTH, np.where(u < beta + 0.5 * (1.0 - beta), LEFT, RIGHT))
    return out.astype(np.int8)


@njit
def _mix_nb(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


@njit
def _seed_key_nb(seed):
    return _mix_nb(np.uint64(seed))


@njit
def _state_nb(key, beta, x, t):
    h = _mix_nb(key ^ np.uint64(np.int64(x)))
    h = _mix_nb(h ^ np.uint64(np.int64(t)))
    u = np.float64(h >> _S11) * _INV53
    if u < beta:
        return BOTH
    if u < beta + 0.5 * (1.0 - beta):
        return LEFT
    return RIGHT


@njit
def _states_nb(seed, beta, xs, ts):
    key = _seed_key_nb(seed)
    out = np.empty(xs.shape[0], dtype=np.int8)
    for i in range(xs.shape[0]):
        out[i] = _state_nb(key, beta, xs[i], ts[i])
    return out


# ---------------------------------------------------------------------------
# extremal path tracing
#
# side 0 takes the left arrow at branch sites, side 1 the right arrow. A dual
# path at odd site (x, t) steps to t - 1 opposite to the forward choice of the
# same side at (x, t - 1).


@njit
def _trace_nb(seed, beta, x0, t0, nsteps, side, dual, xlo, xhi):
    key = _seed_key_nb(seed)
    npaths = x0.shape[0]
    out = np.empty((npaths, nsteps + 1), dtype=np.int64)
    for p in range(npaths):
        x = x0[p]
        out[p, 0] = x
        for k in range(nsteps):
            if dual:
                t = t0 - k - 1
            else:
                t = t0 + k
            s = _state_nb(key, beta, x, t)
            if s == LEFT:
                d = -1
            elif s == RIGHT:
                d = 1
            elif side == 0:
                d = -1
            else:
                d = 1
            if dual:
                d = -d
            x += d
            if x <= xlo or x >= xhi:
                return out, HIT_BOUNDARY
            out[p, k + 1] = x
    return out, OK


def _trace_np(seed, beta, x0, t0, nsteps, side, dual, xlo, xhi):
    out = np.empty((x0.shape[0], nsteps + 1), dtype=np.int64)
    x = x0.copy()
    out[:, 0] = x
    for k in range(nsteps):
        t = t0 - k - 1 if dual else t0 + k
        s = site_state_np(seed, beta, x, np.full_like(x, t))
        d = np.where(s == LEFT, -1, np.where(s == RIGHT, 1, -1 if side == 0 else 1))
        if dual:
            d = -d
        x = x + d
        if np.any((x <= xlo) | (x >= xhi)):
            return out, HIT_BOUNDARY
        out[:, k + 1] = x
    return out, OK


@njit
def _pair_gap_nb(seeds, beta, nsteps, xlo, xhi):
    """(right-most minus left-most) after nsteps, from the origin, one config per seed."""
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for i in range(seeds.shape[0]):
        key = _seed_key_nb(seeds[i])
        xl = 0
        xr = 0
        for t in range(nsteps):
            s = _state_nb(key, beta, xl, t)
            s2 = _state_nb(key, beta, xr, t)
            xl += 1 if s == RIGHT else -1
            xr += -1 if s2 == LEFT else 1
            if xl <= xlo or xr >= xhi:
                return out, HIT_BOUNDARY
        out[i] = xr - xl
    return out, OK


def _pair_gap_np(seeds, beta, nsteps, xlo, xhi):
    seeds = np.asarray(seeds, dtype=np.uint64)
    xl = np.zeros(seeds.shape[0], dtype=np.int64)
    xr = np.zeros(seeds.shape[0], dtype=np.int64)
    for t in range(nsteps):
        tt = np.full_like(xl, t)
        sl = site_state_np(seeds, beta, xl, tt)
        sr = site_state_np(seeds, beta, xr, tt)
        xl = xl + np.where(sl == RIGHT, 1, -1)
        xr = xr + np.where(sr == LEFT, -1, 1)
        if np.any(xl <= xlo) or np.any(xr >= xhi):
            return xr - xl, HIT_BOUNDARY
    return xr - xl, OK


# ---------------------------------------------------------------------------
# branching-coalescing particle step


@njit
def _step_nb(key, beta, xs, t):
    n = xs.shape[0]
    out = np.empty(2 * n, dtype=np.int64)
    m = 0
    last = np.iinfo(np.int64).min
    for i in range(n):
        x = xs[i]
        s = _state_nb(key, beta, x, t)
        if s != RIGHT:
            y = x - 1
            if y != last:
                out[m] = y
                m += 1
                last = y
        if s != LEFT:
            y = x + 1
            if y != last:
                out[m] = y
                m += 1
                last = y
    return out[:m]


@njit
def _step_edges_nb(seed, beta, xs, t):
    """One step; also returns the used arrows as (lower x, upper x) pairs."""
    key = _seed_key_nb(seed)
    n = xs.shape[0]
    lo = np.empty(2 * n, dtype=np.int64)
    hi = np.empty(2 * n, dtype=np.int64)
    k = 0
    for i in range(n):
        s = _state_nb(key, beta, xs[i], t)
        if s != RIGHT:
            lo[k] = xs[i]
            hi[k] = xs[i] - 1
            k += 1
        if s != LEFT:
            lo[k] = xs[i]
            hi[k] = xs[i] + 1
            k += 1
    new = _step_nb(key, beta, xs, t)
    return new, lo[:k], hi[:k]


def _step_edges_np(seed, beta, xs, t):
    s = site_state_np(seed, beta, xs, np.full_like(xs, t))
    has_l = s != RIGHT
    has_r = s != LEFT
    # interleave per source site so edges come out sorted by (lower, upper)
    lo = np.concatenate([xs[has_l], xs[has_r]])
    hi = np.concatenate([xs[has_l] - 1, xs[has_r] + 1])
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    return np.unique(hi), lo, hi


@njit
def _evolve_nb(seed, beta, xs, t0, nsteps, xlo, xhi, keep_lo, keep_hi):
    key = _seed_key_nb(seed)
    cur = xs.copy()
    for k in range(nsteps):
        t = t0 + k
        new = _step_nb(key, beta, cur, t)
        rem = nsteps - k - 1
        lo = keep_lo - rem
        hi = keep_hi + rem
        # prune outside the backward light cone of [keep_lo, keep_hi]
        a = 0
        b = new.shape[0]
        while a < b and new[a] < lo:
            a += 1
        while b > a and new[b - 1] > hi:
            b -= 1
        cur = new[a:b].copy()
        if cur.shape[0] > 0 and (cur[0] <= xlo or cur[cur.shape[0] - 1] >= xhi):
            return cur, HIT_BOUNDARY
    return cur, OK


def _evolve_np(seed, beta, xs, t0, nsteps, xlo, xhi, keep_lo, keep_hi):
    cur = np.asarray(xs, dtype=np.int64)
    for k in range(nsteps):
        t = t0 + k
        s = site_state_np(seed, beta, cur, np.full_like(cur, t))
        new = np.unique(np.concatenate([cur[s != RIGHT] - 1, cur[s != LEFT] + 1]))
        rem = nsteps - k - 1
        cur = new[(new >= keep_lo - rem) & (new <= keep_hi + rem)]
        if cur.size and (cur[0] <= xlo or cur[-1] >= xhi):
            return cur, HIT_BOUNDARY
    return cur, OK


# ---------------------------------------------------------------------------
# first meetings with the left-most path from the origin


@njit
def _flux_nb(seed, beta, nsteps, xlo):
    """Times at which a particle started strictly left of the origin first
    lands on the left-most path l from (0, 0). Met particles leave the set."""
    key = _seed_key_nb(seed)
    n0 = 0
    for x in range(-2, xlo, -2):
        n0 += 1
    cur = np.empty(n0, dtype=np.int64)
    i = 0
    for x in range(-2 * n0, 0, 2):
        cur[i] = x
        i += 1
    events = np.empty(nsteps, dtype=np.int64)
    ne = 0
    lpos = 0
    for t in range(nsteps):
        s = _state_nb(key, beta, lpos, t)
        lnext = lpos + (1 if s == RIGHT else -1)
        new = _step_nb(key, beta, cur, t)
        rem = nsteps - t - 1
        # a particle left of lnext - 2 * rem can never reach l again
        lo = lnext - 2 * rem
        a = 0
        while a < new.shape[0] and new[a] < lo:
            a += 1
        b = new.shape[0]
        if b > a and new[b - 1] >= lnext:
            events[ne] = t + 1
            ne += 1
            while b > a and new[b - 1] >= lnext:
                b -= 1
        cur = new[a:b].copy()
        lpos = lnext
    return events[:ne]


def _flux_np(seed, beta, nsteps, xlo):
    cur = np.arange(xlo - xlo % 2 + 2, 0, 2, dtype=np.int64)
    cur = cur[cur > xlo]
    events = []
    lpos = 0
    for t in range(nsteps):
        s = site_state_np(seed, beta, np.array([lpos]), np.array([t]))[0]
        lnext = lpos + (1 if s == RIGHT else -1)
        st = site_state_np(seed, beta, cur, np.full_like(cur, t))
        new = np.unique(np.concatenate([cur[st != RIGHT] - 1, cur[st != LEFT] + 1]))
        rem = nsteps - t - 1
        new = new[new >= lnext - 2 * rem]
        if new.size and new[-1] >= lnext:
            events.append(t + 1)
            new = new[new < lnext]
        cur = new
        lpos = lnext
    return np.asarray(events, dtype=np.int64)


# ---------------------------------------------------------------------------
# dispatchers


def _use_numba(impl):
    if impl is None:
        return numba_enabled()
    return impl == "numba"


def site_states(seed, beta, x, t, impl=None):
    x = np.ascontiguousarray(x, dtype=np.int64)
    t = np.ascontiguousarray(np.broadcast_to(t, x.shape), dtype=np.int64)
    if _use_numba(impl):
        return _states_nb(np.uint64(seed), float(beta), x.ravel(), t.ravel()).reshape(x.shape)
    return site_state_np(np.uint64(seed), float(beta), x, t)


def trace(seed, beta, x0, t0, nsteps, side, dual, xlo, xhi, impl=None):
    x0 = np.ascontiguousarray(np.atleast_1d(x0), dtype=np.int64)
    args = (np.uint64(seed), float(beta), x0, int(t0), int(nsteps), int(side), bool(dual), int(xlo), int(xhi))
    out, status = _trace_nb(*args) if _use_numba(impl) else _trace_np(*args)
    if status != OK:
        raise BoundaryError(f"path from t={t0} reached the x-boundary ({xlo}, {xhi})")
    return out


def pair_gaps(seeds, beta, nsteps, xlo, xhi, impl=None):
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    fn = _pair_gap_nb if _use_numba(impl) else _pair_gap_np
    out, status = fn(seeds, float(beta), int(nsteps), int(xlo), int(xhi))
    if status != OK:
        raise BoundaryError("left/right pair reached the x-boundary")
    return out


def step_with_edges(seed, beta, xs, t, impl=None):
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    if _use_numba(impl):
        return _step_edges_nb(np.uint64(seed), float(beta), xs, int(t))
    return _step_edges_np(np.uint64(seed), float(beta), xs, int(t))


def evolve_pruned(seed, beta, xs, t0, nsteps, xlo, xhi, keep_lo, keep_hi, impl=None):
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    fn = _evolve_nb if _use_numba(impl) else _evolve_np
    out, status = fn(np.uint64(seed), float(beta), xs, int(t0), int(nsteps), int(xlo), int(xhi),
                     int(keep_lo), int(keep_hi))
    if status != OK:
        raise BoundaryError("a particle reached the x-boundary")
    return out


def flux_events(seed, beta, nsteps, xlo, impl=None):
    fn = _flux_nb if _use_numba(impl) else _flux_np
    return fn(np.uint64(seed), float(beta), int(nsteps), int(xlo))


# ---------------------------------------------------------------------------
# sticky left-right pair, terminal values only


def cell_point(r, h, tau, S, Y, Yn, Sn, Bl, Bln, Bs, Bsn):
    """State at real time r (0 <= r <= h + Sn - S) inside one tau-cell.

    Without sticky time in the cell everything is linear in r. Otherwise the
    cell is read as: Y rises to the old maximum S over the first half of the
    tau-step, then a sticky stretch of length Sn - S (tau frozen, Y = S, the
    pair together), then Y runs from the new maximum to Yn.
    Returns (T, Y, Bl, Bs, together) with T the tau reached.
    """
    dS = Sn - S
    if dS <= 0.0:
        w = r / h
        return tau + w * h, Y + w * (Yn - Y), Bl + w * (Bln - Bl), Bs, False
    half = 0.5 * h
    if r <= half:
        w = r / half
        return tau + r, Y + w * (S - Y), Bl + 0.5 * w * (Bln - Bl), Bs, False
    if r <= half + dS:
        u = r - half
        return tau + half, S + u, Bl + 0.5 * (Bln - Bl), Bs + (u / dS) * (Bsn - Bs), True
    u = (r - half - dS) / half
    return tau + half + u * half, Sn + u * (Yn - Sn), Bl + (0.5 + 0.5 * u) * (Bln - Bl), Bsn, False


_cell_point_nb = njit(cell_point)


@njit
def _lr_terminal_nb(dBl, dBr, Zs, U, l0, r0, h, horizon, out):
    """Per row: free phase (if l0 > r0), then the time-changed sticky phase.

    out[i] = (L, R, S, T, meet_time) at the horizon; meet_time is -1 if the
    pair never met. Zs are standard normals driving the sticky motion.
    """
    m, n = dBl.shape
    for i in range(m):
        L = l0
        R = r0
        t_star = 0.0
        off = 0
        met = l0 <= r0
        if not met:
            k = 0
            while k < n:
                Ln = L + (dBl[i, k] - h)
                Rn = R + (dBr[i, k] + h)
                tn = (k + 1) * h
                if Ln <= Rn:
                    th = (L - R) / ((L - R) - (Ln - Rn))
                    tm = (k + th) * h
                    if tm >= horizon:
                        w = (horizon - k * h) / h
                        L = L + w * (Ln - L)
                        R = R + w * (Rn - R)
                        break
                    L = L + th * (Ln - L)
                    R = L
                    t_star = tm
                    off = k + 1
                    met = True
                    break
                if tn >= horizon:
                    w = (horizon - k * h) / h
                    L = L + w * (Ln - L)
                    R = R + w * (Rn - R)
                    break
                L = Ln
                R = Rn
                k += 1
            if not met:
                out[i, 0] = L
                out[i, 1] = R
                out[i, 2] = 0.0
                out[i, 3] = horizon
                out[i, 4] = -1.0
                continue
        # sticky phase from (L, R) at time t_star, L <= R
        l_start = L
        rem = horizon - t_star
        Y = 0.5 * (L - R)
        S = 0.0
        Bl = 0.0
        Bs = 0.0
        tau = 0.0
        tnode = 0.0
        done = False
        for j in range(n - off):
            q = off + j
            Yn = Y + (0.5 * (dBl[i, q] - dBr[i, q]) - h)
            M = 0.5 * (Y + Yn + np.sqrt((Yn - Y) ** 2 - h * np.log(U[i, q])))
            Sn = S
            if M > Sn:
                Sn = M
            taun = (j + 1) * h
            Bln = Bl + dBl[i, q]
            Bsn = Bs + np.sqrt(Sn - S) * Zs[i, q]
            tn = taun + Sn
            if tn >= rem:
                Te, Ye, Ble, Bse, tog = _cell_point_nb(rem - tnode, h, tau, S, Y, Yn, Sn, Bl, Bln, Bs, Bsn)
                # clamp rounding so S stays monotone across the last cell
                Se = min(max(rem - Te, S), Sn)
                if tog:
                    Ye = Se
                Lv = l_start + Ble + Bse - (Te + Se)
                out[i, 0] = Lv
                out[i, 1] = Lv + 2.0 * (Se - Ye)
                out[i, 2] = Se
                out[i, 3] = t_star + Te
                out[i, 4] = t_star if l0 > r0 else 0.0
                done = True
                break
            Y = Yn
            S = Sn
            tau = taun
            tnode = tn
            Bl = Bln
            Bs = Bsn
        if not done:
            out[i, 0] = np.nan
            out[i, 1] = np.nan
            out[i, 2] = np.nan
            out[i, 3] = np.nan
            out[i, 4] = np.nan
    return out


def lr_terminal(dBl, dBr, Zs, U, l0, r0, h, horizon, impl=None):
    """Terminal (L, R, S, T, meet_time) rows; see ``_lr_terminal_nb``."""
    dBl = np.ascontiguousarray(np.atleast_2d(dBl), dtype=np.float64)
    dBr = np.ascontiguousarray(np.atleast_2d(dBr), dtype=np.float64)
    Zs = np.ascontiguousarray(np.atleast_2d(Zs), dtype=np.float64)
    U = np.ascontiguousarray(np.atleast_2d(U), dtype=np.float64)
    out = np.empty((dBl.shape[0], 5))
    if _use_numba(impl):
        return _lr_terminal_nb(dBl, dBr, Zs, U, float(l0), float(r0), float(h), float(horizon), out)
    return _lr_terminal_np(dBl, dBr, Zs, U, float(l0), float(r0), float(h), float(horizon), out)


def _lr_terminal_np(dBl, dBr, Zs, U, l0, r0, h, horizon, out):
    # late import: the row solver lives with the public SDE code
    from .sde import _solve_row

    for i in range(dBl.shape[0]):
        sol = _solve_row(dBl[i], dBr[i], Zs[i], U[i], l0, r0, h, horizon)
        out[i] = (sol["L"][-1], sol["R"][-1], sol["S"][-1], sol["T"][-1], sol["meet_time"])
    return out


# ---------------------------------------------------------------------------
# dual wedge closure (emptiness of an interval reached from a full slice)


@njit
def _wedge_closed_nb(seeds, beta, a, b, n, out):
    """out[i] = 1 if the dual right-most path from (a, n) and the dual
    left-most path from (b, n) meet at some time >= 0 under config seeds[i]."""
    for i in range(seeds.shape[0]):
        key = _seed_key_nb(seeds[i])
        r = a
        l = b
        closed = 0
        for k in range(n):
            t = n - k - 1
            # a dual step from (x, t + 1) is minus the forward step at (x, t);
            # the right-most dual path takes -1 at branch points, the
            # left-most dual path +1
            sr = _state_nb(key, beta, r, t)
            sl = _state_nb(key, beta, l, t)
            r = r + (1 if sr == LEFT else -1)
            l = l + (-1 if sl == RIGHT else 1)
            if r == l:
                closed = 1
                break
        out[i] = closed
    return out


def _wedge_closed_np(seeds, beta, a, b, n, out):
    # all seeds step together; a pair stops once it has met
    r = np.full(seeds.shape[0], a, dtype=np.int64)
    l = np.full(seeds.shape[0], b, dtype=np.int64)
    live = np.ones(seeds.shape[0], dtype=bool)
    for k in range(n):
        t = n - k - 1
        idx = np.nonzero(live)[0]
        if idx.size == 0:
            break
        sr = site_state_np(seeds[idx], beta, r[idx], t)
        sl = site_state_np(seeds[idx], beta, l[idx], t)
        r[idx] += np.where(sr == LEFT, 1, -1)
        l[idx] += np.where(sl == RIGHT, -1, 1)
        live[idx[r[idx] == l[idx]]] = False
    out[:] = ~live
    return out


def wedge_closed(seeds, beta, a, b, n, impl=None):
    if (a + n) % 2 == 0 or (b + n) % 2 == 0:
        raise ValueError("wedge endpoints must be dual (odd) sites")
    if not a < b:
        raise ValueError("need a < b")
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    out = np.empty(seeds.shape[0], dtype=np.int64)
    fn = _wedge_closed_nb if _use_numba(impl) else _wedge_closed_np
    return fn(seeds, float(beta), int(a), int(b), int(n), out).astype(bool)
