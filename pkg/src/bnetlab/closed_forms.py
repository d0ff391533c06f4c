"""Closed-form hitting probabilities and densities for the left-right pair,
plus numerical self-consistency checks on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._tags import claim

__all__ = [
    "NUMERICS",
    "normal_cdf",
    "big_psi",
    "small_psi",
    "expected_density",
    "left_flux_bound",
    "pde_residual",
    "dpsi_deps_at_zero",
    "max_bm_joint_density",
    "supermartingale_F",
    "generator_drift_F",
    "lattice_pair_survival",
    "lattice_density",
    "lattice_avoidance",
]


@dataclass(frozen=True)
class Numerics:
    fd_step: float = 1e-4
    quad_tol: float = 1e-8
    richardson_h0: float = 1e-2
    richardson_levels: int = 6


NUMERICS = Numerics()


def normal_cdf(x):
    """Standard normal distribution function (erfc based, accurate in both tails)."""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")


@claim("pair-hitting-probability")
def big_psi(eps, t):
    """Probability that a left-right pair started eps apart has not met by time t."""
    _check_t(t)
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0):
        raise ValueError("eps must be non-negative")
    t = np.asarray(t, dtype=float)
    a = np.sqrt(2.0 * t)
    out = special.ndtr(a + eps / a) - np.exp(-2.0 * eps) * special.ndtr(a - eps / a)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@claim("density-formula")
def small_psi(t):
    """Density per unit length of the branching-coalescing point set at time t."""
    _check_t(t)
    t = np.asarray(t, dtype=float)
    out = np.exp(-t) / np.sqrt(np.pi * t) + 2.0 * special.ndtr(np.sqrt(2.0 * t))
    return float(out) if out.ndim == 0 else out


@claim("expected-count")
def expected_density(a: float, b: float, t: float) -> float:
    if not a < b:
        raise ValueError("need a < b")
    return (b - a) * small_psi(t)


@claim("left-flux-integral")
def left_flux_bound(s: float, t: float) -> float:
    """Integral of 2 psi(u)^2 over [s, t]."""
    if not 0 < s:
        raise ValueError("need s > 0")
    if t < s:
        raise ValueError("need s <= t")
    if t == s:
        return 0.0
    val, _ = integrate.quad(lambda u: 2.0 * small_psi(u) ** 2, s, t,
                            epsabs=NUMERICS.quad_tol, epsrel=NUMERICS.quad_tol, limit=200)
    return val


@claim("heat-equation")
def pde_residual(eps: float, t: float, step: float | None = None) -> float:
    """|d/dt Psi - (d^2/deps^2 + 2 d/deps) Psi| by central differences."""
    h = NUMERICS.fd_step if step is None else step
    if h <= 0 or h >= min(eps, t):
        raise ValueError("finite-difference step must be positive and smaller than eps and t")
    if eps - h == eps or t - h == t:
        raise ValueError("finite-difference step underflows")
    P = big_psi
    dt = (P(eps, t + h) - P(eps, t - h)) / (2 * h)
    de = (P(eps + h, t) - P(eps - h, t)) / (2 * h)
    dee = (P(eps + h, t) - 2 * P(eps, t) + P(eps - h, t)) / h**2
    return abs(dt - (dee + 2 * de))


@claim("density-is-derivative")
def dpsi_deps_at_zero(t: float, h0: float | None = None, levels: int | None = None) -> float:
    """One-sided derivative of Psi in eps at eps = 0, Richardson-extrapolated."""
    h0 = NUMERICS.richardson_h0 if h0 is None else h0
    levels = NUMERICS.richardson_levels if levels is None else levels
    # second-order one-sided start, then Richardson on the O(h^2) error series
    row = []
    for i in range(levels):
        h = h0 / 2**i
        d = (-3 * big_psi(0.0, t) + 4 * big_psi(h, t) - big_psi(2 * h, t)) / (2 * h)
        row.append(d)
    tab = [row]
    for j in range(1, levels):
        prev = tab[-1]
        fac = 2 ** (j + 1)
        tab.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
    return tab[-1][0]


@claim("max-endpoint-density")
def max_bm_joint_density(x, y, t):
    """Joint density of (running maximum, endpoint negated) style pair used in
    the hitting computation: (2(2x+y)/t) * exp(-(2x+y)^2/(2t)) / sqrt(2 pi t)
    on x >= 0, y >= -x; zero elsewhere."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = 2 * x + y
    val = (2 * z / t) * np.exp(-(z**2) / (2 * t)) / np.sqrt(2 * np.pi * t)
    val = np.where((x >= 0) & (y >= -x), val, 0.0)
    return float(val) if val.ndim == 0 else val


def supermartingale_F(t, x, y):
    """F(t, x, y) = Psi_x(t) Psi_y(t) for 0 <= x <= y."""
    if np.any(np.asarray(x) > np.asarray(y)):
        raise ValueError("need x <= y")
    return big_psi(x, t) * big_psi(y, t)


@claim("supermartingale-drift")
def generator_drift_F(t, x, y, h: float = 1e-4) -> float:
    """(-d/dt + G) F at an interior point, with
    G = dxx + 2 dx + 3 dyy + 2 dy, the generator of X = Rhat - Lhat and
    Y = (Rhat - L) + (Lhat - L) away from the reflection boundary."""
    F = lambda tt, xx, yy: big_psi(xx, tt) * big_psi(yy, tt)
    f0 = F(t, x, y)
    ft = (F(t + h, x, y) - F(t - h, x, y)) / (2 * h)
    fx = (F(t, x + h, y) - F(t, x - h, y)) / (2 * h)
    fy = (F(t, x, y + h) - F(t, x, y - h)) / (2 * h)
    fxx = (F(t, x + h, y) - 2 * f0 + F(t, x - h, y)) / h**2
    fyy = (F(t, x, y + h) - 2 * f0 + F(t, x, y - h)) / h**2
    return -ft + fxx + 2 * fx + 3 * fyy + 2 * fy



# ---------------------------------------------------------------------------
# exact finite-beta counterparts, used to calibrate the eps-bias allowances


@claim("lattice-pair-gap")
def lattice_pair_survival(beta: float, n: int, half_gap: int) -> float:
    """P[a dual right-most and a dual left-most path 2*half_gap apart have not
    met after n steps].

    Away from each other the two paths use independent sites, so half the gap
    moves +1 w.p. ((1+beta)/2)^2, -1 w.p. ((1-beta)/2)^2 and is absorbed at 0.
    Computed by forward recursion, truncated 12 sd above the mean drift.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if n < 0 or half_gap < 0:
        raise ValueError("n and half_gap must be non-negative")
    if half_gap == 0:
        return 0.0
    up = ((1 + beta) / 2) ** 2
    dn = ((1 - beta) / 2) ** 2
    stay = 1.0 - up - dn
    size = min(half_gap + n, half_gap + int(2 * beta * n + 12 * np.sqrt(n))) + 2
    p = np.zeros(size)
    p[half_gap] = 1.0
    for _ in range(n):
        q = stay * p
        q[1:] += up * p[:-1]
        q[:-1] += dn * p[1:]
        q[0] = 0.0
        p = q
    return float(p.sum())


def lattice_density(eps: float, t: float, beta: float | None = None) -> float:
    """Exact mean occupied sites per unit length at time floor(t/eps^2) when
    started from every site, in the scaling x -> eps x."""
    beta = eps if beta is None else beta
    n = int(np.floor(t / eps**2 + 1e-9))
    return lattice_pair_survival(beta, n, 1) / (2 * eps)


def lattice_avoidance(eps: float, t: float, width_units: int, beta: float | None = None) -> float:
    """Exact P[no occupied site strictly between two dual sites width_units apart]."""
    if width_units % 2:
        raise ValueError("width_units must be even")
    beta = eps if beta is None else beta
    n = int(np.floor(t / eps**2 + 1e-9))
    return 1.0 - lattice_pair_survival(beta, n, width_units // 2)
