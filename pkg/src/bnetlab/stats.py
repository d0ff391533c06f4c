"""Small statistical toolkit used by the experiments."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

__all__ = [
    "mean_stderr",
    "wilson_interval",
    "ks_one_sample",
    "ks_two_sample",
    "chi_square_independence",
    "dispersion_index",
]


def _sample(s) -> np.ndarray:
    a = np.asarray(s, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("sample must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError("sample must be finite")
    return a


def mean_stderr(s) -> tuple[float, float]:
    a = _sample(s)
    if a.size < 2:
        raise ValueError("need at least two values")
    return float(a.mean()), float(a.std(ddof=1) / math.sqrt(a.size))


def wilson_interval(successes: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    if n < 1 or not 0 <= successes <= n:
        raise ValueError("need 0 <= successes <= n and n >= 1")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    z = _st.norm.ppf(0.5 + confidence / 2)
    p = successes / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def ks_one_sample(s, cdf) -> tuple[float, float]:
    r = _st.kstest(_sample(s), cdf, method="asymp")
    return float(r.statistic), float(r.pvalue)


def ks_two_sample(s1, s2) -> tuple[float, float]:
    r = _st.ks_2samp(_sample(s1), _sample(s2), method="asymp")
    return float(r.statistic), float(r.pvalue)


def chi_square_independence(table) -> tuple[float, float]:
    """Pearson chi-square on a 2x2 table, 1 degree of freedom, no continuity correction."""
    t = np.asarray(table, dtype=float)
    if t.shape != (2, 2):
        raise ValueError("need a 2x2 table")
    n = t.sum()
    if n <= 0:
        raise ValueError("empty table")
    expected = np.outer(t.sum(axis=1), t.sum(axis=0)) / n
    if np.any(expected < 5):
        raise ValueError("sparse table: every expected cell count must be at least 5")
    stat = float(((t - expected) ** 2 / expected).sum())
    return stat, float(_st.chi2.sf(stat, 1))


def dispersion_index(counts) -> tuple[float, float]:
    """variance / mean with a delta-method standard error."""
    a = _sample(counts)
    n = a.size
    if n < 10:
        raise ValueError("need at least 10 counts")
    m = a.mean()
    if m == 0:
        raise ValueError("zero mean")
    v = a.var(ddof=1)
    idx = v / m
    c = a - m
    m3 = np.mean(c**3)
    m4 = np.mean(c**4)
    # Var(mean) = v/n, Var(var) ~ (m4 - v^2)/n, Cov(mean, var) ~ m3/n
    grad_m = -v / m**2
    grad_v = 1 / m
    var_idx = (grad_m**2 * v + grad_v**2 * (m4 - v * v) + 2 * grad_m * grad_v * m3) / n
    return float(idx), float(math.sqrt(max(var_idx, 0.0)))
