"""Simulation-vs-theory experiments. Each returns ExperimentReport objects whose
verdict is a pure function of the stored numbers.

Scaling: eps = beta unless given; one lattice step is eps^2 of physical time
and one lattice unit is eps of physical length.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import config as cfg
from .closed_forms import big_psi, left_flux_bound, small_psi, supermartingale_F  # noqa: F401
from .lattice import (
    Side,
    Window,
    check_noncrossing,
    random_hopped_path,
    sample_config,
    trace_extremal,
    validate_path,
    wedge_entry_violations,
)
from .particles import bernoulli_intensity
from .sde import llr_batch, lr_terminal_batch, sticky_times_batch
from .stats import chi_square_independence, dispersion_index, ks_one_sample, ks_two_sample, mean_stderr, wilson_interval
from ._tags import claim

__all__ = [
    "ExperimentReport",
    "decide",
    "density_counts",
    "avoidance_flags",
    "density_experiment",
    "avoidance_experiment",
    "pair_scaling_experiment",
    "sticky_time_experiment",
    "invariance_experiment",
    "backbone_experiment",
    "left_flux_experiment",
    "hitting_bound_experiment",
    "structural_suite",
    "write_reports_csv",
    "read_reports_csv",
    "summary_text",
    "SUITES",
    "run_suite",
]

KINDS = ("two_sided", "upper_bound", "pvalue", "ci", "exact")


def decide(kind, estimate, std_error, target, k=cfg.K_SIGMA, bias=0.0, ci=None) -> bool:
    """Verdict rule.

    two_sided:   |estimate - target| <= k se + bias
    upper_bound: estimate <= target + k se
    pvalue:      estimate (a p-value) > target (the level)
    ci:          ci[0] <= target <= ci[1]
    exact:       estimate == target
    """
    if kind == "two_sided":
        return bool(abs(estimate - target) <= k * std_error + bias)
    if kind == "upper_bound":
        return bool(estimate <= target + k * std_error)
    if kind == "pvalue":
        return bool(estimate > target)
    if kind == "ci":
        if ci is None:
            raise ValueError("ci verdict needs an interval")
        return bool(ci[0] <= target <= ci[1])
    if kind == "exact":
        return bool(estimate == target)
    raise ValueError(f"unknown verdict kind {kind!r}")


@dataclass
class ExperimentReport:
    name: str
    params: dict
    estimate: float
    std_error: float
    target: float
    kind: str = "two_sided"
    k: float = cfg.K_SIGMA
    bias: float = 0.0
    replicas: int = 0
    seed: int = 0
    wall_time: float = 0.0
    ci: tuple | None = None
    extra: dict = field(default_factory=dict)
    verdict: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown verdict kind {self.kind!r}")
        self.estimate = float(self.estimate)
        self.std_error = float(self.std_error)
        self.target = float(self.target)
        self.verdict = decide(self.kind, self.estimate, self.std_error, self.target, self.k, self.bias, self.ci)

    @property
    def passed(self) -> bool:
        return self.verdict

    def line(self) -> str:
        tag = "PASS" if self.verdict else "FAIL"
        if self.kind == "pvalue":
            body = f"p = {self.estimate:.4g} (need > {self.target:g})"
        elif self.kind == "exact":
            body = f"value {self.estimate:g} (need {self.target:g})"
        elif self.kind == "ci":
            body = f"target {self.target:.5g} in [{self.ci[0]:.5g}, {self.ci[1]:.5g}], est {self.estimate:.5g}"
        elif self.kind == "upper_bound":
            body = f"{self.estimate:.5g} <= {self.target:.5g} + {self.k:g}*{self.std_error:.3g}"
        else:
            body = (f"{self.estimate:.5g} vs {self.target:.5g}: |diff| {abs(self.estimate - self.target):.3g}"
                    f" <= {self.k:g}*{self.std_error:.3g} + {self.bias:.3g}")
        return f"{tag} {self.name} {json.dumps(self.params, sort_keys=True)}: {body}"


def _seeds(seed: int, tag: str, n: int) -> np.ndarray:
    """Per-replica 64-bit seeds, disjoint across experiment tags."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(tag.encode())])
    return ss.generate_state(n, dtype=np.uint64)


def _ss(seed: int, tag: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), zlib.crc32(tag.encode())])


def _steps(t_phys: float, eps: float) -> int:
    n = int(math.floor(t_phys / eps**2 + 1e-9))
    if n < 1:
        raise ValueError("t_phys shorter than one lattice step")
    return n


def _check_prob(beta):
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")


# ---------------------------------------------------------------------------
# density and interval avoidance


def density_counts(eps: float, t_phys: float, width: float, replicas: int, seed: int = 0,
                   beta: float | None = None, impl=None) -> np.ndarray:
    """Occupied-site counts at time floor(t/eps^2) in a centred half-open
    interval of physical width ``width``, from the full slice at time 0."""
    beta = eps if beta is None else beta
    _check_prob(beta)
    n = _steps(t_phys, eps)
    half = int(round(width / eps / 2))
    if half < 1:
        raise ValueError("interval shorter than one lattice unit")
    lo, hi = -half, half - 1
    first = lo - n
    first += (first % 2)
    start = np.arange(first, hi + n + 1, 2, dtype=np.int64)
    out = np.empty(replicas, dtype=np.int64)
    for i, s in enumerate(_seeds(seed, "density", replicas)):
        occ = _kernels.evolve_pruned(int(s), beta, start, 0, n, lo - n - 4, hi + n + 4, lo, hi, impl=impl)
        out[i] = occ.size
    return out


@claim("density-scaling-limit")
def density_experiment(beta: float, t_phys: float, interval_length: float, replicas: int,
                       seed: int = 0, k: float = cfg.K_SIGMA, eps: float | None = None,
                       impl=None) -> ExperimentReport:
    eps = beta if eps is None else eps
    t0 = time.perf_counter()
    counts = density_counts(eps, t_phys, interval_length, replicas, seed, beta, impl)
    half = int(round(interval_length / eps / 2))
    w_eff = 2 * half * eps
    t_eff = _steps(t_phys, eps) * eps**2
    est, se = mean_stderr(counts / w_eff)
    return ExperimentReport(
        "density", dict(beta=beta, eps=eps, t=t_phys, width=interval_length),
        est, se, small_psi(t_eff), "two_sided", k, cfg.bias_allowance("density", eps),
        replicas, seed, time.perf_counter() - t0,
        extra=dict(mean_count=float(counts.mean()), expected_count=w_eff * small_psi(t_eff)),
    )


def avoidance_flags(eps: float, t_phys: float, gap: float, replicas: int, seed: int = 0,
                    beta: float | None = None, impl=None):
    """Flags for 'no occupied site strictly inside (a, b) at time n', with a, b
    dual sites W = b - a apart. Emptiness is read off the two dual extremal
    paths from a and b: the interval is empty iff they meet by time 0.
    Returns (flags, physical width W * eps)."""
    beta = eps if beta is None else beta
    _check_prob(beta)
    n = _steps(t_phys, eps)
    W = 2 * int(round(gap / (2 * eps)))
    if W < 2:
        raise ValueError("gap shorter than two lattice units")
    a = -W // 2
    if (a + n) % 2 == 0:
        a -= 1
    flags = _kernels.wedge_closed(_seeds(seed, "avoidance", replicas), beta, a, a + W, n, impl=impl)
    return flags, W * eps


@claim("avoidance-probability")
def avoidance_experiment(beta: float, t_phys: float, gap: float, replicas: int, seed: int = 0,
                         k: float = cfg.K_SIGMA, eps: float | None = None, impl=None) -> ExperimentReport:
    eps = beta if eps is None else eps
    t0 = time.perf_counter()
    flags, w_eff = avoidance_flags(eps, t_phys, gap, replicas, seed, beta, impl)
    t_eff = _steps(t_phys, eps) * eps**2
    p = float(flags.mean())
    target = 1.0 - big_psi(w_eff, t_eff)
    # binomial standard error under the target proportion
    se = math.sqrt(target * (1 - target) / replicas)
    return ExperimentReport(
        "avoidance", dict(beta=beta, eps=eps, t=t_phys, gap=gap),
        p, se, target, "two_sided", k, cfg.bias_allowance("avoidance", eps),
        replicas, seed, time.perf_counter() - t0, extra=dict(width=w_eff),
    )


# ---------------------------------------------------------------------------
# left-right pair


@claim("pair-scaling")
def pair_scaling_experiment(beta: float, t_phys: float, replicas: int, seed: int = 0,
                            h: float | None = None, alpha: float = cfg.ALPHA, impl=None) -> ExperimentReport:
    """Two-sample KS between eps(R - L) of the lattice pair and R - L of the
    continuum pair, both started together. The continuum gap is rounded to
    the lattice 2 eps Z so that both samples live on the same set."""
    _check_prob(beta)
    eps = beta
    t0 = time.perf_counter()
    n = _steps(t_phys, eps)
    t_eff = n * eps**2
    h = 1e-4 * t_eff if h is None else h
    disc = _kernels.pair_gaps(_seeds(seed, "pair", replicas), beta, n, -n - 4, n + 4, impl=impl) * eps
    term = lr_terminal_batch(h, t_eff, 0.0, 0.0, replicas, _ss(seed, "pair-continuum"), impl=impl)
    cont = term[:, 1] - term[:, 0]
    cont_l = np.round(cont / (2 * eps)) * 2 * eps
    stat, p = ks_two_sample(disc, cont_l)
    return ExperimentReport(
        "pair_scaling", dict(beta=beta, t=t_phys, h=h), p, 0.0, alpha, "pvalue",
        replicas=replicas, seed=seed, wall_time=time.perf_counter() - t0,
        extra=dict(ks=stat, mean_disc=float(disc.mean()), mean_cont=float(cont.mean()),
                   atom_disc=float(np.mean(disc == 0)), atom_cont=float(np.mean(cont == 0))),
    )


def _exp4_cdf(x):
    return -np.expm1(-4.0 * np.asarray(x))


@claim("sticky-time-law")
def sticky_time_experiment(h: float, horizon: float, replicas: int, l0: float = 0.0, r0: float = 0.0,
                           seed: int = 0, k: float = cfg.K_SIGMA, alpha: float = cfg.ALPHA,
                           rerun_half: bool = True, impl=None) -> list[ExperimentReport]:
    """Law of the total sticky time up to the horizon.

    l0 >= r0: KS against Exponential(4). l0 < r0: atom at 0 of mass
    1 - exp(-2 (r0 - l0)) checked with a Wilson interval, and KS of the
    positive part against Exponential(4). With ``rerun_half`` the KS checks
    are repeated at h/2 and a consistency report is added.
    """
    if not (h > 0 and horizon > h):
        raise ValueError("need 0 < h < horizon")
    params = dict(h=h, horizon=horizon, l0=l0, r0=r0)
    conf = 2 * _ncdf(k) - 1
    out = []

    def run(hh):
        t0 = time.perf_counter()
        S = sticky_times_batch(hh, horizon, l0, r0, replicas, _ss(seed, f"sticky-{hh!r}"), impl=impl)
        return S, time.perf_counter() - t0

    steps = [h, h / 2] if rerun_half else [h]
    ks_verdicts = []
    for hh in steps:
        S, wt = run(hh)
        p_params = dict(params, h=hh)
        if l0 < r0:
            zero = int(np.sum(S == 0))
            lo, hi = wilson_interval(zero, replicas, conf)
            out.append(ExperimentReport("sticky_atom", p_params, zero / replicas, 0.0,
                                        -math.expm1(-2 * (r0 - l0)), "ci", k, replicas=replicas,
                                        seed=seed, wall_time=wt, ci=(lo, hi)))
            pos = S[S > 0]
            if pos.size >= 20:
                stat, p = ks_one_sample(pos, _exp4_cdf)
                out.append(ExperimentReport("sticky_tail_ks", p_params, p, 0.0, alpha, "pvalue",
                                            replicas=int(pos.size), seed=seed, wall_time=0.0,
                                            extra=dict(ks=stat)))
                ks_verdicts.append(out[-1].verdict)
        else:
            stat, p = ks_one_sample(S, _exp4_cdf)
            out.append(ExperimentReport("sticky_ks", p_params, p, 0.0, alpha, "pvalue",
                                        replicas=replicas, seed=seed, wall_time=wt,
                                        extra=dict(ks=stat, mean=float(S.mean()))))
            ks_verdicts.append(out[-1].verdict)
    if rerun_half and len(ks_verdicts) == 2:
        same = float(ks_verdicts[0] == ks_verdicts[1])
        out.append(ExperimentReport("sticky_h_consistency", params, same, 0.0, 1.0, "exact",
                                    replicas=replicas, seed=seed))
    return out


def _ncdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


# ---------------------------------------------------------------------------
# invariant law and backbone


@claim("invariant-law")
def invariance_experiment(beta: float, width: int, replicas: int, seed: int = 0,
                          k: float = cfg.K_SIGMA, alpha: float = cfg.ALPHA, impl=None) -> list[ExperimentReport]:
    """Bernoulli(rho(beta)) slice, two steps of evolution.

    Checks intensity after one and two steps, the per-site frequencies of
    the left edge and of both edges at the first step (rho (1+beta)/2 and
    rho beta), and independence of neighbouring sites after one step.
    """
    _check_prob(beta)
    if width < 40:
        raise ValueError("width must be at least 40 sites")
    t0 = time.perf_counter()
    rho = bernoulli_intensity(beta)
    ss = _ss(seed, "invariance")
    n1 = occ1 = n2 = occ2 = n0 = both = left = 0
    table = np.zeros((2, 2), dtype=np.int64)
    for child in ss.spawn(replicas):
        rng = np.random.default_rng(child)
        sites = np.arange(-width, width + 1, 2, dtype=np.int64)
        xs = sites[rng.random(sites.size) < rho]
        s64 = int(rng.integers(0, 2**63))
        x1, elo, ehi = _kernels.step_with_edges(s64, beta, xs, 0, impl=impl)
        x2, _, _ = _kernels.step_with_edges(s64, beta, x1, 1, impl=impl)
        inner = 8
        # half-step structure at time 0 on interior even sites
        sites0 = sites[(sites >= -width + inner) & (sites <= width - inner)]
        has_l = np.isin(sites0, elo[ehi == elo - 1])
        has_r = np.isin(sites0, elo[ehi == elo + 1])
        n0 += sites0.size
        left += int(has_l.sum())
        both += int((has_l & has_r).sum())
        odd = np.arange(-width + inner + 1, width - inner, 2, dtype=np.int64)
        o1 = np.isin(odd, x1)
        n1 += odd.size
        occ1 += int(o1.sum())
        even = np.arange(-width + inner, width - inner + 1, 2, dtype=np.int64)
        n2 += even.size
        occ2 += int(np.isin(even, x2).sum())
        # disjoint neighbouring pairs (x, x + 2)
        a = o1[0 : o1.size - 1 : 2]
        b = o1[1 : o1.size : 2]
        m = min(a.size, b.size)
        a, b = a[:m], b[:m]
        table += np.array([[np.sum(a & b), np.sum(a & ~b)], [np.sum(~a & b), np.sum(~a & ~b)]])
    wt = time.perf_counter() - t0
    params = dict(beta=beta, width=width)

    def freq(name, hits, n, target):
        p = hits / n
        se = math.sqrt(max(target * (1 - target), 1e-12) / n)
        return ExperimentReport(name, params, p, se, target, "two_sided", k, 0.0, replicas, seed, wt,
                                extra=dict(count=hits, sites=n))

    out = [
        freq("invariance_intensity_step1", occ1, n1, rho),
        freq("invariance_intensity_step2", occ2, n2, rho),
        freq("invariance_left_edge", left, n0, rho * (1 + beta) / 2),
        freq("invariance_both_edges", both, n0, rho * beta),
    ]
    if 0 < rho < 1:
        stat, p = chi_square_independence(table)
        out.append(ExperimentReport("invariance_pair_independence", params, p, 0.0, alpha, "pvalue",
                                    replicas=replicas, seed=seed, wall_time=wt,
                                    extra=dict(chi2=stat, table=table.tolist())))
    return out


def backbone_counts(beta: float, depth: int, width: int, replicas: int, seed: int = 0,
                    block: int | None = None, impl=None):
    """Occupied sites at the top of a full slice evolved ``depth`` steps,
    counted in consecutive blocks of ``block`` lattice units (default one
    physical length unit). Returns (block counts, sites per block)."""
    _check_prob(beta)
    if beta == 0:
        raise ValueError("backbone needs beta > 0")
    block = int(round(1.0 / beta)) if block is None else int(block)
    block += block % 2
    nblocks = width // block
    if nblocks < 2:
        raise ValueError("width must hold at least two blocks")
    lo = -(nblocks * block) // 2
    lo -= (lo + depth) % 2
    hi = lo + nblocks * block - 1
    first = lo - depth
    first += first % 2
    start = np.arange(first, hi + depth + 1, 2, dtype=np.int64)
    counts = []
    for s in _seeds(seed, "backbone", replicas):
        occ = _kernels.evolve_pruned(int(s), beta, start, 0, depth, lo - depth - 4, hi + depth + 4, lo, hi, impl=impl)
        counts.append(np.bincount((occ - lo) // block, minlength=nblocks))
    return np.concatenate(counts), block // 2


@claim("backbone-poisson-limit")
def backbone_experiment(beta: float, depth: int, width: int, replicas: int = 10, seed: int = 0,
                        k: float = cfg.K_SIGMA, impl=None) -> list[ExperimentReport]:
    """Per-site intensity vs rho(beta), rescaled intensity vs 2, and the
    dispersion index of counts in unit physical blocks vs 1."""
    t0 = time.perf_counter()
    counts, per_block = backbone_counts(beta, depth, width, replicas, seed, impl=impl)
    wt = time.perf_counter() - t0
    eps = beta
    m, se = mean_stderr(counts)
    p_site, se_site = m / per_block, se / per_block
    params = dict(beta=beta, depth=depth, width=width)
    D, se_D = dispersion_index(counts)
    extra = dict(t_phys=depth * eps**2, blocks=int(counts.size))
    return [
        ExperimentReport("backbone_site_intensity", params, p_site, se_site, bernoulli_intensity(beta),
                         "two_sided", k, 0.0, replicas, seed, wt, extra=extra),
        ExperimentReport("backbone_rescaled_intensity", params, p_site / (2 * eps), se_site / (2 * eps), 2.0,
                         "two_sided", k, cfg.bias_allowance("backbone_intensity", eps), replicas, seed, wt,
                         extra=extra),
        ExperimentReport("backbone_dispersion", params, D, se_D, 1.0, "two_sided", k,
                         cfg.bias_allowance("backbone_dispersion", eps), replicas, seed, wt, extra=extra),
    ]


# ---------------------------------------------------------------------------
# left flux and hitting bound


def left_flux_counts(beta: float, s_phys: float, t_phys: float, replicas: int, seed: int = 0, impl=None):
    if not 0 < s_phys <= t_phys:
        raise ValueError("need 0 < s_phys <= t_phys")
    _check_prob(beta)
    eps = beta
    n = _steps(t_phys, eps)
    s0 = int(math.ceil(s_phys / eps**2 - 1e-9))
    out = np.empty(replicas, dtype=np.int64)
    for i, s in enumerate(_seeds(seed, "flux", replicas)):
        ev = _kernels.flux_events(int(s), beta, n, -2 * n - 2, impl=impl)
        out[i] = int(np.sum((ev >= s0) & (ev <= n)))
    return out, s0 * eps**2, n * eps**2


@claim("left-flux-bound")
def left_flux_experiment(beta: float, s_phys: float, t_phys: float, replicas: int, seed: int = 0,
                         k: float = cfg.K_SIGMA, impl=None) -> ExperimentReport:
    """Mean number of particles from the left that first meet the left-most
    path from the origin during [s, t], against the bound integral of 2 psi^2."""
    t0 = time.perf_counter()
    counts, s_eff, t_eff = left_flux_counts(beta, s_phys, t_phys, replicas, seed, impl)
    m, se = mean_stderr(counts)
    return ExperimentReport("left_flux", dict(beta=beta, s=s_phys, t=t_phys), m, se,
                            left_flux_bound(s_eff, t_eff) if t_eff > s_eff else 0.0, "upper_bound", k,
                            replicas=replicas, seed=seed, wall_time=time.perf_counter() - t0)


@claim("hitting-estimate")
def hitting_bound_experiment(eta: float, t: float, h: float, replicas: int, seed: int = 0,
                             k: float = cfg.K_SIGMA, checkpoints: int = 5) -> list[ExperimentReport]:
    """Survival of the (L, Lhat, Rhat) system against Psi_eta(t)^2, and the
    supermartingale proxy: for each pair of consecutive checkpoints the
    paired increase of the mean proxy is standardised; the largest such
    z-score must stay below k."""
    t0 = time.perf_counter()
    surv, proxy, times = llr_batch(eta, t, h, replicas, _ss(seed, "hitting"), checkpoints)
    wt = time.perf_counter() - t0
    params = dict(eta=eta, t=t, h=h)
    p = float(surv.mean())
    se = math.sqrt(p * (1 - p) / replicas)
    bound = big_psi(eta, t) ** 2 if eta > 0 else 0.0
    zs = []
    for j in range(checkpoints):
        d = proxy[:, j + 1] - proxy[:, j]
        sd = d.std(ddof=1) / math.sqrt(replicas)
        mu = d.mean()
        zs.append(mu / sd if sd > 0 else (0.0 if mu <= 0 else math.inf))
    return [
        ExperimentReport("hitting_survival", params, p, se, bound, "upper_bound", k,
                         replicas=replicas, seed=seed, wall_time=wt),
        ExperimentReport("hitting_proxy_monotone", params, max(zs), 1.0, 0.0, "upper_bound", k,
                         replicas=replicas, seed=seed, wall_time=0.0,
                         extra=dict(means=proxy.mean(axis=0).tolist(), times=times.tolist(), z=zs)),
    ]


# ---------------------------------------------------------------------------
# deterministic invariants


@claim("structural-suite")
def structural_suite(beta_list=(0.0, 0.1, 0.5, 1.0), replicas: int = 500, seed: int = 0,
                     height: int = 24, wedge_samples: int = 3) -> list[ExperimentReport]:
    """Non-crossing, hopping closure, wedge entry and extremal envelope over
    ``replicas`` sampled configurations spread evenly over ``beta_list``."""
    t0 = time.perf_counter()
    betas = list(beta_list)
    if not betas:
        raise ValueError("need at least one beta")
    half = height + 6
    window = Window.centered(half, 0, height, margin=2)
    counts = dict(noncrossing=0, hopping_closure=0, wedge_entry=0, envelope=0)
    seeds = _seeds(seed, "structural", replicas)
    for i in range(replicas):
        beta = betas[i % len(betas)]
        config = sample_config(window, beta, int(seeds[i] >> np.uint64(1)))
        rng = np.random.default_rng(int(seeds[i]))
        if not check_noncrossing(config):
            counts["noncrossing"] += 1
        t_start = int(rng.integers(0, height // 2))
        x = int(rng.integers(-4, 5))
        x += (x + t_start) % 2
        z = (x, t_start)
        path, _, _ = random_hopped_path(config, z, rng)
        if not validate_path(config, path):
            counts["hopping_closure"] += 1
        lm = trace_extremal(config, z, Side.Left).positions
        rm = trace_extremal(config, z, Side.Right).positions
        pos = path.positions
        if pos.size != lm.size or np.any(pos < lm) or np.any(pos > rm):
            counts["envelope"] += 1
        counts["wedge_entry"] += wedge_entry_violations(config, wedge_samples, rng, paths_per_wedge=4)
    wt = time.perf_counter() - t0
    params = dict(betas=betas, height=height)
    return [ExperimentReport(f"structural_{name}", params, float(v), 0.0, 0.0, "exact",
                             replicas=replicas, seed=seed, wall_time=wt) for name, v in counts.items()]


# ---------------------------------------------------------------------------
# serialisation

CSV_FIELDS = ["name", "param_json", "estimate", "stderr", "target", "verdict", "seed", "wall_time",
              "kind", "k", "bias", "replicas", "ci_low", "ci_high"]


def _row(r: ExperimentReport) -> dict:
    return dict(
        name=r.name, param_json=json.dumps(r.params, sort_keys=True), estimate=repr(r.estimate),
        stderr=repr(r.std_error), target=repr(r.target), verdict="pass" if r.verdict else "fail",
        seed=r.seed, wall_time=f"{r.wall_time:.3f}", kind=r.kind, k=repr(float(r.k)), bias=repr(float(r.bias)),
        replicas=r.replicas, ci_low="" if r.ci is None else repr(r.ci[0]),
        ci_high="" if r.ci is None else repr(r.ci[1]),
    )


def write_reports_csv(reports, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow(_row(r))


def read_reports_csv(path) -> list[ExperimentReport]:
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            ci = None if row["ci_low"] == "" else (float(row["ci_low"]), float(row["ci_high"]))
            rep = ExperimentReport(row["name"], json.loads(row["param_json"]), float(row["estimate"]),
                                   float(row["stderr"]), float(row["target"]), row["kind"], float(row["k"]),
                                   float(row["bias"]), int(row["replicas"]), int(row["seed"]),
                                   float(row["wall_time"]), ci)
            if rep.verdict != (row["verdict"] == "pass"):
                raise ValueError(f"stored verdict of {row['name']} disagrees with its numbers")
            out.append(rep)
    return out


def summary_text(reports) -> str:
    buf = io.StringIO()
    npass = sum(r.verdict for r in reports)
    for r in reports:
        buf.write(r.line() + "\n")
    buf.write(f"{npass}/{len(reports)} passed\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# named suites used by the command line


def _suite_density(b, seed, k, beta=0.01):
    return [density_experiment(beta, t, 4.0, b["density_replicas"], seed, k) for t in (0.5, 1.0, 2.0)]


def _suite_avoidance(b, seed, k, beta=0.01):
    return [avoidance_experiment(beta, t, g, b["avoidance_replicas"], seed, k)
            for g, t in ((0.5, 1.0), (1.0, 1.0), (1.0, 2.0))]


def _suite_pair(b, seed, k, beta=0.01):
    return [pair_scaling_experiment(beta, 1.0, b["pair_replicas"], seed)]


def _suite_sticky(b, seed, k, beta=None):
    h = b["sticky_h"]
    out = sticky_time_experiment(h, 5.0, b["sticky_replicas"], 0.0, 0.0, seed, k)
    out += sticky_time_experiment(h, 5.0, b["sticky_replicas"], 0.0, 1.0, seed, k, rerun_half=False)
    return out


def _suite_invariance(b, seed, k, beta=None):
    out = []
    for bb in ((0.1, 0.3) if beta is None else (beta,)):
        out += invariance_experiment(bb, b["invariance_width"], b["invariance_replicas"], seed, k)
    return out


def _suite_backbone(b, seed, k, beta=0.02):
    depth = int(round(5 / beta**2))
    return backbone_experiment(beta, depth, b["backbone_width"], b["backbone_replicas"], seed, k)


def _suite_flux(b, seed, k, beta=0.01):
    return [left_flux_experiment(beta, 0.5, 1.5, b["flux_replicas"], seed, k)]


def _suite_hitting(b, seed, k, beta=None):
    out = []
    for eta, t in ((0.5, 1.0), (1.0, 1.0)):
        out += hitting_bound_experiment(eta, t, b["hitting_h"] * t, b["hitting_replicas"], seed, k)
    return out


def _suite_structural(b, seed, k, beta=None):
    return structural_suite((0.0, 0.1, 0.5, 1.0), b["structural_replicas"], seed)


SUITES = {
    "structural": _suite_structural,
    "invariance": _suite_invariance,
    "density": _suite_density,
    "avoidance": _suite_avoidance,
    "pair": _suite_pair,
    "sticky": _suite_sticky,
    "backbone": _suite_backbone,
    "flux": _suite_flux,
    "hitting": _suite_hitting,
}


def run_suite(name: str, budget: str = "quick", seed: int = 0, k: float = cfg.K_SIGMA,
              beta: float | None = None) -> list[ExperimentReport]:
    b = cfg.budget(budget)
    names = list(SUITES) if name == "all" else [name]
    out = []
    for nm in names:
        if nm not in SUITES:
            raise ValueError(f"unknown suite {nm!r}; choose from all, {', '.join(SUITES)}")
        fn = SUITES[nm]
        out += fn(b, seed, k) if beta is None else fn(b, seed, k, beta=beta)
    return out
