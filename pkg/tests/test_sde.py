import math

import numpy as np
import pytest
from scipy import stats

from bnetlab import sde
from bnetlab.closed_forms import big_psi
from bnetlab.stats import ks_one_sample, wilson_interval


def exp4_cdf(x):
    return stats.expon.cdf(x, scale=0.25)


# --- noise ----------------------------------------------------------------


def test_noise_is_reproducible():
    a = sde.sample_noise(1e-3, 1.0, 42)
    b = sde.sample_noise(1e-3, 1.0, 42)
    for k in ("dBl", "dBr", "dBs", "U"):
        assert np.array_equal(getattr(a, k), getattr(b, k))
    c = sde.sample_noise(1e-3, 1.0, 43)
    assert not np.array_equal(a.dBl, c.dBl)


def test_noise_moments():
    h = 1e-3
    nz = sde.sample_noise(h, 50.0, 7)
    for d in (nz.dBl, nz.dBr, nz.dBs):
        n = d.size
        assert abs(d.mean()) < 4 * math.sqrt(h / n)
        # chi-square interval for the variance
        s2 = d.var(ddof=1)
        lo = stats.chi2.ppf(0.0005, n - 1) * h / (n - 1)
        hi = stats.chi2.ppf(0.9995, n - 1) * h / (n - 1)
        assert lo < s2 < hi
    assert np.all((nz.U > 0) & (nz.U <= 1))


def test_noise_rejects_bad_grid():
    with pytest.raises(ValueError):
        sde.sample_noise(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        sde.sample_noise(1e-3, -1.0, 0)


def test_refined_noise_keeps_the_path():
    nz = sde.sample_noise(1e-2, 1.0, 3)
    fine = sde.refine_noise(nz, 4)
    assert fine.step == pytest.approx(5e-3)
    assert np.allclose(fine.dBl[0::2] + fine.dBl[1::2], nz.dBl, atol=1e-15)


# --- solve_lr ----------------------------------------------------------------


def test_zero_noise_hook():
    sol = sde.solve_lr(sde.DrivingNoise.zeros(1e-2, 2.0), 0.0, 0.0)
    assert np.allclose(sol.T, sol.t)
    assert np.all(sol.S == 0)
    assert np.allclose(sol.L, -sol.t)
    assert np.allclose(sol.R, sol.t)
    assert sol.t[-1] == pytest.approx(2.0)


def test_zero_noise_crossed_start_runs_free_then_separates():
    sol = sde.solve_lr(sde.DrivingNoise.zeros(1e-2, 2.0), 1.0, 0.0)
    assert sol.meet_time == pytest.approx(0.5)
    assert sol.L[-1] == pytest.approx(-1.0)
    assert sol.R[-1] == pytest.approx(2.0)


@pytest.mark.parametrize("l0,r0", [(0.0, 0.0), (0.0, 0.3), (0.4, 0.0), (-1.0, 2.0)])
def test_clock_identity_and_order(l0, r0):
    for seed in range(15):
        sol = sde.solve_lr(sde.sample_noise(1e-3, 1.5, seed), l0, r0)
        assert np.array_equal(sol.T + sol.S, sol.t)
        assert np.all(np.diff(sol.T) >= 0) and np.all(np.diff(sol.S) >= 0)
        after = sol.t >= max(sol.meet_time, 0.0)
        if sol.meet_time >= 0:
            assert np.all(sol.L[after] <= sol.R[after])
        assert sol.t[-1] == pytest.approx(1.5, abs=1e-12)


def test_sticky_increments_only_when_together():
    sol = sde.solve_lr(sde.sample_noise(1e-3, 2.0, 11), 0.0, 0.0)
    grew = np.concatenate([[False], np.diff(sol.S) > 0])
    assert np.array_equal(grew, sol.sticky)
    assert np.all(sol.R[sol.sticky] - sol.L[sol.sticky] >= 0)


def test_solve_lr_rejects_batch_noise_and_nan():
    nz = sde.sample_noise(1e-2, 1.0, 0, rows=3)
    with pytest.raises(ValueError):
        sde.solve_lr(nz, 0.0, 0.0)
    with pytest.raises(ValueError):
        sde.solve_lr(nz.row(0), math.nan, 0.0)


def test_sticky_time_accessor():
    sol = sde.solve_lr(sde.sample_noise(1e-3, 2.0, 5), 0.0, 0.0)
    assert sde.sticky_time(sol, 0.0) == 0.0
    vals = [sde.sticky_time(sol, t) for t in np.linspace(0, 2, 41)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        sde.sticky_time(sol, 3.0)


def test_batch_matches_single_replica_solver():
    # the batched kernel uses its own streams; compare laws, not paths
    out = sde.lr_terminal_batch(1e-3, 1.0, 0.0, 0.0, 2000, 9)
    assert np.allclose(out[:, 2] + out[:, 3], 1.0, rtol=0, atol=1e-12)
    assert np.all(out[:, 0] <= out[:, 1])


# --- distributional checks ---------------------------------------------------


def test_total_sticky_time_is_exponential_rate_four():
    S = sde.sticky_times_batch(2e-3, 5.0, 0.0, 0.0, 32000, 0)
    assert ks_one_sample(S, exp4_cdf)[1] > 0.01
    m = S.mean()
    se = S.std(ddof=1) / math.sqrt(S.size)
    assert abs(m - 0.25) < 3 * se


def test_independent_oracle_for_the_sticky_law():
    # sup_t (B_t / sqrt 2 - t) from a direct Euler walk: an independent route
    rng = np.random.default_rng(77)
    h, n, reps = 1e-4, 40000, 1500
    sup = np.zeros(reps)
    cur = np.zeros(reps)
    for _ in range(n // 2000):
        inc = rng.standard_normal((reps, 2000)) * math.sqrt(h / 2) - h
        path = cur[:, None] + inc.cumsum(axis=1)
        sup = np.maximum(sup, path.max(axis=1))
        cur = path[:, -1]
    # grid maxima undershoot the continuous ones by about 0.5826 sd per step
    sup = sup + 0.5826 * math.sqrt(h / 2)
    assert ks_one_sample(sup, exp4_cdf)[1] > 0.01


def test_ever_meet_probability():
    S = sde.sticky_times_batch(2e-3, 6.0, 0.0, 1.0, 6000, 31)
    met = int(np.sum(S > 0))
    lo, hi = wilson_interval(met, S.size, 0.999)
    assert lo <= math.exp(-2) <= hi


def test_no_meeting_probability_matches_closed_form():
    out = sde.lr_terminal_batch(5e-4, 0.5, 0.0, 1.0, 100_000, 123)
    apart = int(np.sum(out[:, 2] == 0))
    p = apart / out.shape[0]
    se = math.sqrt(p * (1 - p) / out.shape[0])
    assert abs(p - big_psi(1.0, 0.5)) < 3 * se


def test_marginals_are_drifted_brownian_motions():
    t = 1.0
    out = sde.lr_terminal_batch(1e-3, t, 0.0, 0.0, 3000, 55)
    L, R = out[:, 0], out[:, 1]
    assert ks_one_sample(L / math.sqrt(t) + math.sqrt(t), stats.norm.cdf)[1] > 0.01
    assert ks_one_sample(R / math.sqrt(t) - math.sqrt(t), stats.norm.cdf)[1] > 0.01


def test_halving_the_step_moves_sticky_time_little():
    diffs = []
    for seed in range(60):
        nz = sde.sample_noise(4e-3, 2.0, seed)
        a = sde.solve_lr(nz, 0.0, 0.0).S[-1]
        b = sde.solve_lr(sde.refine_noise(nz, 1000 + seed), 0.0, 0.0).S[-1]
        diffs.append(abs(a - b))
    # O(sqrt h) with a modest constant
    assert np.mean(diffs) < 2 * math.sqrt(4e-3)


# --- reflection --------------------------------------------------------------


def test_reflected_zero_noise():
    r = sde.solve_reflected(sde.DrivingNoise.zeros(1e-2, 1.0), 0.0, 0.0)
    assert np.allclose(r.X, 2 * r.tau)
    assert np.all(r.compensator == 0)


def test_reflected_properties_and_identity():
    for seed in range(10):
        nz = sde.sample_noise(1e-3, 1.0, seed)
        r = sde.solve_reflected(nz, 0.0, 0.0)
        assert np.all(r.X >= 0)
        assert np.all(np.diff(r.compensator) >= 0)
        sol = sde.solve_lr(nz, 0.0, 0.0)
        # interpolation error of a Brownian path on the tau grid
        assert sde.reflection_identity_error(sol, r) < 0.25


def test_reflected_needs_ordered_start():
    with pytest.raises(ValueError):
        sde.solve_reflected(sde.DrivingNoise.zeros(1e-2, 1.0), 1.0, 0.0)


def test_isolated_sticky_fraction_drops_with_resolution():
    # fixed physical radius: sticky points get neighbours as the grid refines
    def frac(h):
        vals = []
        for seed in range(20):
            sol = sde.solve_lr(sde.sample_noise(h, 1.0, seed), 0.0, 0.0)
            f = sde.isolated_sticky_fraction(sol, 5e-3)
            if not math.isnan(f):
                vals.append(f)
        return np.mean(vals)

    coarse, fine = frac(1e-3), frac(6.25e-5)
    assert fine < 0.5 * coarse
    assert fine < 0.25


# --- three-path system -------------------------------------------------------


def test_llr_zero_gap_never_survives():
    res = sde.solve_llr(sde.sample_noise(1e-3, 1.0, 0, extra=True), 0.0)
    assert not res.survived
    surv, _, _ = sde.llr_batch(0.0, 1.0, 1e-3, 200, 1)
    assert not surv.any()


def test_llr_reflection_structure():
    for seed in range(10):
        res = sde.solve_llr(sde.sample_noise(1e-3, 1.0, seed, extra=True), 0.7)
        assert np.all(res.Lhat >= res.L - 1e-12)
        d = np.diff(res.delta)
        assert np.all(d >= 0)
        # the compensator moves only in steps where Lhat comes close to L
        gap = (res.Lhat - res.L)[1:]
        assert np.all(gap[d > 0] < 0.2)


def test_llr_needs_extra_stream_and_eta():
    with pytest.raises(ValueError):
        sde.solve_llr(sde.sample_noise(1e-3, 1.0, 0), 0.5)
    with pytest.raises(ValueError):
        sde.solve_llr(sde.sample_noise(1e-3, 1.0, 0, extra=True), -0.1)


def test_llr_survival_below_squared_pair_probability():
    eta, t = 1.0, 1.0
    surv, proxy, times = sde.llr_batch(eta, t, 1e-3, 4000, 17)
    p = surv.mean()
    se = math.sqrt(p * (1 - p) / surv.size)
    assert p <= big_psi(eta, t) ** 2 + 3 * se
    assert times[0] == 0 and times[-1] == pytest.approx(t)
    assert np.array_equal(proxy[:, -1], surv.astype(float))


# --- coalescing system -------------------------------------------------------


def test_single_left_motion():
    times, L, R = sde.solve_coalescing_system([0.0], [], 1e-2, 1.0, np.random.default_rng(0))
    assert L.shape == (1, times.size) and R.shape == (0, times.size)
    finals = [sde.solve_coalescing_system([0.0], [], 1e-2, 1.0, np.random.default_rng(s))[1][0, -1]
              for s in range(400)]
    assert ks_one_sample(np.array(finals) + 1.0, stats.norm.cdf)[1] > 0.01


def test_two_left_motions_started_together_coincide():
    times, L, R = sde.solve_coalescing_system([0.3, 0.3], [], 1e-2, 1.0, np.random.default_rng(4))
    assert np.array_equal(L[0], L[1])


def test_coalescing_pair_matches_pair_solver_in_law():
    rng = np.random.default_rng(8)
    a = np.array([sde.solve_coalescing_system([0.0], [0.0], 1e-2, 1.0, rng)[2][0, -1] for _ in range(600)])
    b = sde.lr_terminal_batch(1e-2, 1.0, 0.0, 0.0, 600, 9)[:, 1]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_coalescing_system_orders_and_merges():
    rng = np.random.default_rng(12)
    for _ in range(10):
        times, L, R = sde.solve_coalescing_system([-0.5, 0.2], [0.0, 0.6], 1e-2, 1.0, rng)
        assert not np.isnan(L).any() and not np.isnan(R).any()
        # coalescing left motions never separate once merged
        same = np.nonzero(L[0] == L[1])[0]
        if same.size:
            assert np.array_equal(L[0, same[0]:], L[1, same[0]:])
