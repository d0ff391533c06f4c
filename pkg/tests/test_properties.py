"""Property tests for the structural invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from bnetlab import closed_forms as cf
from bnetlab.experiments import ExperimentReport, decide, read_reports_csv, write_reports_csv
from bnetlab.lattice import (
    Side,
    Window,
    check_noncrossing,
    dual_config,
    forward_from_dual,
    random_hopped_path,
    sample_config,
    trace_dual_extremal,
    trace_extremal,
    validate_path,
    wedge_entry_violations,
)
from bnetlab.particles import ParticleSet, evolve_final
from bnetlab.pathspace import STAR, CompactPoint, SampledPath, path_dist, point_dist, theta_map
from bnetlab.sde import sample_noise, solve_lr

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

betas = st.one_of(st.sampled_from([0.0, 1.0]), st.floats(0.0, 1.0))
seeds = st.integers(0, 2**64 - 1)


def small_config(beta, seed, height=10):
    # wide enough for paths started within 8 sites of the origin
    return sample_config(Window.for_paths(height, reach=8), beta, seed)


# --- lattice ------------------------------------------------------------------


@FAST
@given(betas, seeds)
def test_duality_involution(beta, seed):
    c = small_config(beta, seed)
    assert forward_from_dual(dual_config(c).arrows()) == c.arrows()


@FAST
@given(betas, seeds)
def test_noncrossing(beta, seed):
    assert check_noncrossing(small_config(beta, seed))


@FAST
@given(betas, seeds, st.integers(0, 2**32 - 1), st.integers(0, 4), st.integers(-2, 2))
def test_hopped_paths_valid_and_enveloped(beta, seed, rseed, t0, x0):
    c = small_config(beta, seed)
    z = (2 * x0 + t0 % 2, t0)
    p, _, _ = random_hopped_path(c, z, np.random.default_rng(rseed))
    assert validate_path(c, p)
    lm = trace_extremal(c, z, Side.Left).positions
    rm = trace_extremal(c, z, Side.Right).positions
    assert p.positions.size == lm.size
    assert np.all(lm <= p.positions) and np.all(p.positions <= rm)


@FAST
@given(betas, seeds)
def test_no_wedge_entries(beta, seed):
    c = small_config(beta, seed)
    assert wedge_entry_violations(c, 2, np.random.default_rng(seed % 2**32), paths_per_wedge=3) == 0


@FAST
@given(betas, seeds, st.integers(-3, 3), st.sampled_from([Side.Left, Side.Right]))
def test_path_parity(beta, seed, x, side):
    c = small_config(beta, seed)
    f = trace_extremal(c, (2 * x, 0), side)
    assert np.all((f.positions + f.times) % 2 == 0)
    d = trace_dual_extremal(dual_config(c), (2 * x + 1, 10), side)
    assert np.all((d.positions + d.times) % 2 == 1)


@FAST
@given(betas, seeds, st.lists(st.integers(-20, 20), max_size=30), st.lists(st.integers(-20, 20), max_size=30))
def test_monotone_coupling(beta, seed, a, extra):
    c = sample_config(Window.centered(64, 0, 20, margin=2), beta, seed)
    A = ParticleSet.from_iterable(0, [2 * v for v in a])
    B = ParticleSet.from_iterable(0, [2 * v for v in a + extra])
    assert evolve_final(c, A, 20).issubset(evolve_final(c, B, 20))


# --- SDE ----------------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_clock_identity_and_order(seed, l0, r0):
    sol = solve_lr(sample_noise(0.01, 1.0, seed), l0, r0)
    assert np.array_equal(sol.T + sol.S, sol.t)
    # meet_time is -1 when a crossed pair never meets before the horizon
    after = sol.t >= sol.meet_time if sol.meet_time >= 0 else np.zeros(sol.t.size, bool)
    assert np.all(sol.L[after] <= sol.R[after])
    assert np.all(np.diff(sol.S) >= 0) and np.all(np.diff(sol.T) >= 0)


# --- closed forms ---------------------------------------------------------------


@FAST
@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 20), st.floats(0.01, 20))
def test_big_psi_bounds_and_monotonicity(e1, e2, t1, t2):
    lo_e, hi_e = sorted((e1, e2))
    lo_t, hi_t = sorted((t1, t2))
    v = cf.big_psi(lo_e, lo_t)
    assert 0.0 <= v <= 1.0
    assert cf.big_psi(hi_e, lo_t) >= v - 1e-15
    assert cf.big_psi(lo_e, hi_t) <= v + 1e-15


@FAST
@given(st.floats(0.001, 100))
def test_small_psi_above_two(t):
    assert cf.small_psi(t) >= 2.0


# --- path space -----------------------------------------------------------------

finite_pts = st.builds(CompactPoint, st.floats(-50, 50), st.floats(-50, 50))
pts = st.one_of(finite_pts,
                st.sampled_from([CompactPoint(STAR, math.inf), CompactPoint(STAR, -math.inf),
                                 CompactPoint(math.inf, 0.0), CompactPoint(-math.inf, 2.0)]))


@FAST
@given(pts, pts, pts)
def test_point_metric_axioms(a, b, c):
    assert point_dist(a, a) == 0.0
    assert point_dist(a, b) == point_dist(b, a)
    assert point_dist(a, c) <= point_dist(a, b) + point_dist(b, c) + 1e-15


@FAST
@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-5, 5))
def test_theta_monotone(x1, x2, t):
    if x1 < x2:
        assert theta_map(CompactPoint(x1, t))[0] <= theta_map(CompactPoint(x2, t))[0]


paths = st.builds(lambda s, v: SampledPath(0.1 * s, 0.1, np.cumsum(v)[: 21 - s]),
                  st.integers(0, 10), st.lists(st.floats(-1, 1), min_size=21, max_size=21))


@FAST
@given(paths, paths, paths)
def test_path_metric_axioms(a, b, c):
    assert path_dist(a, a) == 0.0
    assert path_dist(a, b) == path_dist(b, a)
    assert path_dist(a, c) <= path_dist(a, b) + path_dist(b, c) + 1e-15


# --- verdicts -------------------------------------------------------------------

kinds = st.sampled_from(["two_sided", "upper_bound", "pvalue", "exact"])
nums = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(kinds, nums, st.floats(0, 1e3), nums, st.floats(0.5, 5), st.floats(0, 1))
def test_verdict_is_recomputable(tmp_path_factory, kind, est, se, target, k, bias):
    r = ExperimentReport("p", {"k": k}, est, se, target, kind, k, bias)
    assert r.verdict == decide(kind, est, se, target, k, bias)
    path = tmp_path_factory.mktemp("csv") / "r.csv"
    write_reports_csv([r], path)
    (back,) = read_reports_csv(path)
    assert back.verdict == r.verdict and back.estimate == r.estimate and back.target == r.target
