import math

import numpy as np
import pytest
from scipy import integrate, special

from bnetlab import closed_forms as cf

# Frozen oracle values. Each was computed once by an independent route
# (math.erfc based formulas, Gaussian quadrature, or a 10^6 point midpoint
# sum) and is checked here against the package implementation.
PSI_1 = 2.050254541660012  # density at t = 1
PSI_04 = 2.2268737103137126
BIG_PSI_1_1 = 0.8801639324251236  # pair started 1 apart, t = 1
BIG_PSI_1_05 = 0.9095822264335145
FLUX_1_2 = 8.182300266414407  # midpoint sum, 10^6 points
FLUX_05_15 = 8.514910451091676


def _gauss_cdf_quad(x):
    dens = lambda u: math.exp(-u * u / 2) / math.sqrt(2 * math.pi)
    return 0.5 + integrate.quad(dens, 0, x, epsabs=1e-14, epsrel=1e-14)[0]


def test_normal_cdf_basics():
    assert cf.normal_cdf(0.0) == 0.5
    assert cf.normal_cdf(math.inf) == 1.0
    assert cf.normal_cdf(-math.inf) == 0.0


@pytest.mark.parametrize("x", [-6.0, -2.5, -1.0, 0.3, 1.0, 2.0, 5.0])
def test_normal_cdf_against_quadrature(x):
    assert abs(cf.normal_cdf(x) - _gauss_cdf_quad(x)) < 1e-12


def test_normal_cdf_far_tail_relative_accuracy():
    # erfc based: stays accurate where 1 - Phi(-x) would cancel
    assert cf.normal_cdf(-30.0) == pytest.approx(0.5 * math.erfc(30 / math.sqrt(2)), rel=1e-12)


def test_big_psi_zero_gap():
    for t in (0.01, 1.0, 50.0):
        assert cf.big_psi(0.0, t) == 0.0


def test_big_psi_long_time_limit():
    for e in (0.1, 1.0, 3.0):
        assert cf.big_psi(e, 1e6) == pytest.approx(1 - math.exp(-2 * e), abs=1e-9)


def test_big_psi_frozen_values():
    assert cf.big_psi(1.0, 1.0) == pytest.approx(BIG_PSI_1_1, abs=1e-14)
    assert cf.big_psi(1.0, 0.5) == pytest.approx(BIG_PSI_1_05, abs=1e-14)


def test_big_psi_errors():
    with pytest.raises(ValueError):
        cf.big_psi(1.0, 0.0)
    with pytest.raises(ValueError):
        cf.big_psi(-0.1, 1.0)


def test_big_psi_monotone_on_grid():
    eps = np.linspace(0, 5, 201)
    ts = np.linspace(0.05, 10, 200)
    P = cf.big_psi(eps[:, None], ts[None, :])
    assert np.all((P >= 0) & (P <= 1))
    assert np.all(np.diff(P, axis=0) >= -1e-15)
    assert np.all(np.diff(P, axis=1) <= 1e-15)


def test_small_psi_values():
    assert cf.small_psi(1.0) == pytest.approx(PSI_1, abs=1e-14)
    assert cf.small_psi(0.4) == pytest.approx(PSI_04, abs=1e-14)
    assert cf.small_psi(1.0) == pytest.approx(2.0503, abs=5e-5)


def test_small_psi_limits():
    assert cf.small_psi(200.0) == pytest.approx(2.0, abs=1e-12)
    # t^{-1/2} blow-up at zero with constant 1/sqrt(pi)
    for t in (1e-8, 1e-10):
        assert cf.small_psi(t) * math.sqrt(t) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-3)


def test_small_psi_above_two_and_decreasing():
    t = np.linspace(0.01, 30, 3000)
    v = cf.small_psi(t)
    assert np.all(v >= 2)
    assert np.all(np.diff(v[t >= 1]) <= 1e-15)
    assert np.all(np.diff(v[(t >= 1) & (t <= 10)]) < 0)


def test_small_psi_is_eps_derivative_of_big_psi():
    for t in np.geomspace(0.1, 10, 12):
        assert abs(cf.dpsi_deps_at_zero(t) - cf.small_psi(t)) < 1e-6


def test_expected_density():
    assert cf.expected_density(0, 2, 1.5) == pytest.approx(2 * cf.expected_density(0, 1, 1.5))
    assert cf.expected_density(0, 1, 1) == pytest.approx(PSI_1, abs=1e-14)
    assert cf.expected_density(0, 1e-12, 1) < 1e-11
    with pytest.raises(ValueError):
        cf.expected_density(1, 1, 1)


def test_left_flux_bound_values():
    assert cf.left_flux_bound(1.0, 1.0) == 0.0
    assert cf.left_flux_bound(1.0, 2.0) == pytest.approx(FLUX_1_2, abs=1e-6)
    assert cf.left_flux_bound(0.5, 1.5) == pytest.approx(FLUX_05_15, abs=1e-6)
    assert 2 * cf.small_psi(1.0) ** 2 == pytest.approx(8.41, abs=0.01)


def test_left_flux_bound_additive():
    a = cf.left_flux_bound(0.3, 1.1) + cf.left_flux_bound(1.1, 2.7)
    assert a == pytest.approx(cf.left_flux_bound(0.3, 2.7), abs=1e-10)


def test_left_flux_bound_errors():
    with pytest.raises(ValueError):
        cf.left_flux_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        cf.left_flux_bound(2.0, 1.0)


@pytest.mark.parametrize("eps,t", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)])
def test_pde_residual_small(eps, t):
    assert cf.pde_residual(eps, t) < 1e-5


def test_pde_residual_second_order():
    for eps, t in [(1.0, 1.0), (0.5, 2.0)]:
        ratio = cf.pde_residual(eps, t, 1e-2) / cf.pde_residual(eps, t, 5e-3)
        assert 3.5 < ratio < 4.5


def test_pde_residual_rejects_bad_step():
    with pytest.raises(ValueError):
        cf.pde_residual(0.01, 1.0, 0.1)


def test_joint_density_is_a_density():
    t = 1.3
    total, _ = integrate.dblquad(lambda y, x: cf.max_bm_joint_density(x, y, t),
                                 0, 12, lambda x: -x, lambda x: 12)
    assert total == pytest.approx(1.0, abs=1e-6)
    assert cf.max_bm_joint_density(-0.1, 0.0, t) == 0.0
    assert cf.max_bm_joint_density(0.5, -0.6, t) == 0.0


@pytest.mark.parametrize("x,t", [(0.3, 0.5), (1.0, 1.0), (2.0, 3.0)])
def test_joint_density_marginal_is_reflection_tail(x, t):
    # integrating out y gives the density of the maximum, 2 phi(x / sqrt t) / sqrt t
    marg, _ = integrate.quad(lambda y: cf.max_bm_joint_density(x, y, t), -x, np.inf)
    assert marg == pytest.approx(2 * math.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t), rel=1e-8)
    # and the tail of the maximum matches 2 (1 - Phi(x / sqrt t))
    tail, _ = integrate.quad(lambda m: 2 * math.exp(-m * m / (2 * t)) / math.sqrt(2 * math.pi * t), x, np.inf)
    assert tail == pytest.approx(2 * special.ndtr(-x / math.sqrt(t)), rel=1e-8)


def test_joint_density_against_sampled_brownian_maxima():
    # exact sampler: endpoint B ~ N(0, t), max of the bridge via the exponential trick
    rng = np.random.default_rng(2024)
    t, n = 1.0, 200_000
    b = rng.normal(0, math.sqrt(t), n)
    m = 0.5 * (b + np.sqrt(b * b + 2 * t * rng.exponential(size=n)))
    x, y = m, -b
    edges_x = [0, 0.4, 0.8, 1.3, np.inf]
    edges_y = [-np.inf, -0.5, 0.0, 0.5, 1.0, np.inf]
    obs, _, _ = np.histogram2d(x, y, bins=[edges_x, edges_y])
    exp = np.zeros_like(obs)
    for i in range(4):
        for j in range(5):
            xa, xb = edges_x[i], min(edges_x[i + 1], 10)
            ya, yb = max(edges_y[j], -10), min(edges_y[j + 1], 10)
            exp[i, j] = n * integrate.dblquad(lambda yy, xx: cf.max_bm_joint_density(xx, yy, t),
                                              xa, xb, lambda xx: max(ya, -xx), lambda xx: max(yb, -xx))[0]
    mask = exp > 5
    stat = float(((obs - exp)[mask] ** 2 / exp[mask]).sum())
    from scipy.stats import chi2
    assert chi2.sf(stat, int(mask.sum()) - 1) > 1e-3


def test_supermartingale_F_basics():
    assert cf.supermartingale_F(1.0, 0.0, 1.0) == 0.0
    for x, y in [(0.1, 0.5), (1.0, 1.0), (0.5, 3.0)]:
        assert cf.supermartingale_F(0.7, x, y) <= cf.big_psi(y, 0.7)
    with pytest.raises(ValueError):
        cf.supermartingale_F(1.0, 2.0, 1.0)


def test_supermartingale_drift_nonpositive():
    worst = max(cf.generator_drift_F(t, x, y)
                for t in (0.3, 0.5, 1.0, 2.0, 4.0)
                for x in (0.2, 0.5, 1.0, 2.0)
                for y in (x + 0.1, x + 0.5, x + 1.5))
    # finite-difference noise is far below 1e-6 at these steps
    assert worst < 1e-6


def test_numerics_constants_centralised():
    assert cf.NUMERICS.fd_step == 1e-4
    assert cf.NUMERICS.quad_tol == 1e-8
