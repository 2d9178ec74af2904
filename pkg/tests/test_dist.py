import math

import mpmath as mp
import numpy as np
import pytest
from scipy import special

from bribery_ge import dist
from bribery_ge.dist import FrechetSpec, QuadratureRule

# frozen mpmath values (40 digits, direct formula / adaptive quadrature)
CDF_AT_ONE_THETA_45 = 0.63326415420133773
SECOND_MOMENT_THETA_45 = 1.1300822405956204
PARTIAL_MEAN_13_THETA_45 = 0.22072614339491647


def test_unit_mean_scale_theta_two():
    assert dist.unit_mean_scale(2.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    assert dist.unit_mean_scale(2.0) == pytest.approx(0.5641896, abs=5e-8)


def test_unit_mean_scale_theta_45_against_mpmath_gamma():
    with mp.workdps(30):
        expected = float(1 / mp.gamma(mp.mpf(7) / 9))
    assert dist.unit_mean_scale(4.5) == pytest.approx(expected, rel=1e-14)
    spec = FrechetSpec.unit_mean(4.5)
    assert abs(dist.expect_over_frechet(spec, lambda s: s, dist.gauss_legendre(200)) - 1) < 1e-8


def test_unit_mean_scale_boundary():
    # Gamma(1 - 1/theta) blows up as theta -> 1, so the scale shrinks towards 0
    phi = dist.unit_mean_scale(1.0001)
    assert 0 < phi < 2e-4
    assert phi == pytest.approx(1 / special.gamma(1 - 1 / 1.0001), rel=1e-14)
    with pytest.raises(ValueError, match="mean undefined"):
        dist.unit_mean_scale(1.0)
    with pytest.raises(ValueError):
        FrechetSpec(theta=1.0, phi=1.0)
    with pytest.raises(ValueError):
        FrechetSpec(theta=2.0, phi=0.0)


def test_cdf_examples():
    spec = FrechetSpec(theta=3.0, phi=0.7)
    assert dist.cdf(spec, 0.7) == pytest.approx(math.exp(-1), rel=1e-15)
    assert dist.cdf(spec, 0.0) == 0.0
    assert dist.cdf(spec, 1e6) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dist.cdf(spec, -0.1)


def test_cdf_matches_frozen_mpmath_value():
    spec = FrechetSpec.unit_mean(4.5)
    assert dist.cdf(spec, 1.0) == pytest.approx(CDF_AT_ONE_THETA_45, rel=1e-14)


def test_cdf_vectorised():
    spec = FrechetSpec.unit_mean(4.5)
    s = np.array([0.0, 0.5, 1.0, 2.0])
    out = dist.cdf(spec, s)
    assert out.shape == (4,)
    assert np.all(np.diff(out) > 0)


def test_quantile_examples():
    spec = FrechetSpec(theta=4.5, phi=0.8)
    assert dist.quantile(spec, math.exp(-1)) == pytest.approx(0.8, rel=1e-14)
    assert dist.quantile(spec, 0.5) == pytest.approx(0.8 * math.log(2) ** (-1 / 4.5), rel=1e-14)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            dist.quantile(spec, bad)


def test_quantile_cdf_round_trip(rng):
    spec = FrechetSpec.unit_mean(4.5)
    u = rng.uniform(1e-6, 1 - 1e-6, 1000)
    back = dist.cdf(spec, dist.quantile(spec, u))
    assert np.max(np.abs(back - u) / u) < 1e-12


def test_cdf_quantile_identity_on_log_grid():
    spec = FrechetSpec.unit_mean(4.5)
    s = np.logspace(-0.7, 1.3, 200)
    assert np.max(np.abs(dist.quantile(spec, dist.cdf(spec, s)) / s - 1)) < 1e-10


def test_gauss_legendre_small_rules():
    one = dist.gauss_legendre(1)
    assert one.nodes == (0.0,) and one.weights == (2.0,)
    two = dist.gauss_legendre(2)
    assert two.nodes == pytest.approx((-1 / math.sqrt(3), 1 / math.sqrt(3)), rel=1e-15)
    assert two.weights == pytest.approx((1.0, 1.0), rel=1e-15)
    with pytest.raises(ValueError):
        dist.gauss_legendre(0)


def test_gauss_legendre_exactness():
    rule = dist.gauss_legendre(64)
    x, w = np.array(rule.nodes), np.array(rule.weights)
    assert abs(w @ x**10 - 2 / 11) < 1e-14
    # degree 2n-1 exact for a small rule
    r5 = dist.gauss_legendre(5)
    assert abs(np.array(r5.weights) @ np.array(r5.nodes) ** 8 - 2 / 9) < 1e-14


def test_quadrature_rule_invariants():
    with pytest.raises(ValueError):
        QuadratureRule(nodes=(0.1, 0.0), weights=(1.0, 1.0))
    with pytest.raises(ValueError):
        QuadratureRule(nodes=(0.0, 0.1), weights=(1.0, -1.0))
    with pytest.raises(ValueError):
        QuadratureRule(nodes=(0.0,), weights=(1.0, 1.0))
    assert dist.gauss_legendre(7).count == 7


def test_expectation_of_constant_is_one():
    spec = FrechetSpec.unit_mean(4.5)
    assert dist.expect_over_frechet(spec, lambda s: np.ones_like(s), dist.gauss_legendre(200)) == \
        pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("theta", [2.0, 2.5, 3.0, 4.5, 6.0, 8.0, 10.0])
def test_unit_mean_across_shapes(theta):
    spec = FrechetSpec.unit_mean(theta)
    assert abs(dist.expect_over_frechet(spec, lambda s: s, dist.gauss_legendre(200)) - 1) < 1e-8


def test_second_moment():
    spec = FrechetSpec.unit_mean(4.5)
    got = dist.expect_over_frechet(spec, lambda s: s**2, dist.gauss_legendre(200))
    exact = special.gamma(1 - 2 / 4.5) / special.gamma(1 - 1 / 4.5) ** 2
    assert got == pytest.approx(exact, abs=1e-6)
    assert got == pytest.approx(SECOND_MOMENT_THETA_45, abs=1e-12)


def test_scalar_only_integrand_falls_back_per_node():
    spec = FrechetSpec.unit_mean(4.5)
    got = dist.expect_over_frechet(spec, lambda s: math.sqrt(s), dist.gauss_legendre(100))
    exact = special.gamma(1 - 0.5 / 4.5) * spec.phi ** 0.5
    assert got == pytest.approx(exact, rel=1e-10)


def test_non_finite_integrand_names_node():
    spec = FrechetSpec.unit_mean(4.5)
    with pytest.raises(ValueError, match="productivity node s="):
        dist.expect_over_frechet(spec, lambda s: np.where(s > 1, np.inf, s), dist.gauss_legendre(50))


def test_partial_mean_against_frozen_value():
    spec = FrechetSpec.unit_mean(4.5)
    assert dist.partial_mean(spec, 1.3) == pytest.approx(PARTIAL_MEAN_13_THETA_45, rel=1e-13)
    assert dist.partial_mean(spec, -1.0) == pytest.approx(1.0, rel=1e-15)
    assert dist.partial_mean(spec, 1e9) == pytest.approx(0.0, abs=1e-30)


def test_monte_carlo_mean(rng):
    spec = FrechetSpec.unit_mean(4.5)
    draws = dist.sample(spec, 1_000_000, rng)
    assert abs(draws.mean() - 1) < 0.01
