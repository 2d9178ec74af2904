import math

import mpmath as mp
import numpy as np
import pytest

from bribery_ge import estimation
from bribery_ge.equilibrium import interest_rate, stationary_equilibrium
from bribery_ge.estimation import EstimationError, TechnologyParams
from bribery_ge.firmdata import FirmRecord
from bribery_ge.synthetic import PanelNoise, synthetic_firms

from helpers import REFERENCE_PARAMS


# --------------------------------------------------------------------------
# design

def test_design_order_one():
    X = estimation.polynomial_design([1.0, 2.0, 3.0], [4.0, 5.0, 7.0], 1)
    assert estimation.design_columns(1) == ["1", "k", "m", "k*m"]
    np.testing.assert_array_equal(X, [[1, 1, 4, 4], [1, 2, 5, 10], [1, 3, 7, 21]])


def test_design_order_five_has_twelve_columns():
    k, m = np.array([1.5, 2.0]), np.array([0.5, 3.0])
    X = estimation.polynomial_design(k, m, 5)
    assert X.shape == (2, 12)
    cols = estimation.design_columns(5)
    assert len(cols) == 12 and cols.count("k*m") == 1
    for q in range(1, 6):
        name_k = "k" if q == 1 else f"k^{q}"
        name_m = "m" if q == 1 else f"m^{q}"
        np.testing.assert_allclose(X[:, cols.index(name_k)], k**q)
        np.testing.assert_allclose(X[:, cols.index(name_m)], m**q)


def test_design_errors():
    with pytest.raises(ValueError):
        estimation.polynomial_design([1, 2], [1], 2)
    with pytest.raises(ValueError):
        estimation.polynomial_design([1, 2], [1, 2], 0)


def test_constant_inputs_flagged_as_collinear(rng):
    n = rng.uniform(1, 2, 50)
    with pytest.raises(EstimationError, match="collinear columns"):
        estimation.estimate_labor_elasticity(n, n, np.full(50, 2.0), np.full(50, 3.0), order=2,
                                             scale="levels")


# --------------------------------------------------------------------------
# regression

def test_exact_linear_recovery(rng):
    n, k, m = (rng.uniform(0.5, 2.0, 200) for _ in range(3))
    y = 0.4 * n + 2 * k + 3 * m
    est = estimation.estimate_labor_elasticity(y, n, k, m, order=5, scale="levels")
    assert abs(est.gamma - 0.4) < 1e-10
    assert est.n_obs == 200 and est.columns[0] == "n"


def test_matches_independent_normal_equations(rng):
    n, k, m = (rng.lognormal(0, 0.5, 300) for _ in range(3))
    y = 0.3 * np.log(n) + np.sin(np.log(k)) + 0.5 * np.log(m) ** 2 + 0.05 * rng.standard_normal(300)
    est = estimation.estimate_labor_elasticity(np.exp(y), n, k, m, order=5, scale="log")
    X = np.column_stack([np.log(n), estimation.polynomial_design(np.log(k), np.log(m), 5)])
    with mp.workdps(60):
        Xm = mp.matrix(X.tolist())
        beta = mp.lu_solve(Xm.T * Xm, Xm.T * mp.matrix(y.tolist()))
        expected = float(beta[0])
    assert est.gamma == pytest.approx(expected, rel=1e-8)


def test_noisy_recovery_monte_carlo(rng):
    covered, gammas = 0, []
    for _ in range(100):
        n, k, m = (rng.uniform(0.5, 2.0, 10_000) for _ in range(3))
        y = 0.4 * n + 2 * k + 3 * m + rng.normal(0, 0.1, 10_000)
        est = estimation.estimate_labor_elasticity(y, n, k, m, order=2, scale="levels")
        covered += abs(est.gamma - 0.4) < 3 * est.std_error
        gammas.append(est.gamma)
    assert covered >= 95
    assert abs(np.mean(gammas) - 0.4) < 3 * np.std(gammas) / math.sqrt(100)


def test_regression_input_errors():
    with pytest.raises(ValueError):
        estimation.estimate_labor_elasticity([1, 2], [1], [1, 2], [1, 2])
    with pytest.raises(EstimationError, match="more observations"):
        estimation.estimate_labor_elasticity([1.0] * 5, [1.0, 2, 3, 4, 5], [1.0, 3, 2, 5, 4],
                                             [2.0, 1, 4, 3, 5], order=5)
    with pytest.raises(EstimationError, match="positive"):
        estimation.estimate_labor_elasticity([0.0, 1], [1, 1], [1, 1], [1, 1], scale="log")
    with pytest.raises(ValueError):
        estimation.estimate_labor_elasticity([1.0], [1], [1], [1], scale="cubic")


def test_group_dummies_absorb_level_shifts(rng):
    n, k, m = (rng.uniform(0.5, 2.0, 400) for _ in range(3))
    groups = np.repeat(["a", "b"], 200)
    y = 0.4 * n + k + m + np.where(groups == "b", 5.0, 0.0)
    est = estimation.estimate_labor_elasticity(y, n, k, m, order=2, scale="levels", groups=groups)
    assert abs(est.gamma - 0.4) < 1e-10
    assert "group=b" in est.columns
    with pytest.raises(ValueError):
        estimation.estimate_labor_elasticity(y, n, k, m, groups=["a"])


def _panel(j, n_firms, rng, noise=PanelNoise()):
    eq = stationary_equilibrium(REFERENCE_PARAMS)
    recs, labels = synthetic_firms(REFERENCE_PARAMS, n_firms, rng, w=eq.w, coeffs=eq.coeffs, noise=noise)
    return [r for r, lab in zip(recs, labels) if lab == j], eq


@pytest.mark.parametrize("j", [0, 1])
def test_synthetic_recovery_in_logs(j, rng):
    recs, _ = _panel(j, 20_000, rng)
    recs = recs[:2000]
    est = estimation.estimate_labor_elasticity(
        [r.sales for r in recs], [r.labor_cost for r in recs], [r.capital for r in recs],
        [r.intermediate_cost for r in recs])
    assert abs(est.gamma - REFERENCE_PARAMS.tech(j).gamma) < 0.02


def test_levels_regression_does_not_recover_elasticity(rng):
    # Cobb-Douglas firms: the level coefficient on labour cost is not an elasticity
    recs, _ = _panel(1, 3000, rng)
    est = estimation.estimate_labor_elasticity(
        [r.sales for r in recs], [r.labor_cost for r in recs], [r.capital for r in recs],
        [r.intermediate_cost for r in recs], scale="levels")
    assert abs(est.gamma - REFERENCE_PARAMS.tech1.gamma) > 0.2


# --------------------------------------------------------------------------
# sigma and alpha

def test_recover_table_pairs():
    sigma, alpha = estimation.recover_sigma_alpha(0.479, 0.378)
    assert sigma == 0.378 and round(alpha, 3) == 0.230
    sigma, alpha = estimation.recover_sigma_alpha(0.308, 0.334)
    assert sigma == 0.334 and round(alpha, 3) == 0.538
    assert round((1 - 0.230) * (1 - 0.378), 3) == 0.479
    assert round((1 - 0.538) * (1 - 0.334), 3) == 0.308


def test_recover_boundary_and_errors():
    with pytest.raises(EstimationError, match="inconsistent moments"):
        estimation.recover_sigma_alpha(0.5, 0.5)
    with pytest.raises(EstimationError):
        estimation.recover_sigma_alpha(1.2, 0.3)
    with pytest.raises(EstimationError):
        estimation.recover_sigma_alpha(0.3, 0.0)


def test_recover_round_trip(rng):
    for sigma, alpha in rng.uniform(0.01, 0.99, (500, 2)):
        gamma = (1 - alpha) * (1 - sigma)
        s, a = estimation.recover_sigma_alpha(gamma, sigma)
        assert s == sigma and abs(a - alpha) < 1e-12


def test_technology_invariants():
    t = TechnologyParams(1.0, 0.378, 0.230)
    assert t.gamma == pytest.approx(0.47894)
    assert TechnologyParams(1.0, 0.334, 0.538).capital_intensity > t.capital_intensity
    for bad in ({"sigma": 1.0}, {"alpha": 0.0}, {"c": -1.0}, {"A": -1.0}):
        with pytest.raises(ValueError):
            TechnologyParams(**{"A": 1.0, "sigma": 0.3, "alpha": 0.3, **bad})


def test_profit_share_equals_sigma_on_frictionless_panel(rng):
    r = interest_rate(REFERENCE_PARAMS.beta, REFERENCE_PARAMS.delta)
    for j in (0, 1):
        recs, _ = _panel(j, 4000, rng, PanelNoise(wedge_sd=0.0, sales_sd=0.0, intermediate_share=0.0))
        share = estimation.mean_profit_share(recs, r)
        assert share == pytest.approx(REFERENCE_PARAMS.tech(j).sigma, rel=1e-10)


def test_profit_share_floor_and_bribe_adjustment():
    recs = [FirmRecord("S", 10.0, 0.0, 20.0, 0.0, None, 0.0),
            FirmRecord("S", 10.0, 10.0, 2.0, 1.0, None, 0.5)]
    # first firm loses money (floored at 0); second: revenue 5, profit 5 - 2 - 1 - 1
    assert estimation.mean_profit_share(recs, 0.1) == pytest.approx(0.5 * 0.2)
    with pytest.raises(EstimationError):
        estimation.mean_profit_share([FirmRecord("S", 0.0, 1.0, 1.0, 1.0)], 0.1)


def test_estimate_technology_end_to_end(rng):
    recs, _ = _panel(1, 3000, rng)
    tech, est = estimation.estimate_technology(recs, interest_rate(0.96, 0.08))
    assert abs(est.gamma - REFERENCE_PARAMS.tech1.gamma) < 0.02
    assert tech.gamma == pytest.approx(est.gamma, rel=1e-12)
