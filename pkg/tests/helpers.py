"""Shared parameter sets for the tests."""
from bribery_ge.equilibrium import EconomyParams
from bribery_ge.estimation import TechnologyParams
from bribery_ge.firmdata import BriberyRegime

# benchmark technologies with a productivity gap and moderate bribery
REFERENCE_PARAMS = EconomyParams(
    beta=0.96, delta=0.08, lam=0.1, theta=4.5,
    tech0=TechnologyParams(0.8, 0.378, 0.230),
    tech1=TechnologyParams(1.0, 0.334, 0.538, 0.05),
    bribery=BriberyRegime(0.28, 0.0196, 0.34, 0.0260),
    entry_cost=0.5,
)


def random_params(rng) -> EconomyParams:
    """A random economy near the benchmark values; modern is more capital intensive."""
    while True:
        s0, a0 = rng.uniform(0.25, 0.45), rng.uniform(0.15, 0.35)
        s1, a1 = rng.uniform(0.25, 0.45), rng.uniform(0.45, 0.65)
        if a1 * (1 - s1) > a0 * (1 - s0):
            break
    return EconomyParams(
        beta=rng.uniform(0.92, 0.98), delta=rng.uniform(0.05, 0.1), lam=rng.uniform(0.05, 0.2),
        theta=rng.uniform(3.0, 6.0),
        tech0=TechnologyParams(rng.uniform(0.3, 1.0), s0, a0),
        tech1=TechnologyParams(1.0, s1, a1, rng.uniform(0.0, 0.2)),
        bribery=BriberyRegime(rng.uniform(0, 0.6), rng.uniform(0, 0.1), rng.uniform(0, 0.6), rng.uniform(0, 0.1)),
        entry_cost=rng.uniform(0.1, 2.0),
    )


def random_policy_inputs(rng):
    """(TechnologyParams, s, tau, w, r) drawn over a broad but well-conditioned box."""
    tech = TechnologyParams(rng.uniform(0.5, 2.0), rng.uniform(0.2, 0.6), rng.uniform(0.1, 0.7),
                            rng.uniform(0.0, 0.1))
    return tech, rng.uniform(0.1, 5.0), rng.uniform(0.0, 0.5), rng.uniform(0.5, 5.0), rng.uniform(0.05, 0.3)


def ground_truth_economies(rng, n, shared=None, rho_range=(0.3, 0.8)):
    """``n`` (params, equilibrium) pairs with benchmark shared parameters and random (A0, c_e, c1).

    Draws are kept when the modern firm share lands inside ``rho_range``;
    bribery moments are drawn inside the observed cross-group ranges.
    """
    import math

    from bribery_ge.calibration import SharedParams
    from bribery_ge.equilibrium import stationary_equilibrium

    shared = shared or SharedParams()
    out = []
    while len(out) < n:
        A0 = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
        ce = math.exp(rng.uniform(math.log(0.05), math.log(5.0)))
        c1 = math.exp(rng.uniform(math.log(0.005), math.log(1.0)))
        bribery = BriberyRegime(rng.uniform(0.1, 0.3), rng.uniform(0.005, 0.02),
                                rng.uniform(0.1, 0.35), rng.uniform(0.005, 0.027))
        params = shared.economy(A0, ce, c1, bribery)
        eq = stationary_equilibrium(params)
        if rho_range[0] < eq.rho < rho_range[1]:
            out.append((params, eq))
    return out
