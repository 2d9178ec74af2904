"""Stationary general equilibrium of firm entry, technology adoption and technology-specific bribery."""

__version__ = "0.1.0"

from .dist import FrechetSpec, QuadratureRule, cdf, expect_over_frechet, gauss_legendre, quantile
from .equilibrium import (EconomyParams, Equilibrium, EquilibriumError, FirmPolicy, ThresholdCoeffs,
                          entry_value, firm_policy, interest_rate, stationary_equilibrium)
from .estimation import TechnologyParams
from .firmdata import BriberyRegime

__all__ = [
    "FrechetSpec", "QuadratureRule", "cdf", "quantile", "gauss_legendre", "expect_over_frechet",
    "EconomyParams", "Equilibrium", "EquilibriumError", "FirmPolicy", "ThresholdCoeffs",
    "entry_value", "firm_policy", "interest_rate", "stationary_equilibrium",
    "TechnologyParams", "BriberyRegime",
]
