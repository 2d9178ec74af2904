"""Model-generated firm panels for estimator checks and end-to-end runs.

Firms draw (s0, s1), adopt by the equilibrium line, draw a bribe, and
choose inputs by the closed-form policy. Two departures from the
frictionless model make the production regression identified:

* firm-specific shadow wedges on labour and on capital (frictions not paid
  as factor income); without them labour is a deterministic function of
  productivity and capital, collinear with the control function;
* an intermediate-input proxy m = iota * A * s * k^0.5, which is invertible
  in s given k, as a control function needs.

Sales carry small multiplicative measurement noise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dist
from .equilibrium import EconomyParams, ThresholdCoeffs, firm_policy, interest_rate, stationary_equilibrium
from .firmdata import FirmRecord


@dataclass(frozen=True)
class PanelNoise:
    wedge_sd: float = 0.15
    sales_sd: float = 0.02
    intermediate_share: float = 0.01


def synthetic_firms(params: EconomyParams, n_firms: int, rng: np.random.Generator,
                    survey_id: str = "synthetic", w: Optional[float] = None,
                    coeffs: Optional[ThresholdCoeffs] = None, noise: PanelNoise = PanelNoise()):
    """Returns (records, technology labels) for ``n_firms`` firms."""
    if w is None or coeffs is None:
        eq = stationary_equilibrium(params)
        w, coeffs = eq.w, eq.coeffs
    r = interest_rate(params.beta, params.delta)
    spec = params.frechet
    s0 = dist.sample(spec, n_firms, rng)
    s1 = dist.sample(spec, n_firms, rng)
    modern = s1 >= coeffs.C_prime * s0 + coeffs.D_prime
    s = np.where(modern, s1, s0)
    bribed = rng.random(n_firms)
    wedge = np.exp(noise.wedge_sd * rng.standard_normal(n_firms))
    cap_wedge = np.exp(noise.wedge_sd * rng.standard_normal(n_firms))
    eps = np.exp(noise.sales_sd * rng.standard_normal(n_firms))

    rows = []
    for i in range(n_firms):
        j = int(modern[i])
        tech = params.tech(j)
        p, tau_bar = params.bribery.p(j), params.bribery.tau(j)
        tau = tau_bar if bribed[i] < p else 0.0
        pol = firm_policy(tech, float(s[i]), tau, w * wedge[i], r * cap_wedge[i])
        rows.append((j, tau, pol, tech.A * s[i]))
    # scale the proxy so intermediates are a small share of sales on average
    proxy = np.array([As * pol.k ** 0.5 for _, _, pol, As in rows])
    sales = np.array([pol.y for _, _, pol, _ in rows]) * eps
    iota = noise.intermediate_share * sales.mean() / proxy.mean()

    records = []
    for i, (j, tau, pol, _) in enumerate(rows):
        records.append(FirmRecord(
            survey_id=survey_id, sales=float(sales[i]), capital=float(pol.k),
            labor_cost=float(w * pol.n), intermediate_cost=float(iota * proxy[i]),
            workers=float(pol.n), bribe_share=float(tau)))
    return records, modern.astype(int).tolist()


def separable_ratios(n_per_group: int, rng: np.random.Generator, low=(1.0, 2.0), high=(5.0, 8.0)):
    """Capital-labour ratios from two disjoint uniform bands; returns (ratios, labels)."""
    a = rng.uniform(*low, n_per_group)
    b = rng.uniform(*high, n_per_group)
    ratios = np.concatenate([a, b])
    labels = np.array([0] * n_per_group + [1] * n_per_group)
    order = rng.permutation(ratios.size)
    return ratios[order], labels[order]
