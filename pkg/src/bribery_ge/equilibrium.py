"""Stationary equilibrium with free entry, technology choice and Bernoulli bribes.

Every firm-level object is linear in productivity s, so aggregates reduce
to two region integrals over the entrant's pair of draws (s0, s1):

    S0 = E[s0 1{s1 <  C' s0 + D'}]      (traditional adopters)
    S1 = E[s1 1{s1 >= C' s0 + D'}]      (modern adopters)

The inner integral over s1 is closed-form (Fréchet cdf and upper partial
mean); the outer one over s0 uses the quadrature nodes from ``dist``. Bribe
draws are independent of s and resolved after the technology choice, so
each technology's aggregate is (region integral) x (mixture over bribe
outcomes of the unit-productivity policy).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from . import dist
from .estimation import TechnologyParams
from .firmdata import BriberyRegime

FREE_ENTRY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
WAGE_BRACKET = (1e-8, 1e8)


class EquilibriumError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class NoEquilibriumWage(EquilibriumError):
    pass


class InvariantViolation(EquilibriumError):
    """A solved equilibrium fails an accounting or market-clearing check."""


@dataclass(frozen=True)
class EconomyParams:
    beta: float
    delta: float
    lam: float
    theta: float
    tech0: TechnologyParams
    tech1: TechnologyParams
    bribery: BriberyRegime
    entry_cost: float

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta!r}")
        if not 0 < self.lam <= 1:
            raise ValueError(f"exit rate must lie in (0, 1], got {self.lam!r}")
        if not self.theta > 1:
            raise ValueError(f"theta must exceed 1, got {self.theta!r}")
        if self.tech0.c != 0:
            raise ValueError("traditional technology has no operating cost (tech0.c must be 0)")
        if not self.entry_cost > 0:
            raise ValueError(f"entry cost must be positive, got {self.entry_cost!r}")

    def tech(self, j: int) -> TechnologyParams:
        return (self.tech0, self.tech1)[j]

    @property
    def frechet(self) -> dist.FrechetSpec:
        return dist.FrechetSpec.unit_mean(self.theta)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta, "delta": self.delta, "lambda": self.lam, "theta": self.theta,
            "tech0": asdict(self.tech0), "tech1": asdict(self.tech1),
            "bribery": asdict(self.bribery), "entry_cost": self.entry_cost,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EconomyParams":
        return cls(
            beta=float(d["beta"]), delta=float(d["delta"]),
            lam=float(d["lambda"] if "lambda" in d else d["lam"]), theta=float(d["theta"]),
            tech0=TechnologyParams(**{k: float(v) for k, v in d["tech0"].items()}),
            tech1=TechnologyParams(**{k: float(v) for k, v in d["tech1"].items()}),
            bribery=BriberyRegime(**{k: float(v) for k, v in d["bribery"].items()}),
            entry_cost=float(d["entry_cost"]),
        )


@dataclass(frozen=True)
class FirmPolicy:
    k: float
    n: float
    y: float
    profit: float


@dataclass(frozen=True)
class ThresholdCoeffs:
    """Entrant adopts modern technology iff s1 >= C_prime * s0 + D_prime."""

    C_prime: float
    D_prime: float


@dataclass(frozen=True)
class TechAggregates:
    mass: float
    capital: float
    labor: float
    output: float
    bribes: float
    profits: float


@dataclass
class Equilibrium:
    w: float
    r: float
    R: float
    eta: float
    m: float
    M: float
    rho: float
    K: float
    Y: float
    C: float
    B: float
    wage_bill: float
    modern_output_share: float
    per_tech: tuple
    coeffs: ThresholdCoeffs
    frozen: bool = False
    wage_evaluations: int = 0
    residuals: dict = field(default_factory=dict)

    @property
    def N(self) -> float:
        return self.per_tech[0].labor + self.per_tech[1].labor

    def indicator(self, name: str) -> float:
        return {
            "Y": self.Y, "C": self.C, "K": self.K, "wage": self.w,
            "modern_output_share": self.modern_output_share,
            "entry": self.M, "modern_fraction": self.rho,
        }[name]

    def to_dict(self) -> dict:
        out = {}
        for key in ("w", "r", "R", "eta", "m", "M", "rho", "K", "Y", "C", "B",
                    "wage_bill", "modern_output_share"):
            out[key] = getattr(self, key)
        out["C_prime"] = self.coeffs.C_prime
        out["D_prime"] = self.coeffs.D_prime
        for j, agg in enumerate(self.per_tech):
            for key in ("mass", "capital", "labor", "output", "bribes", "profits"):
                out[f"{key}_{j}"] = getattr(agg, key)
        out["frozen_threshold"] = self.frozen
        out["residuals"] = dict(self.residuals)
        return out


# --------------------------------------------------------------------------
# prices and firm problem

def interest_rate(beta: float, delta: float) -> float:
    """Steady-state rental rate from the Euler equation: r = 1/beta - (1 - delta)."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    return 1.0 / beta - (1.0 - delta)


def net_interest_rate(beta: float, delta: float) -> float:
    """R = r - delta = 1/beta - 1."""
    return interest_rate(beta, delta) - delta


def h_factor(tech: TechnologyParams, w: float, r: float) -> float:
    s, a = tech.sigma, tech.alpha
    if not (w > 0 and r > 0):
        raise ValueError("factor prices must be positive")
    return ((1 - s) ** ((1 - s) / s)
            * (a / r) ** (a * (1 - s) / s)
            * ((1 - a) / w) ** ((1 - a) * (1 - s) / s))


def firm_policy(tech: TechnologyParams, s: float, tau: float, w: float, r: float) -> FirmPolicy:
    """Optimal capital, labour, output and profit of an incumbent."""
    if s < 0 or not 0 <= tau <= 1:
        raise ValueError("need s >= 0 and tau in [0, 1]")
    sg, a = tech.sigma, tech.alpha
    scale = ((1 - sg) * (1 - tau)) ** (1 / sg) * tech.A * s
    k = scale * (a / r) ** ((1 - (1 - a) * (1 - sg)) / sg) * ((1 - a) / w) ** ((1 - a) * (1 - sg) / sg)
    n = scale * (a / r) ** (a * (1 - sg) / sg) * ((1 - a) / w) ** ((1 - a * (1 - sg)) / sg)
    h = h_factor(tech, w, r)
    y = (1 - tau) ** ((1 - sg) / sg) * tech.A * s * h
    profit = sg * (1 - tau) ** (1 / sg) * tech.A * s * h - tech.c
    return FirmPolicy(k=k, n=n, y=y, profit=profit)


def lifetime_value(profit: float, lam: float, R: float) -> float:
    """Stationary solution of W = profit + (1 - lam)/(1 + R) W."""
    discount = (1 - lam) / (1 + R)
    if not -1 < discount < 1:
        raise ValueError(f"divergent value: survival discount {discount!r} >= 1")
    return profit / (1 - discount)


def _annuity(params: EconomyParams) -> float:
    R = net_interest_rate(params.beta, params.delta)
    return lifetime_value(1.0, params.lam, R)


def expected_bribe_factor(params: EconomyParams, j: int, power: float) -> float:
    """E[(1 - T_j)^power] under the Bernoulli bribe law."""
    return sum(p * (1 - t) ** power for p, t in params.bribery.outcomes(j))


def payoff_slope(params: EconomyParams, j: int, w: float, r: float) -> float:
    """a_j = sigma_j A_j h_j E[(1 - T_j)^(1/sigma_j)]: per-period expected profit per unit s, before c_j."""
    tech = params.tech(j)
    return tech.sigma * tech.A * h_factor(tech, w, r) * expected_bribe_factor(params, j, 1 / tech.sigma)


def expected_entrant_value(j: int, s: float, params: EconomyParams, w: float, r: float) -> float:
    """Expected lifetime payoff of adopting technology j with draw s (bribe not yet known)."""
    R = net_interest_rate(params.beta, params.delta)
    tech = params.tech(j)
    return sum(prob * lifetime_value(firm_policy(tech, s, tau, w, r).profit, params.lam, R)
               for prob, tau in params.bribery.outcomes(j))


def threshold_coeffs(params: EconomyParams, w: float, r: float) -> ThresholdCoeffs:
    a0 = payoff_slope(params, 0, w, r)
    a1 = payoff_slope(params, 1, w, r)
    if a1 <= 0:
        # modern payoff is flat at -c1: never strictly preferred
        return ThresholdCoeffs(math.inf, math.inf)
    return ThresholdCoeffs(a0 / a1, params.tech1.c / a1)


# --------------------------------------------------------------------------
# region integrals

@dataclass(frozen=True)
class Regions:
    eta: float
    S0: float  # E[s0 1{traditional}]
    S1: float  # E[s1 1{modern}]


def adoption_regions(coeffs: ThresholdCoeffs, nodes: dist.FrechetNodes) -> Regions:
    spec = nodes.spec
    if math.isinf(coeffs.C_prime) or math.isinf(coeffs.D_prime):
        return Regions(eta=0.0, S0=spec.mean, S1=0.0)
    s0, wts = nodes.s, nodes.weights
    t = coeffs.C_prime * s0 + coeffs.D_prime
    F_t = dist.cdf_extended(spec, t)
    eta = float(wts @ dist.survival_extended(spec, t))
    S0 = float(wts @ (s0 * F_t))
    S1 = float(wts @ dist.partial_mean(spec, t))
    return Regions(eta=min(max(eta, 0.0), 1.0), S0=S0, S1=S1)


def modern_adoption_share(coeffs: ThresholdCoeffs, frechet: dist.FrechetSpec,
                          rule: Optional[dist.QuadratureRule] = None) -> float:
    """eta = integral of [1 - F(C' s0 + D')] dF(s0)."""
    rule = rule or dist.gauss_legendre(dist.DEFAULT_NODES)
    return adoption_regions(coeffs, dist.frechet_nodes(frechet, rule)).eta


def _nodes(params: EconomyParams, count: int) -> dist.FrechetNodes:
    spec = params.frechet
    return dist.cached_nodes(spec.theta, spec.phi, count)


def entry_value(params: EconomyParams, w: float, r: Optional[float] = None,
                count: int = dist.DEFAULT_NODES, frozen: Optional[ThresholdCoeffs] = None) -> float:
    """W^e = -c_e + E[max(What_0(s0), What_1(s1))].

    With ``frozen`` the adoption regions are fixed at the given threshold
    line instead of the payoff-maximising one.
    """
    if r is None:
        r = interest_rate(params.beta, params.delta)
    return _gross_entry_value(params, w, r, count, frozen) - params.entry_cost


def _gross_entry_value(params, w, r, count, frozen) -> float:
    """E[max(What_0, What_1)], the entry payoff before the entry cost."""
    a0 = payoff_slope(params, 0, w, r)
    a1 = payoff_slope(params, 1, w, r)
    coeffs = frozen if frozen is not None else threshold_coeffs(params, w, r)
    reg = adoption_regions(coeffs, _nodes(params, count))
    value = _annuity(params) * (a0 * reg.S0 + a1 * reg.S1 - params.tech1.c * reg.eta)
    if not math.isfinite(value):
        raise EquilibriumError(f"non-finite entry value at w={w!r}")
    return value


@dataclass(frozen=True)
class WageSolution:
    w: float
    entry_value: float
    evaluations: int


def solve_wage(params: EconomyParams, count: int = dist.DEFAULT_NODES,
               frozen: Optional[ThresholdCoeffs] = None, tol: float = FREE_ENTRY_TOL) -> WageSolution:
    """Free-entry wage: W^e(w) = 0, bracketed geometrically then solved by Brent's method in log w."""
    r = interest_rate(params.beta, params.delta)
    calls = 0

    def gross(logw):
        # expected payoff before the entry cost; its monotonicity is checked without cancellation
        nonlocal calls
        calls += 1
        return _gross_entry_value(params, math.exp(logw), r, count, frozen)

    def f(logw):
        return (gross(logw) - params.entry_cost) / params.entry_cost

    lo_lim, hi_lim = (math.log(b) for b in WAGE_BRACKET)
    x0 = 0.0
    g0 = gross(x0)
    step = math.log(4.0)
    direction = 1.0 if g0 > params.entry_cost else -1.0
    xa, ga = x0, g0
    while True:
        xb = xa + direction * step
        if xb > hi_lim + 1e-12 or xb < lo_lim - 1e-12:
            raise NoEquilibriumWage(
                f"no equilibrium wage: free-entry value keeps sign {direction:+.0f} on [{WAGE_BRACKET[0]:g}, {WAGE_BRACKET[1]:g}]")
        gb = gross(xb)
        if gb == ga:
            raise NoEquilibriumWage(f"no equilibrium wage: entry value flat in w near {math.exp(xb):g}")
        # strictly decreasing in w
        if direction * (gb - ga) > 0:
            raise EquilibriumError(f"entry value not decreasing in w between {math.exp(xa):g} and {math.exp(xb):g}")
        if (gb > params.entry_cost) != (ga > params.entry_cost):
            break
        xa, ga = xb, gb
    a, b = sorted((xa, xb))
    root = optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    w = math.exp(root)
    we = entry_value(params, w, r, count, frozen)
    calls += 1
    if abs(we) > tol * params.entry_cost:
        raise EquilibriumError(f"free-entry residual {we!r} exceeds tolerance", {"free_entry": we / params.entry_cost})
    return WageSolution(w=w, entry_value=we, evaluations=calls)


# --------------------------------------------------------------------------
# aggregation

def _tech_unit_moments(params: EconomyParams, j: int, w: float, r: float) -> dict:
    """Bribe-mixed policy at unit productivity (every policy is linear in s)."""
    tech = params.tech(j)
    out = dict(k=0.0, n=0.0, y=0.0, bribes=0.0, variable_profit=0.0)
    for prob, tau in params.bribery.outcomes(j):
        pol = firm_policy(tech, 1.0, tau, w, r)
        out["k"] += prob * pol.k
        out["n"] += prob * pol.n
        out["y"] += prob * pol.y
        out["bribes"] += prob * tau * pol.y
        out["variable_profit"] += prob * (pol.profit + tech.c)
    return out


def stationary_equilibrium(params: EconomyParams, count: int = dist.DEFAULT_NODES,
                           frozen: Optional[ThresholdCoeffs] = None, check: bool = True,
                           tol: float = RESIDUAL_TOL) -> Equilibrium:
    """Solve prices, adoption, entry mass and aggregates of the stationary state.

    Steps: r from the Euler equation; w from free entry; adoption regions at
    w; entrant mass m from labour clearing (aggregates are linear in m);
    capital, output and bribes as region integrals; consumption from the
    resource constraint. Accounting identities are then re-derived along an
    independent path (factor shares and firm profits) and checked.
    """
    r = interest_rate(params.beta, params.delta)
    R = net_interest_rate(params.beta, params.delta)
    sol = solve_wage(params, count, frozen)
    w = sol.w
    coeffs = frozen if frozen is not None else threshold_coeffs(params, w, r)
    reg = adoption_regions(coeffs, _nodes(params, count))
    shares = (1.0 - reg.eta, reg.eta)
    region_s = (reg.S0, reg.S1)
    unit = [_tech_unit_moments(params, j, w, r) for j in (0, 1)]

    labor_per_entrant = sum(region_s[j] * unit[j]["n"] for j in (0, 1)) / params.lam
    if not labor_per_entrant > 0:
        raise EquilibriumError("entrants demand no labour; labour market cannot clear")
    m = 1.0 / labor_per_entrant
    M = m / params.lam

    per_tech = []
    for j in (0, 1):
        c_j = params.tech(j).c
        per_tech.append(TechAggregates(
            mass=M * shares[j],
            capital=M * region_s[j] * unit[j]["k"],
            labor=M * region_s[j] * unit[j]["n"],
            output=M * region_s[j] * unit[j]["y"],
            bribes=M * region_s[j] * unit[j]["bribes"],
            profits=M * (region_s[j] * unit[j]["variable_profit"] - c_j * shares[j]),
        ))
    K = per_tech[0].capital + per_tech[1].capital
    Y = per_tech[0].output + per_tech[1].output
    B = per_tech[0].bribes + per_tech[1].bribes
    N = per_tech[0].labor + per_tech[1].labor
    rho = per_tech[1].mass / M
    c1 = params.tech1.c
    C = Y - params.delta * K - params.entry_cost * m - c1 * rho * M

    # independent accounting: revenue net of bribes is split into factor payments, profits and operating costs
    Pi = per_tech[0].profits + per_tech[1].profits
    B_implied = Y - (r * K + w * N + Pi + c1 * per_tech[1].mass)
    C_household = (r - params.delta) * K + w * N + Pi + B - params.entry_cost * m
    residuals = {
        "free_entry": sol.entry_value / params.entry_cost,
        "labor": N - 1.0,
        "government_budget": (B - B_implied) / Y if Y else B - B_implied,
        "resource": (C - C_household) / Y if Y else C - C_household,
        "rho_eta": rho - reg.eta,
    }
    eq = Equilibrium(
        w=w, r=r, R=R, eta=reg.eta, m=m, M=M, rho=rho, K=K, Y=Y, C=C, B=B,
        wage_bill=w * N, modern_output_share=per_tech[1].output / Y if Y else 0.0,
        per_tech=tuple(per_tech), coeffs=coeffs, frozen=frozen is not None,
        wage_evaluations=sol.evaluations, residuals=residuals,
    )
    if check:
        check_equilibrium(eq, params, tol)
    return eq


def check_equilibrium(eq: Equilibrium, params: EconomyParams, tol: float = RESIDUAL_TOL) -> None:
    res = eq.residuals
    failed = {}
    if abs(res["free_entry"]) > FREE_ENTRY_TOL:
        failed["free_entry"] = res["free_entry"]
    for key in ("labor", "government_budget", "resource"):
        if not abs(res[key]) <= tol:
            failed[key] = res[key]
    if abs(res["rho_eta"]) > 1e-10:
        failed["rho_eta"] = res["rho_eta"]
    if eq.B < 0 or (params.bribery.expected_bribe(0) == 0 and params.bribery.expected_bribe(1) == 0 and eq.B != 0):
        failed["bribes"] = eq.B
    if failed:
        raise InvariantViolation(f"equilibrium invariants violated: {failed}", dict(res))


# --------------------------------------------------------------------------
# stationary distribution

def _truncated_nodes(spec: dist.FrechetSpec, upper_u: float, count: int):
    """Nodes and weights integrating dF over s with F(s) < upper_u."""
    base = dist.cached_nodes(spec.theta, spec.phi, count)
    u = dist.cdf(spec, base.s) * upper_u
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    return spec.phi * (-np.log(u)) ** (-1 / spec.theta), base.weights * upper_u


def adopter_cdf(coeffs: ThresholdCoeffs, spec: dist.FrechetSpec, j: int, s: float,
                count: int = dist.DEFAULT_NODES) -> float:
    """G_j(s) = P(s^j <= s and the entrant adopts j), per entrant."""
    if math.isinf(coeffs.C_prime):
        return float(dist.cdf(spec, s)) if j == 0 else 0.0
    Fs = float(dist.cdf(spec, s))
    if Fs == 0.0:
        return 0.0
    if j == 0:
        x, wts = _truncated_nodes(spec, Fs, count)
        return float(wts @ dist.cdf_extended(spec, coeffs.C_prime * x + coeffs.D_prime))
    # modern: s1 in [C's0 + D', s]; nonempty only for s0 below (s - D')/C'
    if coeffs.C_prime == 0:
        return max(Fs - float(dist.cdf_extended(spec, np.array([coeffs.D_prime]))[0]), 0.0)
    s0_max = (s - coeffs.D_prime) / coeffs.C_prime
    if s0_max <= 0:
        return 0.0
    x, wts = _truncated_nodes(spec, float(dist.cdf(spec, s0_max)), count)
    return float(wts @ (Fs - dist.cdf_extended(spec, coeffs.C_prime * x + coeffs.D_prime)))


def stationary_measure(eq: Equilibrium, params: EconomyParams, j: int, s: float, tau: float,
                       count: int = dist.DEFAULT_NODES) -> float:
    """mu_j(s, tau): mass of technology-j firms with draw <= s and bribe share tau."""
    return eq.m / params.lam * params.bribery.pmf(j, tau) * adopter_cdf(eq.coeffs, params.frechet, j, s, count)


def law_of_motion(mu: float, eq: Equilibrium, params: EconomyParams, j: int, s: float, tau: float,
                  count: int = dist.DEFAULT_NODES) -> float:
    """Next-period mass: survivors plus this period's adopting entrants."""
    inflow = eq.m * params.bribery.pmf(j, tau) * adopter_cdf(eq.coeffs, params.frechet, j, s, count)
    return (1 - params.lam) * mu + inflow


def with_tech(params: EconomyParams, j: int, **changes) -> EconomyParams:
    key = f"tech{j}"
    return replace(params, **{key: replace(params.tech(j), **changes)})
