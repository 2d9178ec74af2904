"""Per-country moment matching for (A0, c_e, c1) with A1 = 1.

The three targets (GDP per capita Y, modern firm share rho, modern output
share) identify the model exactly. The firm share and the output share
depend only on the adoption line (C', D') and the bribery regime, and so
does the labour share w/Y. Calibration therefore inverts in stages:

1. solve (C', D') from (rho, output share) by nested bracketing;
2. read off w = (w/Y) * Y_target;
3. back out A0 from C', c1 from D', and c_e from the free-entry condition.

A derivative-free simplex over (log A0, log c_e, log c1) with the full
equilibrium solver inside is kept as an alternative method.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np
from scipy import optimize

from . import dist
from .equilibrium import (EconomyParams, EquilibriumError, ThresholdCoeffs, adoption_regions,
                          expected_bribe_factor, h_factor, interest_rate, lifetime_value,
                          net_interest_rate, stationary_equilibrium)
from .estimation import TechnologyParams
from .firmdata import BriberyRegime

TARGET_COLUMNS = ("country", "year", "gdp_pc", "modern_share", "modern_output_share",
                  "p0", "tau0", "p1", "tau1")
SIMPLEX_RESTARTS = 20


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class SharedParams:
    """Parameters common to all countries."""

    beta: float = 0.96
    delta: float = 0.08
    lam: float = 0.10
    theta: float = 4.5
    sigma0: float = 0.378
    alpha0: float = 0.230
    sigma1: float = 0.334
    alpha1: float = 0.538

    def economy(self, A0: float, entry_cost: float, c1: float, bribery: BriberyRegime) -> EconomyParams:
        return EconomyParams(
            beta=self.beta, delta=self.delta, lam=self.lam, theta=self.theta,
            tech0=TechnologyParams(A=A0, sigma=self.sigma0, alpha=self.alpha0),
            tech1=TechnologyParams(A=1.0, sigma=self.sigma1, alpha=self.alpha1, c=c1),
            bribery=bribery, entry_cost=entry_cost,
        )

    @property
    def tfp_elasticity(self) -> float:
        """d log(A0) / d log(w) at fixed (C', D'); A1/A0 scales with Y to minus this power."""
        g0 = (1 - self.alpha0) * (1 - self.sigma0) / self.sigma0
        g1 = (1 - self.alpha1) * (1 - self.sigma1) / self.sigma1
        return g0 - g1


@dataclass(frozen=True)
class CountryTargets:
    gdp_pc_normalized: float
    modern_share: float
    modern_output_share: float
    bribery: BriberyRegime
    country: str = ""
    year: str = ""

    def __post_init__(self):
        if not self.gdp_pc_normalized > 0:
            raise ValueError(f"GDP per capita must be positive, got {self.gdp_pc_normalized!r}")
        for name in ("modern_share", "modern_output_share"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    @property
    def key(self) -> str:
        return f"{self.country}_{self.year}" if self.year else self.country


@dataclass
class CalibrationResult:
    params: Optional[EconomyParams]
    residuals: dict
    converged: bool
    iterations: int
    targets: Optional[CountryTargets] = None
    equilibrium: object = None
    coeffs: Optional[ThresholdCoeffs] = None
    reason: str = ""

    @property
    def tfp_ratio(self) -> float:
        return self.params.tech1.A / self.params.tech0.A

    def to_dict(self) -> dict:
        out = {
            "country": self.targets.country if self.targets else "",
            "year": self.targets.year if self.targets else "",
            "gdp_pc": self.targets.gdp_pc_normalized if self.targets else None,
            "converged": self.converged,
            "reason": self.reason,
            "iterations": self.iterations,
            "residuals": dict(self.residuals),
        }
        if self.params is not None:
            out.update(A0=self.params.tech0.A, A1=self.params.tech1.A, c1=self.params.tech1.c,
                       entry_cost=self.params.entry_cost, params=self.params.to_dict())
        if self.equilibrium is not None:
            out["equilibrium"] = self.equilibrium.to_dict()
        return out


# --------------------------------------------------------------------------
# moments as functions of the adoption line

@dataclass(frozen=True)
class LineMoments:
    eta: float
    modern_output_share: float
    labor_share: float  # w / Y
    entry_slope: float  # (C' S0 + S1 - D' eta): entrant value per unit a1 and annuity


def _bribe_factors(shared: SharedParams, bribery: BriberyRegime, j: int):
    sigma = (shared.sigma0, shared.sigma1)[j]
    profit_f = sum(p * (1 - t) ** (1 / sigma) for p, t in bribery.outcomes(j))
    output_f = sum(p * (1 - t) ** ((1 - sigma) / sigma) for p, t in bribery.outcomes(j))
    return sigma, profit_f, output_f


def line_moments(coeffs: ThresholdCoeffs, shared: SharedParams, bribery: BriberyRegime,
                 count: int = dist.DEFAULT_NODES) -> LineMoments:
    """Moments implied by the line s1 = C' s0 + D', normalised so a1 = 1.

    With a_j = sigma_j A_j h_j E[(1-T_j)^(1/sigma_j)], per-unit-s output of
    technology j is a_j E[(1-T_j)^((1-sigma_j)/sigma_j)] / (sigma_j E[(1-T_j)^(1/sigma_j)])
    and its after-bribe revenue is a_j / sigma_j. Labour income is the
    labour elasticity times after-bribe revenue.
    """
    nodes = dist.cached_nodes(shared.theta, dist.unit_mean_scale(shared.theta), count)
    reg = adoption_regions(coeffs, nodes)
    gammas = ((1 - shared.alpha0) * (1 - shared.sigma0), (1 - shared.alpha1) * (1 - shared.sigma1))
    a = (coeffs.C_prime, 1.0)
    S = (reg.S0, reg.S1)
    out, labor = [], []
    for j in (0, 1):
        sigma, pf, yf = _bribe_factors(shared, bribery, j)
        if pf == 0:
            raise CalibrationError(f"technology {j} faces confiscatory bribes with certainty")
        out.append(S[j] * a[j] * yf / (sigma * pf))
        labor.append(gammas[j] * S[j] * a[j] / sigma)
    Y = out[0] + out[1]
    return LineMoments(eta=reg.eta, modern_output_share=out[1] / Y, labor_share=sum(labor) / Y,
                       entry_slope=coeffs.C_prime * reg.S0 + reg.S1 - coeffs.D_prime * reg.eta)


def _solve_slope(rho: float, D: float, shared, bribery, count) -> float:
    """C' with eta(C', D) = rho; eta is strictly decreasing in C'."""
    def f(logc):
        return line_moments(ThresholdCoeffs(math.exp(logc), D), shared, bribery, count).eta - rho
    lo, hi = -2.0, 2.0
    while f(lo) < 0:
        lo -= 2.0
        if lo < -200:
            raise CalibrationError(f"modern share {rho!r} unreachable at D'={D!r}")
    while f(hi) > 0:
        hi += 2.0
        if hi > 200:
            raise CalibrationError(f"modern share {rho!r} unreachable at D'={D!r}")
    return math.exp(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))


def solve_line(rho: float, output_share: float, shared: SharedParams, bribery: BriberyRegime,
               count: int = dist.DEFAULT_NODES, allow_negative: bool = False):
    """(C', D') reproducing the modern firm share and modern output share.

    Returns (coeffs, evaluations). Raises CalibrationError with reason
    'negative_c1' if only a negative intercept fits.
    """
    if not 0 < rho < 1:
        raise CalibrationError(f"modern share must lie strictly in (0, 1), got {rho!r}")
    if not 0 < output_share < 1:
        raise CalibrationError(f"modern output share must lie strictly in (0, 1), got {output_share!r}")
    spec = dist.FrechetSpec.unit_mean(shared.theta)
    d_max = float(dist.quantile(spec, 1 - rho))  # eta(0+, D) = 1 - F(D) must exceed rho
    evals = 0

    def g(D):
        nonlocal evals
        evals += 1
        C = _solve_slope(rho, D, shared, bribery, count)
        return line_moments(ThresholdCoeffs(C, D), shared, bribery, count).modern_output_share - output_share

    g0 = g(0.0)
    if g0 > 0:
        if not allow_negative:
            raise CalibrationError("negative_c1: targets need a negative modern operating cost")
        lo = -1.0
        while g(lo) > 0:
            lo *= 2
            if lo < -1e6:
                raise CalibrationError("modern output share unreachable")
        D = optimize.brentq(g, lo, 0.0, xtol=1e-14, rtol=1e-15)
    elif g0 == 0:
        D = 0.0
    else:
        hi = d_max * (1 - 1e-9)
        if g(hi) < 0:
            raise CalibrationError("modern output share unreachable at this modern share")
        D = optimize.brentq(g, 0.0, hi, xtol=1e-14, rtol=1e-15)
    C = _solve_slope(rho, D, shared, bribery, count)
    return ThresholdCoeffs(C, D), evals


def params_from_line(coeffs: ThresholdCoeffs, gdp: float, shared: SharedParams,
                     bribery: BriberyRegime, count: int = dist.DEFAULT_NODES) -> EconomyParams:
    """Invert (C', D', Y) into (A0, c_e, c1) with A1 = 1."""
    mom = line_moments(coeffs, shared, bribery, count)
    w = mom.labor_share * gdp
    r = interest_rate(shared.beta, shared.delta)
    R = net_interest_rate(shared.beta, shared.delta)
    probe = shared.economy(1.0, 1.0, 0.0, bribery)
    a1 = shared.sigma1 * h_factor(probe.tech1, w, r) * expected_bribe_factor(probe, 1, 1 / shared.sigma1)
    a0_unit = shared.sigma0 * h_factor(probe.tech0, w, r) * expected_bribe_factor(probe, 0, 1 / shared.sigma0)
    A0 = coeffs.C_prime * a1 / a0_unit
    c1 = coeffs.D_prime * a1
    entry_cost = lifetime_value(1.0, shared.lam, R) * a1 * mom.entry_slope
    if not entry_cost > 0:
        raise CalibrationError("calibrated entry cost is not positive")
    return shared.economy(A0, entry_cost, c1, bribery)


def model_moments(eq) -> dict:
    return {"gdp": eq.Y, "modern_share": eq.rho, "modern_output_share": eq.modern_output_share}


def moment_residuals(eq, targets: CountryTargets) -> dict:
    model = model_moments(eq)
    want = {"gdp": targets.gdp_pc_normalized, "modern_share": targets.modern_share,
            "modern_output_share": targets.modern_output_share}
    return {k: (model[k] - want[k]) / want[k] for k in want}


def _loss(res: dict, kind: str) -> float:
    vals = np.array(list(res.values()))
    if kind == "chebyshev":
        return float(np.max(np.abs(vals)))
    if kind == "sumsq":
        return float(vals @ vals)
    raise ValueError(f"unknown loss {kind!r}")


def calibrate_country(targets: CountryTargets, shared: SharedParams = SharedParams(),
                      count: int = dist.DEFAULT_NODES, tol: float = 1e-6, method: str = "structural",
                      loss: str = "chebyshev", start: Optional[tuple] = None,
                      max_iter: int = 4000) -> CalibrationResult:
    """Find (A0, c_e, c1) matching Y, the modern firm share and the modern output share.

    Bribery moments pass through unchanged. Infeasible targets and stalled
    searches come back with ``converged=False`` and a reason, never raised.
    """
    if method == "structural":
        return _calibrate_structural(targets, shared, count, tol)
    if method == "simplex":
        return _calibrate_simplex(targets, shared, count, tol, loss, start, max_iter)
    raise ValueError(f"unknown calibration method {method!r}")


def _calibrate_structural(targets, shared, count, tol):
    try:
        coeffs, evals = solve_line(targets.modern_share, targets.modern_output_share, shared,
                                   targets.bribery, count)
        params = params_from_line(coeffs, targets.gdp_pc_normalized, shared, targets.bribery, count)
        eq = stationary_equilibrium(params, count)
    except (CalibrationError, EquilibriumError) as exc:
        reason = "negative_c1" if str(exc).startswith("negative_c1") else "infeasible"
        return CalibrationResult(None, {}, False, 0, targets, reason=f"{reason}: {exc}")
    res = moment_residuals(eq, targets)
    ok = _loss(res, "chebyshev") < tol
    return CalibrationResult(params, res, ok, evals, targets, eq, eq.coeffs,
                             reason="" if ok else "tolerance")


def _calibrate_simplex(targets, shared, count, tol, loss, start, max_iter):
    if start is None:
        start = (1.0, 1.0, 0.1)
    best = {"f": math.inf, "x": None, "eq": None, "res": None}

    def objective(x):
        A0, ce, c1 = np.exp(x)
        try:
            params = shared.economy(A0, ce, c1, targets.bribery)
            eq = stationary_equilibrium(params, count)
        except (EquilibriumError, ValueError):
            return 1e6
        res = moment_residuals(eq, targets)
        f = _loss(res, loss)
        if f < best["f"]:
            best.update(f=f, x=x.copy(), eq=eq, res=res)
        return f

    x = np.log(np.asarray(start, dtype=float))
    iterations, step = 0, 0.5
    # the max-error loss has kinks where residuals tie, on which a simplex
    # collapses; restarting from the best point with a fresh simplex escapes them
    for _ in range(SIMPLEX_RESTARTS):
        simplex = np.vstack([x] + [x + step * e for e in np.eye(3)])
        budget = max_iter - iterations
        if budget <= 0:
            break
        opt = optimize.minimize(objective, x, method="Nelder-Mead",
                                options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-14,
                                         "maxiter": budget, "maxfev": budget})
        iterations += int(opt.nit)
        if best["x"] is None or best["f"] < tol:
            break
        x = best["x"]
        step = max(step * 0.5, 1e-3)
    if best["x"] is None:
        return CalibrationResult(None, {}, False, iterations, targets, reason="no_solution")
    A0, ce, c1 = np.exp(best["x"])
    params = shared.economy(A0, ce, c1, targets.bribery)
    chk = _loss(best["res"], "chebyshev")
    ok = chk < tol
    return CalibrationResult(params, best["res"], ok, iterations, targets, best["eq"],
                             best["eq"].coeffs, reason="" if ok else "stagnated")


# --------------------------------------------------------------------------
# cross-country normalisation and grouping

def normalize_gdp_targets(targets: list, shared: SharedParams = SharedParams(),
                          count: int = dist.DEFAULT_NODES) -> list:
    """Rescale all GDP targets by one constant so the lowest calibrated A1/A0 is 1.

    At fixed (C', D') the calibrated A1/A0 is proportional to Y^(-e) with
    e = shared.tfp_elasticity, so the constant is exact. Countries whose
    calibration is infeasible do not enter the minimum.
    """
    if not targets:
        raise ValueError("no GDP targets to normalise")
    e = shared.tfp_elasticity
    if e == 0:
        raise CalibrationError("A1/A0 does not depend on GDP; normalisation undefined")
    ratios = []
    for t in targets:
        try:
            coeffs, _ = solve_line(t.modern_share, t.modern_output_share, shared, t.bribery, count)
        except CalibrationError:
            continue
        p = params_from_line(coeffs, t.gdp_pc_normalized, shared, t.bribery, count)
        ratios.append(p.tech1.A / p.tech0.A)
    if not ratios:
        raise CalibrationError("no country calibrates; cannot normalise GDP")
    kappa = min(ratios) ** (1.0 / e)
    return [replace(t, gdp_pc_normalized=t.gdp_pc_normalized * kappa) for t in targets]


GROUP_NAMES = ("low", "middle", "high")


def group_by_income(countries: list) -> dict:
    """Terciles by GDP per capita: {'low': [...], 'middle': [...], 'high': [...]}.

    ``countries`` is a list of (gdp_pc, item). Ties keep input order; with
    sizes not divisible by three the lower groups get the extra members.
    """
    if not countries:
        raise ValueError("no countries to group")
    order = sorted(range(len(countries)), key=lambda i: countries[i][0])
    parts = np.array_split(np.array(order, dtype=int), 3)
    return {name: [countries[i][1] for i in part] for name, part in zip(GROUP_NAMES, parts)}


def group_means(groups: dict, indicator) -> dict:
    """Unweighted within-group mean of ``indicator(item)``."""
    return {g: float(np.mean([indicator(x) for x in items])) if items else float("nan")
            for g, items in groups.items()}


# --------------------------------------------------------------------------
# I/O

def read_targets(source) -> list:
    """Targets CSV with columns country,year,gdp_pc,modern_share,modern_output_share,p0,tau0,p1,tau1."""
    if isinstance(source, (str, bytes)) and not str(source).lstrip().startswith("country"):
        with open(source, newline="") as fh:
            return read_targets(fh.read())
    text = source if isinstance(source, str) else source.read()
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in TARGET_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"targets file lacks columns: {', '.join(missing)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append(CountryTargets(
                gdp_pc_normalized=float(row["gdp_pc"]),
                modern_share=float(row["modern_share"]),
                modern_output_share=float(row["modern_output_share"]),
                bribery=BriberyRegime(p0=float(row["p0"]), tau0=float(row["tau0"]),
                                      p1=float(row["p1"]), tau1=float(row["tau1"])),
                country=row["country"], year=row["year"],
            ))
        except ValueError as exc:
            raise ValueError(f"targets row {lineno}: {exc}") from None
    return out


def write_targets(targets: Iterable[CountryTargets], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TARGET_COLUMNS)
    for t in targets:
        b = t.bribery
        writer.writerow([t.country, t.year, repr(t.gdp_pc_normalized), repr(t.modern_share),
                         repr(t.modern_output_share), repr(b.p0), repr(b.tau0), repr(b.p1), repr(b.tau1)])


def results_to_jsonl(results: Iterable[CalibrationResult]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in results)
