"""Policy scenarios, margin decomposition and income-group tables."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import dist
from .calibration import (CountryTargets, SharedParams, calibrate_country,
                          group_by_income, normalize_gdp_targets)
from .equilibrium import EconomyParams, Equilibrium, EquilibriumError, stationary_equilibrium, with_tech
from .firmdata import BriberyRegime

INDICATORS = ("Y", "C", "K", "wage", "modern_output_share", "entry", "modern_fraction")
NET_ONLY = frozenset({"entry", "modern_fraction"})
TABLE_COLUMNS = ("group", "indicator", "intensive", "extensive", "net")
SWEEP_COLUMNS = ("group", "scenario", "indicator", "net")

KINDS = ("NoBribery", "NoModernBribery", "NoTraditionalBribery", "ScaleModernTFP",
         "ScaleEntryCost", "ScaleOperatingCost", "UniformBribe")
_ARITY = {"ScaleModernTFP": 1, "ScaleEntryCost": 1, "ScaleOperatingCost": 1, "UniformBribe": 2}


class CounterfactualError(RuntimeError):
    pass


@dataclass(frozen=True)
class Scenario:
    kind: str
    args: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario {self.kind!r}; expected one of {', '.join(KINDS)}")
        if len(self.args) != _ARITY.get(self.kind, 0):
            raise ValueError(f"{self.kind} takes {_ARITY.get(self.kind, 0)} argument(s), got {len(self.args)}")
        if self.kind.startswith("Scale") and not self.args[0] > 0:
            raise ValueError(f"scale factor must be positive, got {self.args[0]!r}")
        if self.kind == "UniformBribe" and not all(0 <= a <= 1 for a in self.args):
            raise ValueError(f"UniformBribe needs p, tau in [0, 1], got {self.args!r}")

    @property
    def name(self) -> str:
        if not self.args:
            return self.kind
        return f"{self.kind}({','.join(repr(float(a)) for a in self.args)})"

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        m = re.fullmatch(r"\s*(\w+)\s*(?:\(([^)]*)\))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse scenario {text!r}")
        args = tuple(float(a) for a in m.group(2).split(",")) if m.group(2) else ()
        return cls(m.group(1), args)


def parse_scenario_list(text: str) -> list:
    """Comma-separated scenario names; commas inside parentheses belong to the arguments."""
    parts, depth, cur = [], 0, ""
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts if p.strip()]


UNCERTAINTY_SWEEP = (Scenario("UniformBribe", (0.5, 0.10)),
                     Scenario("UniformBribe", (0.25, 0.20)),
                     Scenario("UniformBribe", (0.1, 0.50)))
SWEEP_NAME = "UncertaintySweep"

# the seven standard reports, in order
STANDARD_SCENARIOS = ("NoBribery", "NoModernBribery", "NoTraditionalBribery", "ScaleModernTFP(1.2)",
                      "ScaleEntryCost(0.8)", "ScaleOperatingCost(0.8)", SWEEP_NAME)


def apply_scenario(params: EconomyParams, scenario: Scenario) -> EconomyParams:
    b = params.bribery
    k = scenario.kind
    if k == "NoBribery":
        return replace(params, bribery=BriberyRegime())
    if k == "NoModernBribery":
        return replace(params, bribery=replace(b, p1=0.0))
    if k == "NoTraditionalBribery":
        return replace(params, bribery=replace(b, p0=0.0))
    if k == "ScaleModernTFP":
        return with_tech(params, 1, A=params.tech1.A * scenario.args[0])
    if k == "ScaleEntryCost":
        return replace(params, entry_cost=params.entry_cost * scenario.args[0])
    if k == "ScaleOperatingCost":
        return with_tech(params, 1, c=params.tech1.c * scenario.args[0])
    p, tau = scenario.args
    return replace(params, bribery=BriberyRegime(p0=p, tau0=tau, p1=p, tau1=tau))


@dataclass(frozen=True)
class Margins:
    net: float
    intensive: Optional[float] = None
    extensive: Optional[float] = None


@dataclass
class CounterfactualResult:
    scenario: str
    changes: dict
    country: str = ""
    equilibrium: Optional[Equilibrium] = field(default=None, repr=False)

    def net(self, indicator: str) -> float:
        return self.changes[indicator].net

    def to_dict(self) -> dict:
        return {"country": self.country, "scenario": self.scenario,
                "changes": {k: {"net": v.net, "intensive": v.intensive, "extensive": v.extensive}
                            for k, v in self.changes.items()}}


def percent_change(cf: float, base: float) -> float:
    if base == 0:
        return 0.0 if cf == 0 else math.copysign(math.inf, cf)
    return 100.0 * (cf / base - 1.0)


def decompose_margins(base: Equilibrium, scenario_params: EconomyParams, cf: Equilibrium,
                      count: int = dist.DEFAULT_NODES) -> dict:
    """Intensive margin from an auxiliary equilibrium with the base adoption line frozen.

    Prices, entry and input use re-equilibrate under the scenario; only the
    line (C', D'), and so the adoption regions, stays at its base value.
    The extensive margin is the residual.
    """
    try:
        aux = stationary_equilibrium(scenario_params, count, frozen=base.coeffs)
    except EquilibriumError as exc:
        raise CounterfactualError(f"frozen-adoption equilibrium failed: {exc}") from exc
    out = {}
    for name in INDICATORS:
        net = percent_change(cf.indicator(name), base.indicator(name))
        if name in NET_ONLY:
            out[name] = Margins(net)
            continue
        intensive = percent_change(aux.indicator(name), base.indicator(name))
        out[name] = Margins(net, intensive, net - intensive)
    return out


def run_counterfactual(base_params: EconomyParams, base: Equilibrium, scenario: Scenario,
                       count: int = dist.DEFAULT_NODES, margins: bool = True,
                       country: str = "") -> CounterfactualResult:
    params = apply_scenario(base_params, scenario)
    try:
        cf = stationary_equilibrium(params, count)
    except EquilibriumError as exc:
        raise CounterfactualError(f"{scenario.name}: scenario equilibrium failed: {exc}") from exc
    if margins:
        changes = decompose_margins(base, params, cf, count)
    else:
        changes = {n: Margins(percent_change(cf.indicator(n), base.indicator(n))) for n in INDICATORS}
    return CounterfactualResult(scenario.name, changes, country, cf)


def uncertainty_sweep(base_params: EconomyParams, count: int = dist.DEFAULT_NODES,
                      scenarios=UNCERTAINTY_SWEEP, country: str = "") -> list:
    """Changes from the no-bribery economy to each uniform bribe regime (net only)."""
    clean_params = apply_scenario(base_params, Scenario("NoBribery"))
    clean = stationary_equilibrium(clean_params, count)
    return [run_counterfactual(clean_params, clean, s, count, margins=False, country=country)
            for s in scenarios]


# --------------------------------------------------------------------------
# tables

@dataclass
class GroupTable:
    scenario: str
    rows: list  # (group, indicator, intensive, extensive, net)

    def cell(self, group: str, indicator: str) -> tuple:
        for row in self.rows:
            if row[0] == group and row[1] == indicator:
                return row[2:]
        raise KeyError((group, indicator))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"scenario": self.scenario,
                           "rows": [dict(zip(TABLE_COLUMNS, r)) for r in self.rows]}, indent=1) + "\n"


@dataclass
class SweepTable:
    rows: list  # (group, scenario, indicator, net)
    scenario: str = SWEEP_NAME

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"scenario": self.scenario,
                           "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in self.rows]}, indent=1) + "\n"


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _mean(values):
    return float(np.mean(values)) if values else float("nan")


def income_group_table(results: dict, groups: dict) -> GroupTable:
    """Unweighted group means of every cell, rows in the fixed indicator order.

    Empty groups (fewer than three countries) produce no rows.

    ``results`` maps country key -> CounterfactualResult; ``groups`` maps
    group name -> list of country keys.
    """
    scenario = None
    rows = []
    for indicator in INDICATORS:
        for g, members in groups.items():
            if not members:
                continue
            res = [results[k] for k in members]
            scenario = scenario or res[0].scenario
            net = _mean([r.changes[indicator].net for r in res])
            if indicator in NET_ONLY:
                rows.append((g, indicator, None, None, net))
            else:
                intensive = _mean([r.changes[indicator].intensive for r in res])
                extensive = _mean([r.changes[indicator].extensive for r in res])
                rows.append((g, indicator, intensive, extensive, net))
    return GroupTable(scenario or "", rows)


def sweep_group_table(sweeps: dict, groups: dict) -> SweepTable:
    """``sweeps`` maps country key -> list of CounterfactualResult (one per uniform regime)."""
    rows = []
    for g, members in groups.items():
        if not members:
            continue
        names = [r.scenario for r in sweeps[members[0]]]
        for i, name in enumerate(names):
            for indicator in INDICATORS:
                rows.append((g, name, indicator, _mean([sweeps[k][i].net(indicator) for k in members])))
    return SweepTable(rows)


# --------------------------------------------------------------------------
# stylized income-group economies

# modern firm share and bribery moments per income group; modern output
# shares and GDP levels are illustrative choices (not observed moments)
STYLIZED_MOMENTS = {
    "low": dict(modern_share=0.368, modern_output_share=0.55, gdp=615.0,
                bribery=BriberyRegime(p0=0.28, tau0=0.0196, p1=0.34, tau1=0.0260)),
    "middle": dict(modern_share=0.554, modern_output_share=0.70, gdp=3562.0,
                   bribery=BriberyRegime(p0=0.15, tau0=0.0099, p1=0.16, tau1=0.0111)),
    "high": dict(modern_share=0.756, modern_output_share=0.85, gdp=20779.0,
                 bribery=BriberyRegime(p0=0.13, tau0=0.0101, p1=0.11, tau1=0.0060)),
}


def stylized_targets(shared: SharedParams = SharedParams(), normalize: bool = True,
                     count: int = dist.DEFAULT_NODES) -> dict:
    targets = [CountryTargets(gdp_pc_normalized=m["gdp"], modern_share=m["modern_share"],
                              modern_output_share=m["modern_output_share"], bribery=m["bribery"],
                              country=g)
               for g, m in STYLIZED_MOMENTS.items()]
    if normalize:
        targets = normalize_gdp_targets(targets, shared, count)
    return {t.country: t for t in targets}


def stylized_economies(shared: SharedParams = SharedParams(), count: int = dist.DEFAULT_NODES) -> dict:
    """Calibrated low-, middle- and high-income economies: {group: CalibrationResult}."""
    out = {}
    for g, t in stylized_targets(shared, count=count).items():
        res = calibrate_country(t, shared, count)
        if not res.converged:
            raise CounterfactualError(f"stylized {g}-income economy failed to calibrate: {res.reason}")
        out[g] = res
    return out


# --------------------------------------------------------------------------
# batch runner

def _task(args):
    key, params, base, scenario_name, count = args
    if scenario_name == SWEEP_NAME:
        return key, scenario_name, uncertainty_sweep(params, count, country=key[0])
    return key, scenario_name, run_counterfactual(params, base, Scenario.parse(scenario_name), count,
                                                  country=key[0])


def run_grid(calibrated: dict, scenario_names: list, count: int = dist.DEFAULT_NODES,
             jobs: int = 1) -> dict:
    """Every (country, scenario) pair; returns {scenario: {country: result}} in input order.

    Workers share nothing; results are keyed and merged in a fixed order, so
    the output does not depend on ``jobs``.
    """
    tasks = [((country, name), res.params, res.equilibrium, name, count)
             for name in scenario_names for country, res in calibrated.items()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_task, tasks))
    else:
        done = [_task(t) for t in tasks]
    by_key = {key: res for key, _, res in done}
    return {name: {c: by_key[(c, name)] for c in calibrated} for name in scenario_names}


def tables_for(grid: dict, groups: dict) -> dict:
    """{scenario: GroupTable | SweepTable}."""
    out = {}
    for name, per_country in grid.items():
        out[name] = sweep_group_table(per_country, groups) if name == SWEEP_NAME \
            else income_group_table(per_country, groups)
    return out


def groups_from_results(calibrated: dict) -> dict:
    """Income terciles of calibrated countries, by GDP target."""
    pairs = [(res.targets.gdp_pc_normalized, key) for key, res in calibrated.items()]
    return group_by_income(pairs)
