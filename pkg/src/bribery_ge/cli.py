"""Command-line pipeline: ingest, estimate, calibrate, solve, counterfactual, pipeline.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 invariant violation.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__, dist
from .calibration import (CalibrationError, CalibrationResult, CountryTargets, SharedParams,
                          calibrate_country, normalize_gdp_targets, read_targets, results_to_jsonl,
                          write_targets)
from .counterfactual import (STANDARD_SCENARIOS, SWEEP_NAME, CounterfactualError, Scenario,
                             groups_from_results, parse_scenario_list, run_grid, tables_for)
from .equilibrium import (EconomyParams, EquilibriumError, InvariantViolation, NoEquilibriumWage,
                          stationary_equilibrium)
from .estimation import EstimationError, estimate_technology
from .firmdata import (MIN_SURVEY_FIRMS, FirmDataError, load_firm_records, split_surveys,
                       survey_moments, write_moment_rows)

log = logging.getLogger("bribery_ge")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_INVARIANT = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int, stage: str = "", diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.stage = stage
        self.diagnostics = diagnostics or {}


@dataclass
class RunConfig:
    firms: str = ""
    gdp: str = ""
    targets: str = ""
    technology: str = ""
    calibration: str = ""
    params: str = ""
    out: str = "out"
    beta: float = 0.96
    delta: float = 0.08
    lam: float = 0.10
    theta: float = 4.5
    sigma0: float = 0.378
    alpha0: float = 0.230
    sigma1: float = 0.334
    alpha1: float = 0.538
    quad_nodes: int = dist.DEFAULT_NODES
    outlier_k: float = 3.0
    min_firms: int = MIN_SURVEY_FIRMS
    kappa_basis: str = "auto"
    tau_weighting: str = "sales"
    estimate_technology: bool = True
    estimation_scale: str = "log"
    polynomial_order: int = 5
    survey_fixed_effects: bool = False
    calibration_method: str = "structural"
    moment_loss: str = "chebyshev"
    normalize_gdp: bool = True
    scenarios: tuple = ("NoBribery",)
    tol: float = 1e-8
    jobs: int = 1

    @property
    def shared(self) -> SharedParams:
        return SharedParams(beta=self.beta, delta=self.delta, lam=self.lam, theta=self.theta,
                            sigma0=self.sigma0, alpha0=self.alpha0, sigma1=self.sigma1, alpha1=self.alpha1)

    def canonical(self) -> str:
        """Resolved configuration as sorted key = value lines (hashed into the manifest)."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in ("out", "jobs"):
                continue  # do not affect results
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_ALIASES = {"lambda": "lam", "quad-nodes": "quad_nodes"}


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ValueError(f"config key {name!r}: expected yes/no, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "tuple":
        return tuple(parse_scenario_list(raw))
    return raw.strip()


def load_config(path: Optional[str]) -> RunConfig:
    """Flat ``key = value`` file; unknown keys are an input error."""
    cfg = RunConfig()
    if not path:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_INPUT, "config") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise CliError(f"malformed config {path}: {exc}", EXIT_INPUT, "config") from None
    base = Path(path).parent
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, raw in parser["run"].items():
        name = _ALIASES.get(key, key.replace("-", "_"))
        if name not in known:
            raise CliError(f"unknown config key {key!r}", EXIT_INPUT, "config")
        try:
            value = _coerce(name, raw)
        except ValueError as exc:
            raise CliError(f"config key {key!r}: {exc}", EXIT_INPUT, "config") from None
        if name in ("firms", "gdp", "targets", "technology", "calibration", "params", "out") and value:
            value = str((base / value)) if not os.path.isabs(value) else value
        updates[name] = value
    return replace(cfg, **updates)


def apply_flags(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    for name in ("out", "jobs", "quad_nodes", "tol", "firms", "gdp", "targets", "technology",
                 "calibration", "params"):
        v = getattr(args, name, None)
        if v is not None:
            updates[name] = v
    if getattr(args, "scenario", None):
        updates["scenarios"] = tuple(parse_scenario_list(args.scenario))
    return replace(cfg, **updates)


# --------------------------------------------------------------------------
# helpers

def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _write_outputs(out_dir: Path, files: dict) -> None:
    """Write all files at the end of a command, so failures leave no partial outputs."""
    for rel, text in sorted(files.items()):
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")


def _input_files(path: str) -> list:
    if not path:
        raise CliError("no firm data input given (--input or 'firms' in config)", EXIT_INPUT, "ingest")
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.csv"))
        if not files:
            raise CliError(f"input directory {p} contains no CSV files", EXIT_INPUT, "ingest")
        return files
    if not p.exists():
        raise CliError(f"input {p} does not exist", EXIT_INPUT, "ingest")
    return [p]


def manifest(cfg: RunConfig, dropped: dict, outputs: dict, extra: Optional[dict] = None) -> str:
    body = {
        "versions": {"bribery_ge": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "config_sha256": hashlib.sha256(cfg.canonical().encode()).hexdigest(),
        "config": cfg.canonical().splitlines(),
        "tolerances": {"free_entry": 1e-10, "residual": cfg.tol, "calibration": cfg.tol,
                       "quad_nodes": cfg.quad_nodes},
        "dropped": {k: dropped[k] for k in sorted(dropped)},
        "outputs": {k: hashlib.sha256(v.encode()).hexdigest() for k, v in sorted(outputs.items())},
    }
    if extra:
        body.update(extra)
    return _json(body)


# --------------------------------------------------------------------------
# stages

def stage_ingest(cfg: RunConfig):
    """Returns (moment rows, surveys dict of screened records, dropped reasons)."""
    records, errors = [], []
    for path in _input_files(cfg.firms):
        try:
            records.extend(load_firm_records(str(path), errors))
        except FirmDataError as exc:
            raise CliError(str(exc), EXIT_INPUT, "ingest") from None
    if not records:
        raise CliError("no valid firm records in input", EXIT_INPUT, "ingest", {"rejected_rows": errors})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        surveys, dropped = split_surveys(records, cfg.min_firms)
    for w in caught:
        log.warning("%s", w.message)
    rows, panels = [], {}
    for sid, recs in surveys.items():
        try:
            row = survey_moments(sid, recs, cfg.outlier_k, cfg.kappa_basis, cfg.tau_weighting)
        except (FirmDataError, ValueError) as exc:
            log.warning("survey %s dropped: %s", sid, exc)
            dropped[sid] = "classification_failed"
            continue
        panels[sid] = row.pop("panel")
        rows.append(row)
    return rows, panels, dropped


def stage_estimate(cfg: RunConfig, panels: dict):
    """Pooled estimates per technology across surveys."""
    from .equilibrium import interest_rate
    r = interest_rate(cfg.beta, cfg.delta)
    out = {}
    for j in (0, 1):
        recs = [rec for p in panels.values() for rec in p.by_label(j)]
        try:
            tech, est = estimate_technology(recs, r, cfg.polynomial_order, cfg.estimation_scale,
                                            cfg.survey_fixed_effects)
        except EstimationError as exc:
            raise CliError(f"technology {j}: {exc}", EXIT_INPUT, "estimate") from None
        out[f"tech{j}"] = {"sigma": tech.sigma, "alpha": tech.alpha, "gamma": est.gamma,
                           "gamma_std_error": est.std_error, "n_obs": est.n_obs}
    return out


def _read_gdp(path: str) -> dict:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or {"survey_id", "gdp_pc"} - set(reader.fieldnames):
                raise CliError(f"{path}: GDP file needs columns survey_id,gdp_pc", EXIT_INPUT, "calibrate")
            return {row["survey_id"]: float(row["gdp_pc"]) for row in reader}
    except OSError as exc:
        raise CliError(f"cannot read GDP file {path}: {exc}", EXIT_INPUT, "calibrate") from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT, "calibrate") from None


def targets_from_moments(rows: list, gdp: dict, dropped: dict) -> list:
    from .firmdata import BriberyRegime
    out = []
    for row in rows:
        sid = row["survey_id"]
        if sid not in gdp:
            dropped[sid] = "missing_gdp"
            continue
        try:
            out.append(CountryTargets(
                gdp_pc_normalized=gdp[sid], modern_share=row["modern_share"],
                modern_output_share=row["modern_output_share"],
                bribery=BriberyRegime(p0=row["p0"], tau0=row["tau0"], p1=row["p1"], tau1=row["tau1"]),
                country=sid))
        except ValueError as exc:
            log.warning("survey %s dropped: %s", sid, exc)
            dropped[sid] = "invalid_targets"
    return out


def _calibrate_one(args):
    t, shared, count, tol, method, loss = args
    return calibrate_country(t, shared, count, tol, method, loss)


def stage_calibrate(cfg: RunConfig, targets: list, shared: SharedParams, dropped: dict):
    if not targets:
        raise CliError("no calibration targets", EXIT_INPUT, "calibrate")
    if cfg.normalize_gdp:
        try:
            targets = normalize_gdp_targets(targets, shared, cfg.quad_nodes)
        except CalibrationError as exc:
            raise CliError(str(exc), EXIT_SOLVER, "calibrate") from None
    # calibration residuals carry quadrature error; never ask for less than 1e-10
    tol = max(cfg.tol, 1e-10)
    tasks = [(t, shared, cfg.quad_nodes, tol, cfg.calibration_method, cfg.moment_loss) for t in targets]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_calibrate_one, tasks))
    else:
        results = [_calibrate_one(t) for t in tasks]
    converged = {}
    for res in results:
        key = res.targets.key
        if res.converged:
            converged[key] = res
        else:
            reason = res.reason.split(":")[0] or "not_converged"
            dropped[key] = reason
            log.warning("calibration of %s excluded: %s", key, res.reason)
    return targets, results, converged


def stage_counterfactual(cfg: RunConfig, calibrated: dict):
    names = list(cfg.scenarios)
    for n in names:
        if n != SWEEP_NAME:
            try:
                Scenario.parse(n)
            except ValueError as exc:
                raise CliError(str(exc), EXIT_INPUT, "counterfactual") from None
    if not calibrated:
        raise CliError("no calibrated country to run scenarios on", EXIT_SOLVER, "counterfactual")
    try:
        grid = run_grid(calibrated, names, cfg.quad_nodes, cfg.jobs)
    except CounterfactualError as exc:
        code = EXIT_INVARIANT if isinstance(exc.__cause__, InvariantViolation) else EXIT_SOLVER
        raise CliError(str(exc), code, "counterfactual") from None
    groups = groups_from_results(calibrated)
    tables = tables_for(grid, groups)
    files = {}
    for i, name in enumerate(names, start=1):
        stem = f"tables/{i:02d}_{_slug(name)}"
        files[stem + ".csv"] = tables[name].to_csv()
        files[stem + ".json"] = tables[name].to_json()
    files["groups.json"] = _json(groups)
    return files


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in name).strip("_")


def _load_technology(cfg: RunConfig) -> RunConfig:
    if not cfg.technology:
        return cfg
    try:
        tech = json.loads(Path(cfg.technology).read_text(encoding="utf-8"))
        return replace(cfg, sigma0=float(tech["tech0"]["sigma"]), alpha0=float(tech["tech0"]["alpha"]),
                       sigma1=float(tech["tech1"]["sigma"]), alpha1=float(tech["tech1"]["alpha"]))
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise CliError(f"bad technology file {cfg.technology}: {exc}", EXIT_INPUT, "calibrate") from None


def _load_calibrated(cfg: RunConfig) -> dict:
    if not cfg.calibration:
        raise CliError("no calibration file given (--calibration)", EXIT_INPUT, "counterfactual")
    out = {}
    try:
        lines = Path(cfg.calibration).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {cfg.calibration}: {exc}", EXIT_INPUT, "counterfactual") from None
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            if not d.get("converged"):
                continue
            params = EconomyParams.from_dict(d["params"])
            t = CountryTargets(gdp_pc_normalized=float(d["gdp_pc"]), modern_share=0.0,
                               modern_output_share=0.0, bribery=params.bribery,
                               country=d["country"], year=d.get("year", ""))
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"{cfg.calibration} line {i}: {exc}", EXIT_INPUT, "counterfactual") from None
        try:
            eq = stationary_equilibrium(params, cfg.quad_nodes, tol=cfg.tol)
        except NoEquilibriumWage as exc:
            raise CliError(f"{t.key}: {exc}", EXIT_SOLVER, "counterfactual") from None
        except InvariantViolation as exc:
            raise CliError(f"{t.key}: {exc}", EXIT_INVARIANT, "counterfactual", exc.residuals) from None
        out[t.key] = CalibrationResult(params, {}, True, 0, t, eq, eq.coeffs)
    return out


# --------------------------------------------------------------------------
# commands

def cmd_ingest(cfg: RunConfig) -> int:
    rows, _, dropped = stage_ingest(cfg)
    buf = io.StringIO()
    write_moment_rows(rows, buf)
    files = {"moments.csv": buf.getvalue()}
    files["manifest.json"] = manifest(cfg, dropped, files)
    _write_outputs(Path(cfg.out), files)
    return EXIT_OK


def cmd_estimate(cfg: RunConfig) -> int:
    _, panels, dropped = stage_ingest(cfg)
    tech = stage_estimate(cfg, panels)
    files = {"technology.json": _json(tech)}
    files["manifest.json"] = manifest(cfg, dropped, files)
    _write_outputs(Path(cfg.out), files)
    return EXIT_OK


def _gather_targets(cfg: RunConfig, dropped: dict, files: dict):
    """Targets from a targets CSV, or from firm data plus a GDP file."""
    if cfg.targets:
        try:
            return cfg, read_targets(cfg.targets)
        except (OSError, ValueError) as exc:
            raise CliError(f"bad targets file: {exc}", EXIT_INPUT, "calibrate") from None
    if not cfg.firms:
        raise CliError("need --targets or firm data with a GDP file", EXIT_INPUT, "calibrate")
    if not cfg.gdp:
        raise CliError("firm data given without a GDP file ('gdp' in config)", EXIT_INPUT, "calibrate")
    rows, panels, d = stage_ingest(cfg)
    dropped.update(d)
    buf = io.StringIO()
    write_moment_rows(rows, buf)
    files["moments.csv"] = buf.getvalue()
    if cfg.estimate_technology and not cfg.technology:
        tech = stage_estimate(cfg, panels)
        files["technology.json"] = _json(tech)
        cfg = replace(cfg, sigma0=tech["tech0"]["sigma"], alpha0=tech["tech0"]["alpha"],
                      sigma1=tech["tech1"]["sigma"], alpha1=tech["tech1"]["alpha"])
    return cfg, targets_from_moments(rows, _read_gdp(cfg.gdp), dropped)


def _calibration_files(targets, results) -> dict:
    buf = io.StringIO()
    write_targets(targets, buf)
    return {"targets_normalized.csv": buf.getvalue(), "calibration.jsonl": results_to_jsonl(results)}


def cmd_calibrate(cfg: RunConfig) -> int:
    cfg = _load_technology(cfg)
    dropped, files = {}, {}
    cfg, targets = _gather_targets(cfg, dropped, files)
    targets, results, _ = stage_calibrate(cfg, targets, cfg.shared, dropped)
    files.update(_calibration_files(targets, results))
    files["manifest.json"] = manifest(cfg, dropped, files)
    _write_outputs(Path(cfg.out), files)
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    if not cfg.params:
        raise CliError("no parameter file given (--params)", EXIT_INPUT, "solve")
    try:
        params = EconomyParams.from_dict(json.loads(Path(cfg.params).read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad parameter file {cfg.params}: {exc}", EXIT_INPUT, "solve") from None
    try:
        eq = stationary_equilibrium(params, cfg.quad_nodes, tol=cfg.tol)
    except InvariantViolation as exc:
        sys.stdout.write(_json({"error": str(exc), "residuals": exc.residuals}))
        raise CliError(str(exc), EXIT_INVARIANT, "solve", exc.residuals) from None
    except EquilibriumError as exc:
        raise CliError(str(exc), EXIT_SOLVER, "solve") from None
    text = _json(eq.to_dict())
    sys.stdout.write(text)
    if cfg.out and cfg.out != "-":
        _write_outputs(Path(cfg.out), {"equilibrium.json": text})
    return EXIT_OK


def cmd_counterfactual(cfg: RunConfig) -> int:
    calibrated = _load_calibrated(cfg)
    files = stage_counterfactual(cfg, calibrated)
    files["manifest.json"] = manifest(cfg, {}, files)
    _write_outputs(Path(cfg.out), files)
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig) -> int:
    cfg = _load_technology(cfg)
    dropped, files = {}, {}
    cfg, targets = _gather_targets(cfg, dropped, files)
    targets, results, calibrated = stage_calibrate(cfg, targets, cfg.shared, dropped)
    files.update(_calibration_files(targets, results))
    files["equilibria.json"] = _json({k: r.equilibrium.to_dict() for k, r in calibrated.items()})
    files.update(stage_counterfactual(cfg, calibrated))
    excluded = sorted(r.targets.key for r in results if not r.converged)
    files["manifest.json"] = manifest(cfg, dropped, files, {"excluded_calibrations": excluded})
    _write_outputs(Path(cfg.out), files)
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig, n_firms: int, seed: int) -> int:
    """Model-generated firm data and GDP for the stylized income groups."""
    from .counterfactual import stylized_economies
    from .firmdata import CSV_COLUMNS
    from .synthetic import synthetic_firms
    rng = np.random.default_rng(seed)
    economies = stylized_economies(cfg.shared, cfg.quad_nodes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    gdp = io.StringIO()
    gdp.write("survey_id,gdp_pc\n")
    for copy in range(2):
        for g, res in economies.items():
            sid = f"{g}{copy + 1}"
            recs, _ = synthetic_firms(res.params, n_firms, rng, sid, res.equilibrium.w, res.coeffs)
            for r in recs:
                w.writerow([r.survey_id] + [repr(getattr(r, c)) for c in CSV_COLUMNS[1:]])
            gdp.write(f"{sid},{res.equilibrium.Y * (1 + 0.1 * copy)!r}\n")
    _write_outputs(Path(cfg.out), {"firms.csv": buf.getvalue(), "gdp.csv": gdp.getvalue()})
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--quad-nodes", dest="quad_nodes", type=int, help="quadrature nodes")
    common.add_argument("--tol", type=float, help="residual and calibration tolerance")
    common.add_argument("--scenario", help="scenario list, e.g. NoBribery,UniformBribe(0.5,0.1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bribery-ge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("ingest", parents=[common], help="screen and classify firms, write moments")
    s.add_argument("--input", dest="firms", help="firm CSV file or directory of CSVs")
    s = sub.add_parser("estimate", parents=[common], help="estimate technology parameters")
    s.add_argument("--input", dest="firms")
    s = sub.add_parser("calibrate", parents=[common], help="calibrate countries to targets")
    s.add_argument("--targets")
    s.add_argument("--input", dest="firms")
    s.add_argument("--gdp")
    s.add_argument("--technology")
    s = sub.add_parser("solve", parents=[common], help="solve one economy, print equilibrium JSON")
    s.add_argument("--params")
    s = sub.add_parser("counterfactual", parents=[common], help="run scenarios on calibrated countries")
    s.add_argument("--calibration")
    s = sub.add_parser("pipeline", parents=[common], help="calibrate, solve, run scenarios, tabulate")
    s.add_argument("--targets")
    s.add_argument("--input", dest="firms")
    s.add_argument("--gdp")
    s.add_argument("--technology")
    s = sub.add_parser("synthesize", parents=[common], help="write model-generated firm data")
    s.add_argument("--firms-per-survey", type=int, default=400)
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = apply_flags(load_config(args.config), args)
        if cfg.jobs < 1 or cfg.quad_nodes < 2 or not cfg.tol > 0:
            raise CliError("--jobs >= 1, --quad-nodes >= 2 and --tol > 0 required", EXIT_INPUT, "config")
        if cfg.scenarios == ("all",):
            cfg = replace(cfg, scenarios=STANDARD_SCENARIOS)
        command = args.command
        if command == "synthesize":
            return cmd_synthesize(cfg, args.firms_per_survey, args.seed)
        return {"ingest": cmd_ingest, "estimate": cmd_estimate, "calibrate": cmd_calibrate,
                "solve": cmd_solve, "counterfactual": cmd_counterfactual,
                "pipeline": cmd_pipeline}[command](cfg)
    except CliError as exc:
        stage = f"[{exc.stage}] " if exc.stage else ""
        print(f"error: {stage}{exc}", file=sys.stderr)
        for k, v in sorted(exc.diagnostics.items()):
            print(f"  {k}: {v}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
