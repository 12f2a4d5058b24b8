"""Scenario definitions, the manifest runner, and CSV output.

Defines the four policy portfolios, the six sensitivity variants, and the
temperature-capped runs; drives them from a manifest and writes
plot-ready CSV tables.  Output files are written atomically; re-running
the same manifest with the same seed produces byte-identical CSVs.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ParamFileError, ValidationError
from .metrics import (ScenarioSummary, bge, carbon_tax_series, scc_series,
                      summarize)
from .optimizer import (CEA_VIOLATION_TOL, REL_PG_TOL, Solution, optimize,
                        perturb_sg)
from .params import ParameterSet, load_params
from .trajectory import MODE_CBA, MODE_CEA, ScenarioConfig, Trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_SCHEMA = "tridice-trajectory-v1"
SUMMARY_SCHEMA = "tridice-summary-v1"
SWEEP_SCHEMA = "tridice-sg-sweep-v1"

PORTFOLIOS = {
    "baseline": dict(allow_cdr=False, allow_sg=False, baseline_mode=True),
    "mitigation": dict(allow_cdr=False, allow_sg=False),
    "mitigation-cdr": dict(allow_cdr=True, allow_sg=False),
    "mitigation-sg": dict(allow_cdr=False, allow_sg=True),
    "full": dict(allow_cdr=True, allow_sg=True),
}

TRAJECTORY_COLUMNS = [
    "year", "mu", "savings_rate", "f_srm", "gross_output", "net_output",
    "consumption", "capital", "industrial_emissions", "land_emissions",
    "total_emissions", "m_atm", "m_upper", "m_lower", "forcing_co2",
    "forcing_exog", "forcing_srm", "forcing_total", "t_atm", "t_ocean",
    "climate_damage_frac", "sg_damage_frac", "abatement_frac",
    "emissions_intensity", "backstop_cost_frac", "carbon_tax", "scc",
]

SUMMARY_COLUMNS = [
    "scenario", "seed", "mode", "t_cap", "feasible",
    "peak_emissions_year", "peak_emissions_gtco2", "peak_emissions_pct_base",
    "net_zero_year", "net_positive_again_year",
    "peak_cdr_year", "peak_cdr_gtco2", "cumulative_industrial_ttco2",
    "peak_sg_year", "peak_sg_wm2", "peak_temperature_year",
    "peak_temperature_c", "bge_vs_baseline_pct", "welfare",
    "carbon_tax_2030", "scc_2030",
]

SWEEP_COLUMNS = [
    "scale", "bge_change_pct", "sg_side_effects_2050_pct_gwp",
    "avoided_damages_2050_pct_gwp",
]


@dataclass
class ScenarioSpec:
    """One manifest entry: a named portfolio with mode and overrides."""

    name: str
    portfolio: str
    mode: str = MODE_CBA
    t_cap: float | None = None
    overrides: dict = field(default_factory=dict)
    multistarts: int | None = None

    def to_config(self, default_multistarts: int = 3) -> ScenarioConfig:
        if self.portfolio not in PORTFOLIOS:
            raise ValidationError(
                f"portfolio: unknown {self.portfolio!r} "
                f"(choose from {sorted(PORTFOLIOS)})")
        flags = PORTFOLIOS[self.portfolio]
        ms = self.multistarts if self.multistarts is not None \
            else default_multistarts
        return ScenarioConfig(name=self.name, mode=self.mode,
                              t_cap=self.t_cap, overrides=dict(self.overrides),
                              multistarts=ms, **flags)


@dataclass
class RunManifest:
    """A batch of scenarios plus run-wide settings."""

    scenarios: list
    output_dir: str = "runs"
    seed: int = 0
    multistarts: int = 3
    rel_pg_tol: float = REL_PG_TOL
    cea_violation_tol: float = CEA_VIOLATION_TOL

    def validate(self) -> None:
        names = [s.name for s in self.scenarios]
        if len(names) != len(set(names)):
            raise ValidationError("manifest: scenario names must be unique")
        if not self.scenarios:
            raise ValidationError("manifest: no scenarios")
        for spec in self.scenarios:
            spec.to_config(self.multistarts).validate()


def sensitivity_scenarios(econ) -> list[ScenarioSpec]:
    """The six sensitivity variants of the full portfolio.

    Discount-rate variants set the rate directly; damage variants scale
    the default coefficients.
    """
    return [
        ScenarioSpec("s1-high-discount", "full",
                     overrides={"time_preference": 0.03}),
        ScenarioSpec("s2-zero-discount", "full",
                     overrides={"time_preference": 0.0}),
        ScenarioSpec("s3-double-damages", "full",
                     overrides={"damage_coeff": 2.0 * econ.damage_coeff}),
        ScenarioSpec("s4-linear-sg-damages", "full",
                     overrides={"sg_damage_exponent": 1.0}),
        ScenarioSpec("s5-double-sg-damages", "full",
                     overrides={"sg_damage_coeff": 2.0 * econ.sg_damage_coeff}),
        ScenarioSpec("s6-low-sg-damages", "full",
                     overrides={"sg_damage_coeff": 0.1 * econ.sg_damage_coeff}),
    ]


def default_manifest(params: ParameterSet, output_dir: str = "runs",
                     seed: int = 0) -> RunManifest:
    """The standard batch: 4 portfolios, 6 sensitivity runs, 3 capped runs."""
    specs = [ScenarioSpec(name, name) for name in
             ("baseline", "mitigation", "mitigation-cdr", "mitigation-sg", "full")]
    specs += sensitivity_scenarios(params.econ)
    specs += [
        ScenarioSpec("cea2-mitigation-cdr", "mitigation-cdr", mode=MODE_CEA, t_cap=2.0),
        ScenarioSpec("cea2-mitigation-sg", "mitigation-sg", mode=MODE_CEA, t_cap=2.0),
        ScenarioSpec("cea2-full", "full", mode=MODE_CEA, t_cap=2.0),
    ]
    return RunManifest(scenarios=specs, output_dir=output_dir, seed=seed)


def load_manifest(path) -> RunManifest:
    """Parse a YAML manifest file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh.read())
    except OSError as exc:
        raise ParamFileError(f"cannot read manifest {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ParamFileError(f"manifest is not valid YAML{where}: {exc}") from exc
    if not isinstance(doc, dict) or "scenarios" not in doc:
        raise ParamFileError("manifest: needs a 'scenarios' list")
    specs = []
    for i, entry in enumerate(doc["scenarios"]):
        if not isinstance(entry, dict) or "name" not in entry \
                or "portfolio" not in entry:
            raise ParamFileError(
                f"manifest: scenario #{i} needs 'name' and 'portfolio'")
        specs.append(ScenarioSpec(
            name=str(entry["name"]),
            portfolio=str(entry["portfolio"]),
            mode=str(entry.get("mode", MODE_CBA)),
            t_cap=entry.get("t_cap"),
            overrides=dict(entry.get("overrides", {})),
            multistarts=entry.get("multistarts"),
        ))
    tol = doc.get("tolerances", {}) or {}
    manifest = RunManifest(
        scenarios=specs,
        output_dir=str(doc.get("output_dir", "runs")),
        seed=int(doc.get("seed", 0)),
        multistarts=int(doc.get("multistarts", 3)),
        rel_pg_tol=float(tol.get("rel_pg", REL_PG_TOL)),
        cea_violation_tol=float(tol.get("cea_violation", CEA_VIOLATION_TOL)),
    )
    manifest.validate()
    return manifest


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------

def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_table(solution: Solution, params: ParameterSet) -> list[list]:
    """Per-year rows for the trajectory CSV, in schema column order."""
    traj = solution.trajectory
    climate = params.climate
    tax = carbon_tax_series(traj, params, solution.engine.econ)
    scc = scc_series(solution)
    f_co2 = climate.f2xco2 * np.log2(traj.m_atm / climate.m_preindustrial)
    rows = []
    for t in range(traj.horizon):
        rows.append([
            int(traj.years[t]), traj.mu[t], traj.savings[t], traj.f_srm[t],
            traj.gross_output[t], traj.net_output[t], traj.consumption[t],
            traj.capital[t], traj.industrial_emissions[t],
            traj.land_emissions[t], traj.total_emissions[t],
            traj.m_atm[t], traj.m_upper[t], traj.m_lower[t],
            f_co2[t], params.paths.exogenous_forcing[t], -traj.f_srm[t],
            traj.forcing[t], traj.t_atm[t], traj.t_ocean[t],
            traj.climate_damage_frac[t], traj.sg_damage_frac[t],
            traj.abatement_frac[t], params.paths.emissions_intensity[t],
            params.paths.backstop_cost_frac[t], tax[t], scc[t],
        ])
    return rows


def _csv_text(schema: str, meta: dict, columns: list[str],
              rows: list[list]) -> str:
    meta_line = "# " + schema + " " + " ".join(
        f"{k}={v}" for k, v in meta.items())
    lines = [meta_line, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format(v) for v in row))
    return "\n".join(lines) + "\n"


def write_trajectory_csv(path: str, solution: Solution,
                         params: ParameterSet, seed: int) -> None:
    meta = dict(scenario=solution.config.name, seed=seed,
                mode=solution.config.mode)
    rows = trajectory_table(solution, params)
    _atomic_write(path, _csv_text(TRAJECTORY_SCHEMA, meta, TRAJECTORY_COLUMNS, rows))


def summary_row(solution: Solution, summary: ScenarioSummary,
                params: ParameterSet, seed: int) -> list:
    traj = solution.trajectory
    i2030 = traj.year_index(2030)
    tax30 = carbon_tax_series(traj, params, solution.engine.econ)[i2030]
    scc30 = scc_series(solution)[i2030]
    return [
        solution.config.name, seed, solution.config.mode,
        solution.config.t_cap, solution.diagnostics.feasible,
        summary.peak_emissions_year, summary.peak_emissions_gtco2,
        summary.peak_emissions_pct_base, summary.net_zero_year,
        summary.net_positive_again_year, summary.peak_cdr_year,
        summary.peak_cdr_gtco2, summary.cumulative_industrial_ttco2,
        summary.peak_sg_year, summary.peak_sg_wm2,
        summary.peak_temperature_year, summary.peak_temperature_c,
        summary.bge_vs_baseline_pct, traj.welfare, tax30, scc30,
    ]


# --------------------------------------------------------------------------
# Manifest runner
# --------------------------------------------------------------------------

def _overrides_key(overrides: dict) -> str:
    return json.dumps(overrides, sort_keys=True)


def _solve_worker(args):
    spec, params, manifest = args
    config = spec.to_config(manifest.multistarts)
    solution = optimize(config, params, seed=manifest.seed,
                        rel_pg_tol=manifest.rel_pg_tol,
                        violation_tol=manifest.cea_violation_tol)
    return spec.name, solution


def run_manifest(manifest: RunManifest, params: ParameterSet | None = None,
                 jobs: int = 1) -> dict[str, Solution]:
    """Solve every scenario in a manifest and write its output set.

    Emits per scenario `<name>_trajectory.csv` and `<name>_summary.csv`,
    plus a combined `summary.csv` and a single `run.log`.  Baseline runs
    needed for BGE and the `% base` column are solved once per distinct
    override set and shared.  Raises ConvergenceError if any scenario
    fails to converge.
    """
    manifest.validate()
    if params is None:
        params = load_params()
    out = manifest.output_dir
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory not writable: {out}")

    log_lines = [f"tridice run  seed={manifest.seed}  scenarios="
                 f"{len(manifest.scenarios)}  jobs={jobs}"]

    # baselines needed for BGE / % base, one per distinct override set
    baseline_specs: dict[str, ScenarioSpec] = {}
    for spec in manifest.scenarios:
        key = _overrides_key(spec.overrides)
        if spec.portfolio == "baseline" and spec.mode == MODE_CBA:
            baseline_specs.setdefault(key, spec)
    for spec in manifest.scenarios:
        key = _overrides_key(spec.overrides)
        if key not in baseline_specs:
            baseline_specs[key] = ScenarioSpec(
                name=f"_baseline{len(baseline_specs)}", portfolio="baseline",
                overrides=dict(spec.overrides))

    solutions: dict[str, Solution] = {}
    baselines: dict[str, Solution] = {}

    def solve(spec: ScenarioSpec) -> Solution:
        start = time.perf_counter()
        config = spec.to_config(manifest.multistarts)
        solution = optimize(config, params, seed=manifest.seed,
                            rel_pg_tol=manifest.rel_pg_tol,
                            violation_tol=manifest.cea_violation_tol)
        d = solution.diagnostics
        log_lines.append(
            f"{spec.name}: portfolio={spec.portfolio} mode={spec.mode} "
            f"overrides={_overrides_key(spec.overrides)} "
            f"W={d.objective:.6f} iters={d.iterations} rel_pg={d.rel_pg:.3e} "
            f"active_bounds={d.active_lower}+{d.active_upper} "
            f"starts={[round(v, 4) for v in d.start_objectives]} "
            f"penalty={d.penalty:g} violation={d.max_violation:.4f} "
            f"feasible={d.feasible} wall={time.perf_counter() - start:.1f}s")
        return solution

    for key, spec in baseline_specs.items():
        baselines[key] = solve(spec)
        if spec.name in [s.name for s in manifest.scenarios]:
            solutions[spec.name] = baselines[key]

    pending = [s for s in manifest.scenarios if s.name not in solutions]
    if jobs > 1 and len(pending) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for name, solution in pool.map(
                    _solve_worker, [(s, params, manifest) for s in pending]):
                solutions[name] = solution
                d = solution.diagnostics
                log_lines.append(
                    f"{name}: W={d.objective:.6f} iters={d.iterations} "
                    f"rel_pg={d.rel_pg:.3e} feasible={d.feasible} (pooled)")
    else:
        for spec in pending:
            solutions[spec.name] = solve(spec)

    combined = []
    for spec in manifest.scenarios:
        solution = solutions[spec.name]
        base = baselines[_overrides_key(spec.overrides)]
        summary = summarize(solution.trajectory, base.trajectory,
                            solution.engine.econ)
        row = summary_row(solution, summary, params, manifest.seed)
        combined.append(row)
        write_trajectory_csv(os.path.join(out, f"{spec.name}_trajectory.csv"),
                             solution, params, manifest.seed)
        meta = dict(scenario=spec.name, seed=manifest.seed, mode=spec.mode)
        _atomic_write(os.path.join(out, f"{spec.name}_summary.csv"),
                      _csv_text(SUMMARY_SCHEMA, meta, SUMMARY_COLUMNS, [row]))

    _atomic_write(os.path.join(out, "summary.csv"),
                  _csv_text(SUMMARY_SCHEMA, dict(seed=manifest.seed),
                            SUMMARY_COLUMNS, combined))
    _atomic_write(os.path.join(out, "run.log"), "\n".join(log_lines) + "\n")
    logger.info("wrote %d scenario output sets to %s", len(solutions), out)
    return solutions


def sweep_sg_scale(scenario: str, scales, params: ParameterSet | None = None,
                   seed: int = 0, multistarts: int = 3,
                   solution: Solution | None = None,
                   baseline: Solution | None = None) -> list[list]:
    """SG perturbation sweep around a solved SG scenario.

    For each scale factor, the optimal SG path is rescaled with mitigation
    and savings fixed; rows hold the BGE change against baseline and the
    2050 decomposition (side effects, and climate damages avoided relative
    to the same mitigation path without SG).
    """
    known = {name for name, flags in PORTFOLIOS.items() if flags.get("allow_sg")}
    if solution is None:
        if scenario not in known:
            raise ValidationError(
                f"sweep-sg: unknown SG scenario {scenario!r} (choose from "
                f"{sorted(known)})")
        if params is None:
            params = load_params()
        spec = ScenarioSpec(scenario, scenario, multistarts=multistarts)
        solution = optimize(spec.to_config(multistarts), params, seed=seed)
    if baseline is None:
        base_spec = ScenarioSpec("baseline", "baseline", multistarts=multistarts)
        baseline = optimize(base_spec.to_config(multistarts), params, seed=seed)

    i2050 = solution.trajectory.year_index(2050)
    zero_traj, _ = perturb_sg(solution, 0.0, baseline.trajectory)
    damage_without_sg = zero_traj.climate_damage_frac[i2050]
    rows = []
    for scale in scales:
        traj, dbge = perturb_sg(solution, float(scale), baseline.trajectory)
        side = 100.0 * traj.sg_damage_frac[i2050]
        avoided = 100.0 * (damage_without_sg - traj.climate_damage_frac[i2050])
        rows.append([float(scale), dbge, side, avoided])
    return rows


def write_sweep_csv(path: str, scenario: str, rows: list[list],
                    seed: int) -> None:
    meta = dict(scenario=scenario, seed=seed)
    _atomic_write(path, _csv_text(SWEEP_SCHEMA, meta, SWEEP_COLUMNS, rows))
