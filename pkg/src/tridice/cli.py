"""Command-line scenario runner.

Subcommands
-----------
run             solve a manifest (built-in default: 4 portfolios, 6
                sensitivity runs, 3 temperature-capped runs)
optimize        solve a single scenario from flags
sweep-sg        SG perturbation sweep around a solved SG scenario
validate-params check a calibration file (optionally recalibrate)

Exit codes: 0 success, 2 validation problem, 3 convergence failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .errors import (CalibrationError, ConvergenceError, ParamFileError,
                     ValidationError)
from .metrics import summarize
from .optimizer import optimize
from .params import load_params, load_raw
from .scenarios import (PORTFOLIOS, RunManifest, ScenarioSpec,
                        SUMMARY_COLUMNS, SUMMARY_SCHEMA, _atomic_write,
                        _csv_text, default_manifest, load_manifest,
                        run_manifest, summary_row, sweep_sg_scale,
                        write_sweep_csv, write_trajectory_csv)
from .trajectory import MODE_CBA, MODE_CEA

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValidationError(f"--override expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            overrides[key.strip()] = float(value)
        except ValueError as exc:
            raise ValidationError(f"--override {key}: not a number: {value!r}") from exc
    return overrides


def _parse_scales(text):
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("--scales range needs start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValidationError("--scales: need step > 0 and stop >= start")
        n = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="tridice",
        description="Climate policy portfolio optimization "
                    "(mitigation, CDR, solar geoengineering)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a manifest of scenarios")
    run.add_argument("--manifest", help="YAML manifest (default: built-in batch)")
    run.add_argument("--out", help="output directory (overrides manifest)")
    run.add_argument("--seed", type=int, help="multistart seed (overrides manifest)")
    run.add_argument("--jobs", type=int, default=1,
                     help="solve scenarios in parallel processes")
    run.add_argument("--params", help="calibration file (default: bundled)")

    opt = sub.add_parser("optimize", help="solve one scenario from flags")
    opt.add_argument("--name", default="scenario")
    opt.add_argument("--allow-cdr", action="store_true")
    opt.add_argument("--allow-sg", action="store_true")
    opt.add_argument("--baseline-mode", action="store_true")
    opt.add_argument("--mode", choices=[MODE_CBA, MODE_CEA], default=MODE_CBA)
    opt.add_argument("--t-cap", type=float)
    opt.add_argument("--override", action="append", metavar="KEY=VALUE",
                     help="EconParams override, repeatable")
    opt.add_argument("--multistarts", type=int, default=3)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--out", default="runs")
    opt.add_argument("--params")

    sweep = sub.add_parser("sweep-sg", help="SG perturbation sweep")
    sweep.add_argument("--scenario", default="mitigation-sg",
                       help="SG portfolio to perturb")
    sweep.add_argument("--scales", default="0:2:0.1",
                       help="comma list or start:stop:step")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--multistarts", type=int, default=3)
    sweep.add_argument("--out", default="runs")
    sweep.add_argument("--params")

    val = sub.add_parser("validate-params", help="check a calibration file")
    val.add_argument("--params")
    val.add_argument("--recalibrate", action="store_true",
                     help="recompute the annual climate block and compare")
    return parser


def _cmd_run(args) -> int:
    params = load_params(args.params)
    if args.manifest:
        manifest = load_manifest(args.manifest)
    else:
        manifest = default_manifest(params)
    if args.out:
        manifest.output_dir = args.out
    if args.seed is not None:
        manifest.seed = args.seed
    run_manifest(manifest, params, jobs=args.jobs)
    print(f"wrote {len(manifest.scenarios)} output sets to {manifest.output_dir}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    params = load_params(args.params)
    spec = ScenarioSpec(
        name=args.name,
        portfolio="baseline" if args.baseline_mode else (
            "full" if args.allow_cdr and args.allow_sg
            else "mitigation-cdr" if args.allow_cdr
            else "mitigation-sg" if args.allow_sg
            else "mitigation"),
        mode=args.mode, t_cap=args.t_cap,
        overrides=_parse_overrides(args.override),
        multistarts=args.multistarts)
    config = spec.to_config(args.multistarts)
    solution = optimize(config, params, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    write_trajectory_csv(os.path.join(args.out, f"{args.name}_trajectory.csv"),
                         solution, params, args.seed)
    base_spec = ScenarioSpec("baseline", "baseline",
                             overrides=dict(spec.overrides),
                             multistarts=args.multistarts)
    base = optimize(base_spec.to_config(args.multistarts), params,
                    seed=args.seed)
    summary = summarize(solution.trajectory, base.trajectory,
                        solution.engine.econ)
    row = summary_row(solution, summary, params, args.seed)
    _atomic_write(os.path.join(args.out, f"{args.name}_summary.csv"),
                  _csv_text(SUMMARY_SCHEMA,
                            dict(scenario=args.name, seed=args.seed,
                                 mode=args.mode),
                            SUMMARY_COLUMNS, [row]))
    d = solution.diagnostics
    print(f"{args.name}: welfare={solution.trajectory.welfare:.4f} "
          f"iters={d.iterations} rel_pg={d.rel_pg:.2e} feasible={d.feasible}")
    if not d.feasible:
        print("temperature cap is infeasible for this portfolio")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    params = load_params(args.params)
    scales = _parse_scales(args.scales)
    rows = sweep_sg_scale(args.scenario, scales, params, seed=args.seed,
                          multistarts=args.multistarts)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.scenario}_sg_sweep.csv")
    write_sweep_csv(path, args.scenario, rows, args.seed)
    print(f"wrote {len(rows)} sweep rows to {path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    raw = load_raw(args.params)
    params = load_params(args.params)
    print(f"schema OK: horizon {params.paths.horizon} years from "
          f"{params.paths.years[0]}")
    print(f"abatement exponent {params.econ.abatement_exponent}, "
          f"SG damage coeff {params.econ.sg_damage_coeff}, "
          f"time preference {params.econ.time_preference}/yr")
    phi = params.climate.carbon_transfer
    print(f"annual carbon matrix column sums: {phi.sum(axis=0)}")
    if args.recalibrate:
        from .calibration import baseline_node_mismatch, recalibrate_annual_climate
        from .params import flow_matrix
        x12, x23, c1, c4 = recalibrate_annual_climate(raw)
        print("recalibrated annual_climate:")
        print(f"  carbon_atm_to_upper: {x12:.10f}")
        print(f"  carbon_upper_to_lower: {x23:.10f}")
        print(f"  temp_response_atm: {c1:.10f}")
        print(f"  temp_response_ocean: {c4:.10f}")
        phi_new = flow_matrix(x12, x23, raw.m_atm_eq, raw.m_upper_eq,
                              raw.m_lower_eq)
        mismatch = baseline_node_mismatch(raw, phi_new, c1, c4)
        print(f"baseline temperature mismatch at nodes: "
              f"max {np.abs(mismatch).max():.4f} degC")
        if raw.annual_climate is not None:
            stored = (raw.annual_climate["carbon_atm_to_upper"],
                      raw.annual_climate["carbon_upper_to_lower"],
                      raw.annual_climate["temp_response_atm"],
                      raw.annual_climate["temp_response_ocean"])
            drift = max(abs(a - b) / max(abs(b), 1e-12)
                        for a, b in zip((x12, x23, c1, c4), stored))
            print(f"stored annual_climate drift: {drift:.2e}")
            if drift > 1e-3:
                print("warning: stored annual_climate block is stale; "
                      "update it with the values above")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "optimize": _cmd_optimize,
                "sweep-sg": _cmd_sweep, "validate-params": _cmd_validate}
    try:
        return handlers[args.command](args)
    except (ParamFileError, ValidationError, CalibrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
