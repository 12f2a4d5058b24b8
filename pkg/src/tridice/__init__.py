"""Annual-timestep DICE2016R2 with mitigation, CDR, and solar geoengineering."""

from .errors import (CalibrationError, ConvergenceError, ParamFileError,
                     TridiceError, ValidationError)
from .params import (ClimateParams, EconParams, ExogenousPaths, ParameterSet,
                     annualize_carbon_cycle, annualize_paths, load_params)
from .trajectory import (ControlPath, ScenarioConfig, Trajectory, simulate)
from .optimizer import Solution, optimize, optimize_cea, perturb_sg
from .metrics import ScenarioSummary, bge, carbon_tax, scc, summarize
from .scenarios import (RunManifest, ScenarioSpec, default_manifest,
                        load_manifest, run_manifest, sweep_sg_scale)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "ConvergenceError", "ParamFileError", "TridiceError",
    "ValidationError", "ClimateParams", "EconParams", "ExogenousPaths",
    "ParameterSet", "annualize_carbon_cycle", "annualize_paths", "load_params",
    "ControlPath", "ScenarioConfig", "Trajectory", "simulate",
    "Solution", "optimize", "optimize_cea", "perturb_sg",
    "ScenarioSummary", "bge", "carbon_tax", "scc", "summarize",
    "RunManifest", "ScenarioSpec", "default_manifest", "load_manifest",
    "run_manifest", "sweep_sg_scale",
]
