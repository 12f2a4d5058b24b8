"""Welfare-maximizing control paths under box constraints.

Direct transcription: every year's mitigation/CDR fraction, savings rate,
and SG forcing is a decision variable, optimized with L-BFGS-B using the
exact adjoint gradient from the kernel.  Convergence is declared when the
projected-gradient infinity norm drops below 1e-6 relative to the
objective scale.

Cost-effectiveness (CEA) mode removes climate damages from output and
enforces the temperature cap through an escalating quadratic penalty;
infeasibility (the cap cannot be met) is reported as a verdict on the
returned solution, not an exception.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, ValidationError
from .trajectory import (MODE_CEA, SAVINGS_PIN_YEARS, ControlPath,
                         ScenarioConfig, SimEngine, Trajectory)

logger = logging.getLogger(__name__)

REL_PG_TOL = 1e-6          # projected gradient / |objective|
MAX_ROUNDS = 6             # solver restarts per start before giving up
MAXITER_PER_ROUND = 6000
CEA_VIOLATION_TOL = 0.01   # degC, max cap violation at a feasible solution
CEA_PENALTIES = (1e5, 1e6, 1e7, 1e8, 1e9, 1e10)
RAMP_YEARS = 100           # default initial guess: mu ramps to 1 over this span


@dataclass
class Diagnostics:
    """Solver health report attached to every solution."""

    iterations: int = 0
    grad_evals: int = 0
    objective: float = 0.0
    pg_inf: float = 0.0
    rel_pg: float = 1.0
    converged: bool = False
    active_lower: int = 0
    active_upper: int = 0
    start_objectives: list = field(default_factory=list)
    best_start: int = 0
    penalty: float = 0.0
    max_violation: float = 0.0
    feasible: bool = True
    seed: int = 0


@dataclass
class Solution:
    """Optimized scenario: controls, trajectory, and solver diagnostics."""

    config: ScenarioConfig
    controls: ControlPath
    trajectory: Trajectory
    diagnostics: Diagnostics
    engine: SimEngine


def _bounds(engine: SimEngine) -> tuple[np.ndarray, np.ndarray]:
    n = engine.n
    cfg = engine.config
    econ = engine.econ
    lb = np.concatenate([np.zeros(n), np.zeros(n), np.zeros(n)])
    ub = np.concatenate([np.full(n, cfg.mu_upper), np.ones(n),
                         np.full(n, cfg.fsrm_upper)])
    # the base-year control rate is historical, not a choice
    lb[0] = ub[0] = econ.initial_control_rate
    if cfg.baseline_mode:
        lb[:n] = ub[:n] = econ.initial_control_rate
    pin = econ.long_run_savings
    lb[2 * n - SAVINGS_PIN_YEARS:2 * n] = pin
    ub[2 * n - SAVINGS_PIN_YEARS:2 * n] = pin
    return lb, ub


def _default_start(engine: SimEngine, lb, ub) -> np.ndarray:
    n = engine.n
    mu = np.minimum(np.arange(n) / RAMP_YEARS, 1.0)
    mu[0] = engine.econ.initial_control_rate
    x = np.concatenate([mu, np.full(n, 0.25), np.zeros(n)])
    return np.clip(x, lb, ub)


def _random_start(engine: SimEngine, rng, lb, ub) -> np.ndarray:
    n = engine.n
    knots = np.linspace(0, n - 1, 6)
    grid = np.arange(n)

    def smooth(low, high):
        return np.interp(grid, knots, rng.uniform(low, high, size=len(knots)))

    mu = smooth(0.0, 1.0) * min(engine.config.mu_upper, 2.0)
    s = smooth(0.12, 0.4)
    f = smooth(0.0, 3.0) if engine.config.allow_sg else np.zeros(n)
    return np.clip(np.concatenate([mu, s, f]), lb, ub)


def _projected_gradient(x, g, lb, ub) -> np.ndarray:
    """Gradient of the maximization problem projected onto the feasible box."""
    pg = g.copy()
    at_lower = x <= lb + 1e-12
    at_upper = x >= ub - 1e-12
    pg[at_lower & (pg < 0)] = 0.0
    pg[at_upper & (pg > 0)] = 0.0
    return pg


def _solve_from(engine: SimEngine, x0, lb, ub, penalty: float,
                diag: Diagnostics, rel_pg_tol: float) -> tuple[np.ndarray, float, float]:
    """Run L-BFGS-B (with restarts) from one start; returns (x, w, rel_pg)."""
    n = engine.n
    scale = None
    evals = [0]

    def objective(x):
        mu, s, f = x[:n], x[n:2 * n], x[2 * n:]
        w, gmu, gs, gf, _ = engine.gradient(mu, s, f, penalty=penalty)
        evals[0] += 1
        nonlocal scale
        if scale is None:
            scale = max(abs(w), 1.0)
        g = np.concatenate([gmu, gs, gf])
        return -w / scale, -g / scale

    x = np.clip(np.asarray(x0, dtype=float), lb, ub)
    w = None
    rel_pg = np.inf
    for _ in range(MAX_ROUNDS):
        res = minimize(objective, x, jac=True, method="L-BFGS-B",
                       bounds=np.stack([lb, ub], axis=1),
                       options=dict(maxiter=MAXITER_PER_ROUND,
                                    maxfun=2 * MAXITER_PER_ROUND,
                                    ftol=1e-15, gtol=rel_pg_tol / 5,
                                    maxcor=30))
        x = np.clip(res.x, lb, ub)
        diag.iterations += res.nit
        mu, s, f = x[:n], x[n:2 * n], x[2 * n:]
        w, gmu, gs, gf, _ = engine.gradient(mu, s, f, penalty=penalty)
        g = np.concatenate([gmu, gs, gf])
        pg = _projected_gradient(x, g, lb, ub)
        rel_pg = np.abs(pg).max() / max(abs(w), 1.0)
        if rel_pg < rel_pg_tol:
            break
    diag.grad_evals += evals[0]
    return x, w, rel_pg


def _optimize_box(engine: SimEngine, seed: int, penalty: float = 0.0,
                  warm_start: np.ndarray | None = None,
                  rel_pg_tol: float = REL_PG_TOL) -> tuple[np.ndarray, Diagnostics]:
    """Multistart bound-constrained maximization of the engine objective."""
    lb, ub = _bounds(engine)
    diag = Diagnostics(seed=seed, penalty=penalty)
    rng = np.random.default_rng(seed)
    starts = [warm_start] if warm_start is not None else [_default_start(engine, lb, ub)]
    starts += [_random_start(engine, rng, lb, ub)
               for _ in range(engine.config.multistarts)]

    best_x, best_w, best_pg = None, -np.inf, np.inf
    for k, x0 in enumerate(starts):
        x, w, rel_pg = _solve_from(engine, x0, lb, ub, penalty, diag, rel_pg_tol)
        diag.start_objectives.append(float(w))
        if w > best_w:
            best_x, best_w, best_pg, diag.best_start = x, w, rel_pg, k
    n = engine.n
    diag.objective = float(best_w)
    diag.rel_pg = float(best_pg)
    diag.pg_inf = float(best_pg * max(abs(best_w), 1.0))
    diag.converged = best_pg < rel_pg_tol
    free = (lb < ub)
    diag.active_lower = int(np.sum(free & (best_x <= lb + 1e-12)))
    diag.active_upper = int(np.sum(free & (best_x >= ub - 1e-12)))
    return best_x, diag


def _finish(engine: SimEngine, x: np.ndarray, diag: Diagnostics) -> Solution:
    n = engine.n
    controls = ControlPath(x[:n].copy(), x[n:2 * n].copy(), x[2 * n:].copy())
    trajectory = engine.to_trajectory(controls.mu, controls.savings,
                                      controls.f_srm)
    return Solution(engine.config, controls, trajectory, diag, engine)


def optimize(config: ScenarioConfig, params, seed: int = 0,
             rel_pg_tol: float = REL_PG_TOL,
             violation_tol: float = CEA_VIOLATION_TOL) -> Solution:
    """Solve a scenario for its optimal control path.

    CBA mode maximizes discounted welfare; CEA mode dispatches to
    :func:`optimize_cea`.  Raises ConvergenceError (carrying the best
    point found) if the projected-gradient criterion cannot be met.
    """
    config.validate()
    if config.mode == MODE_CEA:
        return optimize_cea(config, params, seed=seed, rel_pg_tol=rel_pg_tol,
                            violation_tol=violation_tol)
    engine = SimEngine(params, config)
    x, diag = _optimize_box(engine, seed, rel_pg_tol=rel_pg_tol)
    solution = _finish(engine, x, diag)
    if not diag.converged:
        raise ConvergenceError(
            f"{config.name}: projected gradient {diag.rel_pg:.2e} "
            f"above tolerance {rel_pg_tol:.0e} after {diag.iterations} iterations",
            solution=solution, diagnostics=diag)
    logger.info("%s: W=%.6g iters=%d rel_pg=%.2e", config.name,
                diag.objective, diag.iterations, diag.rel_pg)
    return solution


def optimize_cea(config: ScenarioConfig, params, seed: int = 0,
                 rel_pg_tol: float = REL_PG_TOL,
                 violation_tol: float = CEA_VIOLATION_TOL) -> Solution:
    """Temperature-capped cost-effectiveness optimization.

    Climate damages are removed from the objective (SG side-effect costs
    remain); the cap T_atm <= t_cap is enforced by an escalating quadratic
    penalty.  If the cap cannot be met the returned solution carries
    ``diagnostics.feasible == False`` instead of raising.
    """
    config.validate()
    if config.mode != MODE_CEA:
        raise ValidationError("optimize_cea: config.mode must be 'cea'")
    engine = SimEngine(params, config)
    x = None
    diag = None
    prev_violation = np.inf
    for penalty in CEA_PENALTIES:
        x, diag = _optimize_box(engine, seed, penalty=penalty, warm_start=x,
                                rel_pg_tol=rel_pg_tol)
        n = engine.n
        res = engine.run(x[:n], x[n:2 * n], x[2 * n:], penalty=penalty)
        violation = float(np.max(res[5]) - config.t_cap)
        diag.max_violation = max(violation, 0.0)
        logger.info("%s: penalty=%.0e violation=%.4f degC", config.name,
                    penalty, violation)
        if diag.max_violation <= violation_tol:
            break
        # a violation that has stopped shrinking marks an infeasible cap
        if violation > 0.1 and violation > 0.9 * prev_violation:
            break
        prev_violation = violation
    diag.feasible = diag.max_violation <= violation_tol
    solution = _finish(engine, x, diag)
    if not diag.converged:
        raise ConvergenceError(
            f"{config.name}: CEA inner solve did not converge "
            f"(rel_pg={diag.rel_pg:.2e})", solution=solution, diagnostics=diag)
    return solution


def perturb_sg(solution: Solution, scale: float, baseline: Trajectory
               ) -> tuple[Trajectory, float]:
    """Rescale the optimal SG path with mitigation and savings held fixed.

    Returns the re-simulated trajectory and its balanced-growth-equivalent
    change (percent) against `baseline`.
    """
    if not np.isfinite(scale) or scale < 0:
        raise ValidationError("scale: must be finite and nonnegative")
    if not solution.config.allow_sg:
        raise ValidationError("perturb_sg: scenario has no SG instrument")
    from .metrics import bge
    engine = solution.engine
    f = solution.controls.f_srm * scale
    f = np.minimum(f, engine.config.fsrm_upper)
    trajectory = engine.to_trajectory(solution.controls.mu,
                                      solution.controls.savings, f)
    return trajectory, bge(trajectory, baseline, engine.econ)
