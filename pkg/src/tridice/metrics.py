"""Reported quantities: carbon tax, social cost of carbon, BGE, summaries.

All functions are pure consumers of solved scenarios.  The social cost of
carbon is available through two independent routes -- the adjoint
emissions shadow value and a finite 1-GtCO2 pulse re-simulation -- which
are required to agree within 1% and are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import EconParams, ParameterSet
from .trajectory import Trajectory


def carbon_tax(mu: float, theta1: float, sigma: float,
               params: EconParams) -> float:
    """Marginal abatement (or removal) cost, 2010 USD per tCO2.

    Derivative of the policy cost theta1*Y*mu^theta2 with respect to
    abated tonnes sigma*Y*mu; the 1000 converts trillions-per-GtCO2 to
    USD-per-tCO2.  At mu = 1 this equals the backstop price.
    """
    if mu < 0:
        raise ValidationError("mu: must be nonnegative")
    if sigma <= 0 or theta1 <= 0:
        raise ValidationError("carbon_tax: sigma and theta1 must be positive")
    th2 = params.abatement_exponent
    return 1000.0 * theta1 * th2 * mu ** (th2 - 1.0) / sigma


def carbon_tax_series(trajectory: Trajectory, params: ParameterSet,
                      econ: EconParams | None = None) -> np.ndarray:
    """Per-year carbon tax along a trajectory."""
    if econ is None:
        econ = params.econ
    th1 = params.paths.backstop_cost_frac
    sig = params.paths.emissions_intensity
    th2 = econ.abatement_exponent
    return 1000.0 * th1 * th2 * trajectory.mu ** (th2 - 1.0) / sig


def _require_converged(solution) -> None:
    diag = solution.diagnostics
    if not diag.converged:
        raise ValidationError(
            f"scc: solution '{solution.config.name}' is not converged "
            f"(rel_pg={diag.rel_pg:.2e}); refusing shadow prices")


def scc_series(solution) -> np.ndarray:
    """Social cost of carbon per year, 2010 USD/tCO2, from the adjoint.

    Ratio of the emissions shadow value to the consumption shadow value
    along the optimized path, converted to per-tonne units.
    """
    _require_converged(solution)
    engine = solution.engine
    c = solution.controls
    penalty = solution.diagnostics.penalty
    res = engine.run(c.mu, c.savings, c.f_srm, objective=True,
                     penalty=penalty)
    _, _, _, _, ge = engine.gradient(c.mu, c.savings, c.f_srm,
                                     forward_result=res, penalty=penalty)
    lam_c = np.array([engine.marginal_consumption_value(res, t)
                      for t in range(engine.n)])
    return -1000.0 * ge / lam_c


def scc(solution, year: int | None = None):
    """SCC at one year (or the whole series when `year` is None)."""
    series = scc_series(solution)
    if year is None:
        return series
    return float(series[solution.trajectory.year_index(year)])


def scc_pulse(solution, year: int, pulse_gtco2: float = 1.0) -> float:
    """SCC by finite pulse: inject CO2 at `year`, controls held fixed.

    The discounted welfare loss is converted to consumption units with the
    same consumption shadow value the adjoint route uses.
    """
    _require_converged(solution)
    engine = solution.engine
    c = solution.controls
    penalty = solution.diagnostics.penalty
    t = solution.trajectory.year_index(year)
    base = engine.run(c.mu, c.savings, c.f_srm, objective=True,
                      penalty=penalty)
    pulse = np.zeros(engine.n)
    pulse[t] = pulse_gtco2
    bumped = engine.run(c.mu, c.savings, c.f_srm, pulse=pulse,
                        objective=True, penalty=penalty)
    dw = (bumped[0] - base[0]) / pulse_gtco2
    lam_c = engine.marginal_consumption_value(base, t)
    return -1000.0 * dw / lam_c


def _crra_sum(trajectory: Trajectory, econ: EconParams) -> float:
    """Discounted population-weighted sum of cpc^(1-eta)/(1-eta)."""
    n = trajectory.horizon
    disc = (1.0 + econ.time_preference) ** (-np.arange(n, dtype=float))
    uw = trajectory.population * disc
    cpc = 1000.0 * trajectory.consumption / trajectory.population
    if np.any(cpc <= 0):
        raise ValidationError("bge: consumption must be positive")
    el = econ.elasticity_marginal_utility
    if np.isclose(el, 1.0):
        return float(np.sum(uw * np.log(cpc)))
    return float(np.sum(uw * cpc ** (1.0 - el) / (1.0 - el)))


def bge(scenario: Trajectory, baseline: Trajectory,
        econ: EconParams) -> float:
    """Balanced growth equivalent of `scenario` against `baseline`, percent.

    The uniform percentage consumption scaling of the baseline path that
    equalizes welfare with the scenario; closed form under CRRA utility
    (the additive utility constants cancel because both paths share the
    same population and discounting).
    """
    if scenario.horizon != baseline.horizon:
        raise ValidationError("bge: trajectories must share a horizon")
    s_scen = _crra_sum(scenario, econ)
    s_base = _crra_sum(baseline, econ)
    el = econ.elasticity_marginal_utility
    if np.isclose(el, 1.0):
        n = baseline.horizon
        disc = (1.0 + econ.time_preference) ** (-np.arange(n, dtype=float))
        total_w = float(np.sum(baseline.population * disc))
        return 100.0 * (np.exp((s_scen - s_base) / total_w) - 1.0)
    return 100.0 * ((s_scen / s_base) ** (1.0 / (1.0 - el)) - 1.0)


@dataclass
class ScenarioSummary:
    """Headline results for one solved scenario (Table-style row).

    Peak years use the earliest year on exact ties; `% base` compares the
    scenario's peak-year emissions with the baseline scenario's emissions
    in the same year.
    """

    name: str
    peak_emissions_year: int
    peak_emissions_gtco2: float
    peak_emissions_pct_base: float
    net_zero_year: int | None
    net_positive_again_year: int | None
    peak_cdr_year: int | None
    peak_cdr_gtco2: float
    cumulative_industrial_ttco2: float
    peak_sg_year: int | None
    peak_sg_wm2: float
    peak_temperature_year: int
    peak_temperature_c: float
    bge_vs_baseline_pct: float


def summarize(trajectory: Trajectory, baseline: Trajectory,
              econ: EconParams) -> ScenarioSummary:
    """Extract the summary statistics of a solved trajectory."""
    if trajectory.horizon != baseline.horizon:
        raise ValidationError("summarize: trajectories must share a horizon")
    years = trajectory.years
    eind = trajectory.industrial_emissions

    i_peak = int(np.argmax(eind))
    base_same_year = baseline.industrial_emissions[i_peak]
    pct_base = 100.0 * eind[i_peak] / base_same_year if base_same_year > 0 \
        else float("nan")

    nonpos = np.flatnonzero(eind <= 0)
    net_zero = int(years[nonpos[0]]) if len(nonpos) else None
    net_positive_again = None
    if len(nonpos):
        after = np.flatnonzero(eind[nonpos[0]:] > 0)
        if len(after):
            net_positive_again = int(years[nonpos[0] + after[0]])

    removal = -eind
    peak_cdr = float(removal.max())
    if peak_cdr > 0:
        cdr_year = int(years[int(np.argmax(removal))])
    else:
        peak_cdr, cdr_year = 0.0, None

    cumulative = float(eind[eind > 0].sum()) / 1000.0

    peak_sg = float(trajectory.f_srm.max())
    sg_year = int(years[int(np.argmax(trajectory.f_srm))]) if peak_sg > 0 else None

    i_t = int(np.argmax(trajectory.t_atm))
    return ScenarioSummary(
        name=trajectory.config.name,
        peak_emissions_year=int(years[i_peak]),
        peak_emissions_gtco2=float(eind[i_peak]),
        peak_emissions_pct_base=float(pct_base),
        net_zero_year=net_zero,
        net_positive_again_year=net_positive_again,
        peak_cdr_year=cdr_year,
        peak_cdr_gtco2=peak_cdr,
        cumulative_industrial_ttco2=cumulative,
        peak_sg_year=sg_year,
        peak_sg_wm2=peak_sg,
        peak_temperature_year=int(years[i_t]),
        peak_temperature_c=float(trajectory.t_atm[i_t]),
        bge_vs_baseline_pct=bge(trajectory, baseline, econ),
    )
