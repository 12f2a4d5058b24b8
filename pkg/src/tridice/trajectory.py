"""Scenario configuration, control paths, and the trajectory simulator.

`simulate` is deterministic and side-effect free: identical inputs give
bit-identical trajectories.  The heavy lifting happens in the jit kernel;
this module validates inputs, prepares the exogenous arrays once, and
wraps kernel output into a `Trajectory` record.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernel
from .errors import ValidationError
from .params import (CO2_PER_C, EconParams, ExogenousPaths, ParameterSet,
                     with_overrides)

# Numerical control bounds.  The CDR cap and the SG cap are generous
# numerical bounds, not policy assumptions; reported optima are checked to
# stay strictly inside them.
MU_MAX = 10.0
FSRM_MAX = 20.0

# Terminal conditions: savings pinned to the long-run rate over the last
# years of the horizon, and the optimizer objective carries a constant
# consumption continuation after the horizon.
SAVINGS_PIN_YEARS = 20
TAIL_YEARS = 300

MODE_CBA = "cba"
MODE_CEA = "cea"


@dataclass(frozen=True)
class ScenarioConfig:
    """Portfolio flags, analysis mode, and parameter overrides for one run."""

    name: str = "scenario"
    allow_cdr: bool = False
    allow_sg: bool = False
    mode: str = MODE_CBA
    t_cap: float | None = None
    baseline_mode: bool = False
    overrides: Mapping[str, float] = field(default_factory=dict)
    multistarts: int = 3          # random restarts in addition to the ramp start

    def validate(self) -> None:
        if self.mode not in (MODE_CBA, MODE_CEA):
            raise ValidationError(f"mode: must be '{MODE_CBA}' or '{MODE_CEA}'")
        if self.mode == MODE_CEA:
            if self.t_cap is None or self.t_cap <= 0:
                raise ValidationError("t_cap: CEA mode needs a positive cap")
        if self.baseline_mode and (self.allow_cdr or self.allow_sg):
            raise ValidationError(
                "baseline_mode: excludes CDR and solar geoengineering")
        if self.multistarts < 0:
            raise ValidationError("multistarts: must be nonnegative")

    @property
    def mu_upper(self) -> float:
        return MU_MAX if self.allow_cdr else 1.0

    @property
    def fsrm_upper(self) -> float:
        return FSRM_MAX if self.allow_sg else 0.0

    @property
    def apply_damages(self) -> bool:
        return self.mode == MODE_CBA


@dataclass(frozen=True)
class ControlPath:
    """Per-year decision variables over the full horizon."""

    mu: np.ndarray
    savings: np.ndarray
    f_srm: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.mu)

    def validate(self, config: ScenarioConfig, horizon: int,
                 initial_control_rate: float) -> None:
        for name, arr in (("mu", self.mu), ("savings", self.savings),
                          ("f_srm", self.f_srm)):
            if len(arr) != horizon:
                raise ValidationError(
                    f"{name}: length {len(arr)} != horizon {horizon}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name}: non-finite values")
        tol = 1e-9
        if np.any(self.mu < -tol) or np.any(self.mu > config.mu_upper + tol):
            raise ValidationError(
                f"mu: outside [0, {config.mu_upper}]")
        if np.any(self.savings < -tol) or np.any(self.savings > 1 + tol):
            raise ValidationError("savings: outside [0, 1]")
        if np.any(self.f_srm < -tol) or np.any(self.f_srm > config.fsrm_upper + tol):
            raise ValidationError(
                f"f_srm: outside [0, {config.fsrm_upper}]")
        if config.baseline_mode and np.any(
                np.abs(self.mu - initial_control_rate) > tol):
            raise ValidationError(
                f"mu: baseline mode pins mu to {initial_control_rate}")


@dataclass
class Trajectory:
    """Full per-year record of a simulated scenario."""

    config: ScenarioConfig
    years: np.ndarray
    population: np.ndarray
    mu: np.ndarray
    savings: np.ndarray
    f_srm: np.ndarray
    capital: np.ndarray
    m_atm: np.ndarray
    m_upper: np.ndarray
    m_lower: np.ndarray
    t_atm: np.ndarray
    t_ocean: np.ndarray
    forcing: np.ndarray
    gross_output: np.ndarray
    industrial_emissions: np.ndarray
    land_emissions: np.ndarray
    total_emissions: np.ndarray
    abatement_frac: np.ndarray
    climate_damage_frac: np.ndarray
    sg_damage_frac: np.ndarray
    net_output: np.ndarray
    consumption: np.ndarray
    per_capita_consumption: np.ndarray
    welfare: float

    @property
    def horizon(self) -> int:
        return len(self.years)

    def year_index(self, year: int) -> int:
        idx = int(year - self.years[0])
        if not 0 <= idx < self.horizon:
            raise ValidationError(f"year {year} outside horizon")
        return idx

    def validate(self) -> None:
        if np.any(self.m_atm <= 0) or np.any(self.m_upper <= 0) \
                or np.any(self.m_lower <= 0):
            raise ValidationError("carbon reservoirs: must stay positive")
        if np.any(self.capital <= 0):
            raise ValidationError("capital: must stay positive")
        if np.any(self.consumption <= 0):
            raise ValidationError("consumption: must stay positive")
        if not np.all(np.isfinite(self.t_atm)):
            raise ValidationError("t_atm: non-finite values")


class SimEngine:
    """Packs a parameter set for the kernel and evaluates runs/gradients.

    One engine serves one (parameter set, scenario config) pair; the
    temperature-cap penalty weight is a per-call argument so the CEA
    escalation loop can reuse the engine.
    """

    def __init__(self, params: ParameterSet, config: ScenarioConfig):
        config.validate()
        econ = with_overrides(params.econ, config.overrides)
        self.params = params
        self.config = config
        self.econ = econ
        self.climate = params.climate
        self.paths = params.paths
        self.n = params.paths.horizon
        p = params.paths
        self._series = (p.population, p.productivity, p.emissions_intensity,
                        p.land_emissions, p.exogenous_forcing,
                        p.backstop_cost_frac)
        c = params.climate
        self._scalars = (econ.initial_capital, c.m_atm0, c.m_upper0,
                         c.m_lower0, c.t_atm0, c.t_ocean0,
                         econ.capital_share, econ.depreciation,
                         econ.damage_coeff, econ.abatement_exponent,
                         econ.sg_damage_coeff, econ.sg_damage_exponent,
                         econ.elasticity_marginal_utility,
                         c.f2xco2, c.m_preindustrial, c.temp_response_atm,
                         c.temp_exchange, c.temp_response_ocean,
                         c.forcing_to_temp)
        disc = (1.0 + econ.time_preference) ** (-np.arange(self.n, dtype=float))
        self.uw_plain = p.population * disc
        self.uw_objective = self.uw_plain.copy()
        tail = np.sum((1.0 + econ.time_preference) **
                      (-(self.n - 1 + np.arange(1, TAIL_YEARS + 1, dtype=float))))
        self.uw_objective[-1] += p.population[-1] * tail
        self._zero = np.zeros(self.n)
        self._t_cap = float(config.t_cap) if config.t_cap is not None else 0.0

    def run(self, mu, savings, f_srm, pulse=None, objective=False,
            penalty=0.0):
        """Forward pass; returns the raw kernel tuple (w first)."""
        uw = self.uw_objective if objective else self.uw_plain
        return kernel.forward(
            np.asarray(mu, dtype=float), np.asarray(savings, dtype=float),
            np.asarray(f_srm, dtype=float),
            self._zero if pulse is None else np.asarray(pulse, dtype=float),
            *self._series, uw, self.climate.carbon_transfer,
            *self._scalars,
            self.config.apply_damages, self._t_cap, penalty)

    def gradient(self, mu, savings, f_srm, forward_result=None,
                 objective=True, penalty=0.0):
        """Objective value and exact gradients (gmu, gs, gf, ge)."""
        mu = np.asarray(mu, dtype=float)
        savings = np.asarray(savings, dtype=float)
        f_srm = np.asarray(f_srm, dtype=float)
        res = forward_result
        if res is None:
            res = self.run(mu, savings, f_srm, objective=objective,
                           penalty=penalty)
        (w, cap, m_at, m_up, m_lo, t_atm, t_ocean, forc, ygross, eind,
         e_tot, ynet, cons, cpc, ceff, cslope, maeff, maslope,
         dclim, dsg, lamb, kslope) = res
        uw = self.uw_objective if objective else self.uw_plain
        gmu, gs, gf, ge = kernel.backward(
            mu, savings, f_srm,
            *self._series, uw, self.climate.carbon_transfer,
            self._scalars[6], self._scalars[7], self._scalars[8],
            self._scalars[9], self._scalars[10], self._scalars[11],
            self._scalars[12], self._scalars[13], self._scalars[14],
            self._scalars[15], self._scalars[16], self._scalars[17],
            self._scalars[18],
            self.config.apply_damages, self._t_cap, penalty,
            cap, t_atm, t_ocean, ygross, ynet, ceff, cslope,
            maeff, maslope, dclim, dsg, lamb, kslope)
        return w, gmu, gs, gf, ge

    def marginal_consumption_value(self, result, t: int) -> float:
        """d(objective)/d(consumption at year t), per trillion USD."""
        ceff, cslope = result[14], result[15]
        el = self.econ.elasticity_marginal_utility
        return float(self.uw_objective[t] * ceff[t] ** (-el) * cslope[t]
                     * 1000.0 / self.paths.population[t])

    def to_trajectory(self, mu, savings, f_srm, result=None) -> Trajectory:
        """Wrap a forward run into a Trajectory record (plain welfare)."""
        mu = np.asarray(mu, dtype=float)
        savings = np.asarray(savings, dtype=float)
        f_srm = np.asarray(f_srm, dtype=float)
        if result is None:
            result = self.run(mu, savings, f_srm)
        (w, cap, m_at, m_up, m_lo, t_atm, t_ocean, forc, ygross, eind,
         e_tot, ynet, cons, cpc, ceff, cslope, maeff, maslope,
         dclim, dsg, lamb, kslope) = result
        applied = dclim if self.config.apply_damages else np.zeros(self.n)
        return Trajectory(
            config=self.config,
            years=self.paths.years.copy(),
            population=self.paths.population.copy(),
            mu=mu.copy(), savings=savings.copy(), f_srm=f_srm.copy(),
            capital=cap, m_atm=m_at, m_upper=m_up, m_lower=m_lo,
            t_atm=t_atm, t_ocean=t_ocean, forcing=forc,
            gross_output=ygross, industrial_emissions=eind,
            land_emissions=self.paths.land_emissions.copy(),
            total_emissions=e_tot,
            abatement_frac=lamb, climate_damage_frac=applied,
            sg_damage_frac=dsg, net_output=ynet, consumption=cons,
            per_capita_consumption=cpc, welfare=float(w))


def simulate(controls: ControlPath, config: ScenarioConfig,
             params: ParameterSet) -> Trajectory:
    """Simulate a full trajectory from a control path.

    Deterministic: identical inputs give bit-identical trajectories.
    Raises ValidationError if the control path violates the bounds implied
    by the scenario configuration.
    """
    config.validate()
    engine = SimEngine(params, config)
    controls.validate(config, engine.n, engine.econ.initial_control_rate)
    return engine.to_trajectory(controls.mu, controls.savings, controls.f_srm)
