"""Production, emissions, policy costs, damages, consumption, and welfare.

The Ramsey-growth side of one simulated year.  Mitigation and carbon
removal share a single cost curve: the abatement cost fraction applies
unchanged for control rates above one, where industrial emissions turn
net negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .kernel import CPC_FLOOR, _EXP_CLAMP
from .params import EconParams, ExogenousPaths


@dataclass(frozen=True)
class EconState:
    """Capital stock, trillions 2010 USD."""

    capital: float

    def validate(self) -> None:
        if self.capital <= 0:
            raise ValidationError("capital: must be positive")


@dataclass(frozen=True)
class Controls:
    """Decision variables for one year."""

    mu: float        # abatement/CDR fraction of baseline industrial emissions
    savings: float   # fraction of net output invested
    f_srm: float     # solar-geoengineering forcing, W/m2

    def validate(self, mu_max: float = 1.0, f_max: float = 0.0) -> None:
        if not 0.0 <= self.mu <= mu_max:
            raise ValidationError(f"mu: {self.mu} outside [0, {mu_max}]")
        if not 0.0 <= self.savings <= 1.0:
            raise ValidationError(f"savings: {self.savings} outside [0, 1]")
        if not 0.0 <= self.f_srm <= max(f_max, 0.0):
            raise ValidationError(f"f_srm: {self.f_srm} outside [0, {f_max}]")


@dataclass(frozen=True)
class YearFlows:
    """Per-year economic flows (output in trillions 2010 USD/yr)."""

    gross_output: float
    industrial_emissions: float    # GtCO2/yr, negative under net removal
    abatement_frac: float          # fraction of gross output
    climate_damage_frac: float
    sg_damage_frac: float
    net_output: float
    consumption: float
    per_capita_consumption: float  # thousand USD per person-year
    per_capita_utility: float


def gross_output(productivity: float, capital: float, population: float,
                 params: EconParams) -> float:
    """Cobb-Douglas output: A * K^share * (L/1000)^(1-share)."""
    if productivity <= 0 or capital <= 0 or population <= 0:
        raise ValidationError("gross_output: inputs must be positive")
    return productivity * capital ** params.capital_share \
        * (population / 1000.0) ** (1.0 - params.capital_share)


def industrial_emissions(intensity: float, output: float, mu: float) -> float:
    """Realized industrial emissions sigma*Y*(1-mu); negative when mu > 1."""
    if intensity <= 0 or output <= 0:
        raise ValidationError("industrial_emissions: intensity and output must be positive")
    if mu < 0:
        raise ValidationError("mu: must be nonnegative")
    return intensity * output * (1.0 - mu)


def abatement_cost_fraction(mu: float, theta1: float,
                            params: EconParams) -> float:
    """Policy cost as a fraction of gross output: theta1 * mu^exponent.

    The same curve covers mitigation (mu <= 1) and carbon removal
    (mu > 1); cost and marginal cost are continuous across mu = 1.
    """
    if mu < 0:
        raise ValidationError("mu: must be nonnegative")
    if theta1 <= 0:
        raise ValidationError("theta1: must be positive")
    return theta1 * mu ** params.abatement_exponent


def climate_damage_fraction(t_atm: float, params: EconParams) -> float:
    """Output loss fraction, quadratic in atmospheric temperature."""
    return params.damage_coeff * t_atm * t_atm


def sg_damage_fraction(f_srm: float, params: EconParams, f2xco2: float,
                       exponent: float | None = None) -> float:
    """Solar-geoengineering side effects as an output loss fraction.

    Proportional to (F_SRM / F_2xCO2)^exponent; the default exponent comes
    from the parameter set (2, or 1 in the linear sensitivity variant).
    """
    if f_srm < 0:
        raise ValidationError("f_srm: must be nonnegative")
    if exponent is None:
        exponent = params.sg_damage_exponent
    if exponent not in (1.0, 2.0, 1, 2):
        raise ValidationError("exponent: must be 1 or 2")
    return params.sg_damage_coeff * (f_srm / f2xco2) ** exponent


def per_capita_utility(cpc: float, elasmu: float) -> float:
    """CRRA utility of per-capita consumption (thousand USD/person-year).

    Below the consumption floor the argument is mapped through the same
    smooth exponential floor the simulator uses, so utility stays finite
    (and strongly negative) instead of blowing up -- this is the
    infeasibility signal the optimizer consumes as a penalty.
    """
    if cpc < CPC_FLOOR:
        z = max(cpc / CPC_FLOOR - 1.0, _EXP_CLAMP)
        cpc = CPC_FLOOR * math.exp(z)
    return (cpc ** (1.0 - elasmu) - 1.0) / (1.0 - elasmu) - 1.0


def economy_step(econ: EconState, t_atm: float, controls: Controls,
                 paths: ExogenousPaths, t: int, params: EconParams,
                 f2xco2: float, apply_damages: bool = True
                 ) -> tuple[EconState, YearFlows]:
    """One year of the economy given this year's temperature and controls.

    Net output stacks damages and policy cost multiplicatively:
    Y * (1 - climate damage - SG damage) * (1 - abatement cost).
    Consumption and investment split net output by the savings rate;
    capital depreciates and accumulates annually.  Under the
    temperature-cap analysis mode (`apply_damages=False`) climate damages
    are removed from output while SG side effects remain.
    """
    yg = gross_output(paths.productivity[t], econ.capital,
                      paths.population[t], params)
    eind = industrial_emissions(paths.emissions_intensity[t], yg, controls.mu)
    dclim = climate_damage_fraction(t_atm, params) if apply_damages else 0.0
    dsg = sg_damage_fraction(controls.f_srm, params, f2xco2)
    lamb = abatement_cost_fraction(controls.mu, paths.backstop_cost_frac[t],
                                   params)
    ynet = yg * (1.0 - dclim - dsg) * (1.0 - lamb)
    cons = (1.0 - controls.savings) * ynet
    cpc = 1000.0 * cons / paths.population[t]
    util = per_capita_utility(cpc, params.elasticity_marginal_utility)
    capital = (1.0 - params.depreciation) * econ.capital \
        + controls.savings * ynet
    flows = YearFlows(yg, eind, lamb, dclim, dsg, ynet, cons, cpc, util)
    return EconState(capital), flows


def welfare(trajectory, params: EconParams) -> float:
    """Discounted population-weighted CRRA welfare of a trajectory.

    W = sum_t L_t * u(C_t / L_t) * (1 + rho)^(-t).
    """
    pop = np.asarray(trajectory.population)
    cons = np.asarray(trajectory.consumption)
    n = len(cons)
    disc = (1.0 + params.time_preference) ** (-np.arange(n))
    cpc = 1000.0 * cons / pop
    el = params.elasticity_marginal_utility
    u = np.array([per_capita_utility(c, el) for c in cpc])
    return float(np.sum(pop * u * disc))
