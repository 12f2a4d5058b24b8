"""Time-step recalibration against the published 5-year model.

Converting the model from 5-year to annual steps changes more than the
climate coefficients: the annual capital recurrence and within-period
output growth shift the emission flows, so simply taking the matrix fifth
root and dividing the temperature speeds by five leaves the baseline
temperature ~0.2-0.3 degC away from the 5-year trajectory.  Following the
published recalibration approach, the two annual carbon exchange rates
are refit jointly with the two temperature adjustment speeds so that the
annual baseline reproduces the 5-year baseline temperature at every
5-year node.

The 5-year reference implemented here is the oracle for that fit and for
the derived-value tests: it is a direct transcription of the DICE2016R2
difference equations run under the baseline policy (control rate held at
its 2015 value, savings at the long-run rate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import kernel
from .params import (CO2_PER_C, PERIOD_YEARS, RawCalibration, ExogenousPaths,
                     annualize_carbon_cycle, annualize_paths,
                     annualize_temperature, build_five_year_paths,
                     five_year_matrix, flow_matrix)

# Baseline policy used for the recalibration target on both resolutions.
BASELINE_MU = None   # None -> use the file's 2015 control rate


@dataclass
class FiveYearBaseline:
    """Node-resolution baseline trajectory of the published 5-year model."""

    years: np.ndarray
    t_atm: np.ndarray
    t_ocean: np.ndarray
    m_atm: np.ndarray
    capital: np.ndarray
    gross_output: np.ndarray
    industrial_emissions: np.ndarray


def run_five_year_baseline(raw: RawCalibration,
                           mu: float | None = None,
                           savings: float | None = None) -> FiveYearBaseline:
    """Run the 5-year DICE2016R2 difference equations under a fixed policy."""
    paths5 = build_five_year_paths(raw)
    n = paths5.horizon
    if mu is None:
        mu = raw.control_rate_initial
    if savings is None:
        savings = _long_run_savings(raw)
    phi5 = five_year_matrix(raw)
    feedback = raw.f2xco2 / raw.equilibrium_sensitivity
    c1, c3, c4 = (raw.temp_response_atm_5yr, raw.temp_exchange,
                  raw.temp_response_ocean_5yr)

    cap = raw.initial_capital
    m = np.array([raw.m_atm0, raw.m_upper0, raw.m_lower0])
    ta, to = raw.t_atm0, raw.t_ocean0

    out_t = np.empty(n)
    out_to = np.empty(n)
    out_m = np.empty(n)
    out_k = np.empty(n)
    out_y = np.empty(n)
    out_e = np.empty(n)
    for i in range(n):
        out_t[i], out_to[i], out_m[i], out_k[i] = ta, to, m[0], cap
        ygross = paths5.productivity[i] \
            * (paths5.population[i] / 1000.0) ** (1 - raw.capital_share) \
            * cap ** raw.capital_share
        out_y[i] = ygross
        eind = paths5.emissions_intensity[i] * ygross * (1 - mu)
        out_e[i] = eind
        e = eind + paths5.land_emissions[i]
        dam = raw.damage_coeff * ta * ta
        lamb = paths5.backstop_cost_frac[i] * mu ** raw.abatement_exponent
        ynet = ygross * (1 - dam) * (1 - lamb)
        cap = (1 - raw.depreciation) ** PERIOD_YEARS * cap \
            + PERIOD_YEARS * savings * ynet
        m = phi5 @ m
        m[0] += e * PERIOD_YEARS / CO2_PER_C
        fex_next = paths5.exogenous_forcing[min(i + 1, n - 1)]
        forc = raw.f2xco2 * np.log2(m[0] / raw.m_atm_eq) + fex_next
        ta_next = ta + c1 * (forc - feedback * ta - c3 * (ta - to))
        to = to + c4 * (ta - to)
        ta = ta_next
    return FiveYearBaseline(paths5.years.copy(), out_t, out_to, out_m,
                            out_k, out_y, out_e)


def _long_run_savings(raw: RawCalibration) -> float:
    dk, el, rho = raw.depreciation, raw.elasticity_marginal_utility, raw.time_preference
    return (dk + 0.004) / (dk + 0.004 * el + rho) * raw.capital_share


def _annual_baseline_t(raw: RawCalibration, paths: ExogenousPaths,
                       phi: np.ndarray, c1: float, c4: float,
                       mu: float, savings: float) -> np.ndarray:
    n = paths.horizon
    mu_path = np.full(n, mu)
    s_path = np.full(n, savings)
    zeros = np.zeros(n)
    uw = np.ones(n)    # welfare is irrelevant to the temperature path
    res = kernel.forward(
        mu_path, s_path, zeros, zeros,
        paths.population, paths.productivity, paths.emissions_intensity,
        paths.land_emissions, paths.exogenous_forcing, paths.backstop_cost_frac,
        uw, phi,
        raw.initial_capital, raw.m_atm0, raw.m_upper0, raw.m_lower0,
        raw.t_atm0, raw.t_ocean0,
        raw.capital_share, raw.depreciation, raw.damage_coeff,
        raw.abatement_exponent, raw.sg_damage_coeff, raw.sg_damage_exponent,
        raw.elasticity_marginal_utility,
        raw.f2xco2, raw.m_atm_eq, c1, raw.temp_exchange, c4,
        raw.f2xco2 / raw.equilibrium_sensitivity,
        True, 0.0, 0.0)
    return res[5]    # t_atm


def recalibrate_annual_climate(raw: RawCalibration) -> tuple[float, float, float, float]:
    """Fit annual carbon exchange rates and temperature speeds to the baseline.

    Returns (carbon_atm_to_upper, carbon_upper_to_lower, temp_response_atm,
    temp_response_ocean) such that the annual baseline temperature matches
    the 5-year baseline at every node.
    """
    reference = run_five_year_baseline(raw)
    paths = annualize_paths(build_five_year_paths(raw), raw.horizon_years)
    nodes = np.arange(len(reference.years)) * PERIOD_YEARS
    nodes = nodes[nodes < paths.horizon]
    target = reference.t_atm[: len(nodes)]
    mu = raw.control_rate_initial
    savings = _long_run_savings(raw)

    root = annualize_carbon_cycle(five_year_matrix(raw))
    c1_0, c4_0 = annualize_temperature(raw.temp_response_atm_5yr,
                                       raw.temp_response_ocean_5yr)
    x0 = np.array([1.0 - root[0, 0], root[2, 1], c1_0, c4_0])

    def residual(x):
        phi = flow_matrix(x[0], x[1], raw.m_atm_eq, raw.m_upper_eq, raw.m_lower_eq)
        t_annual = _annual_baseline_t(raw, paths, phi, x[2], x[3], mu, savings)
        return t_annual[nodes] - target

    fit = least_squares(residual, x0,
                        bounds=([1e-6, 1e-8, 1e-4, 1e-4], [0.5, 0.1, 0.5, 0.5]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    return float(fit.x[0]), float(fit.x[1]), float(fit.x[2]), float(fit.x[3])


def baseline_node_mismatch(raw: RawCalibration, phi: np.ndarray,
                           c1: float, c4: float) -> np.ndarray:
    """Annual-minus-5-year baseline temperature at each 5-year node."""
    reference = run_five_year_baseline(raw)
    paths = annualize_paths(build_five_year_paths(raw), raw.horizon_years)
    nodes = np.arange(len(reference.years)) * PERIOD_YEARS
    nodes = nodes[nodes < paths.horizon]
    t_annual = _annual_baseline_t(raw, paths, phi, c1, c4,
                                  raw.control_rate_initial, _long_run_savings(raw))
    return t_annual[nodes] - reference.t_atm[: len(nodes)]
