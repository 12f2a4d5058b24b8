"""Calibration data: file loading, validation, and 5-year -> 1-year conversion.

The model is calibrated from the published DICE2016R2 listing, shipped as a
YAML file (``data/dice2016r2.yaml``).  The file holds the 5-year primitives
(initial stocks, growth rates, the 5-year carbon matrix and temperature
coefficients) plus a derived ``annual_climate`` block produced by the
baseline recalibration in :mod:`tridice.calibration`.

Time-varying series are built with the DICE recurrences at 5-year
resolution and then interpolated to annual resolution: growth-defined
series (population, productivity, emissions intensity, backstop cost)
geometrically, additive series (land-use emissions, exogenous forcing)
linearly.  Node values are preserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import NamedTuple

import numpy as np
import yaml
from scipy.linalg import fractional_matrix_power
from scipy.optimize import least_squares

from .errors import CalibrationError, ParamFileError, ValidationError

SCHEMA_VERSION = 1
PERIOD_YEARS = 5          # resolution of the published calibration
N_PERIODS = 100           # DICE2016R2 horizon: 100 five-year periods
CO2_PER_C = 3.666         # GtCO2 per GtC, DICE convention

# Largest acceptable max-elementwise residual of phi^5 vs the 5-year matrix
# when the principal fifth root is invalid and a constrained fit is used.
# A nonnegative annual matrix cannot reproduce the exact zero corners of the
# 5-year matrix, so the refit path cannot reach the 1e-6 root tolerance;
# anything beyond 1e-3 indicates a genuinely non-embeddable input.
ROOT_TOL = 1e-6
REFIT_TOL = 1e-3


@dataclass(frozen=True)
class ExogenousPaths:
    """Exogenous time series, one entry per step (5-year or annual).

    Attributes
    ----------
    years : ndarray
        Calendar year of each step (2015, ...).
    population : ndarray
        World population, millions.
    productivity : ndarray
        Total factor productivity (output scale).
    emissions_intensity : ndarray
        Industrial CO2 per unit gross output, GtCO2 per trillion USD.
    land_emissions : ndarray
        Land-use emissions, GtCO2/yr.
    exogenous_forcing : ndarray
        Non-CO2 forcing, W/m2.
    backstop_cost_frac : ndarray
        Abatement cost as a fraction of gross output at full abatement.
    """

    years: np.ndarray
    population: np.ndarray
    productivity: np.ndarray
    emissions_intensity: np.ndarray
    land_emissions: np.ndarray
    exogenous_forcing: np.ndarray
    backstop_cost_frac: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.years)

    @property
    def step_years(self) -> int:
        return int(self.years[1] - self.years[0])

    def validate(self, min_span_years: int | None = None) -> None:
        series = {
            "population": self.population,
            "productivity": self.productivity,
            "emissions_intensity": self.emissions_intensity,
            "land_emissions": self.land_emissions,
            "exogenous_forcing": self.exogenous_forcing,
            "backstop_cost_frac": self.backstop_cost_frac,
        }
        n = len(self.years)
        for name, arr in series.items():
            if len(arr) != n:
                raise ValidationError(
                    f"{name}: length {len(arr)} != horizon {n}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name}: non-finite values")
        for name in ("population", "productivity"):
            if not np.all(series[name] > 0):
                raise ValidationError(f"{name}: must be strictly positive")
        for name in ("emissions_intensity", "backstop_cost_frac"):
            if not np.all(np.diff(series[name]) < 0):
                raise ValidationError(f"{name}: must be strictly decreasing")
            if not np.all(series[name] > 0):
                raise ValidationError(f"{name}: must be strictly positive")
        if min_span_years is not None:
            span = int(self.years[-1] - self.years[0]) + self.step_years
            if span < min_span_years:
                raise ValidationError(
                    f"years: span {span} < required {min_span_years}")


@dataclass(frozen=True)
class ClimateParams:
    """Carbon cycle and two-box temperature parameters at annual resolution."""

    f2xco2: float                 # W/m2 forcing from CO2 doubling
    m_preindustrial: float        # GtC in the 1750 atmosphere
    carbon_transfer: np.ndarray   # 3x3 column-stochastic annual matrix
    temp_response_atm: float      # atmospheric adjustment speed (c1), 1/yr
    temp_exchange: float          # atm-ocean coupling within c1 bracket (c3)
    temp_response_ocean: float    # ocean adjustment speed (c4), 1/yr
    equilibrium_sensitivity: float  # degC per CO2 doubling
    m_atm0: float                 # initial reservoirs, GtC
    m_upper0: float
    m_lower0: float
    t_atm0: float                 # initial temperatures, degC above 1900
    t_ocean0: float

    @property
    def forcing_to_temp(self) -> float:
        """Feedback coefficient: equilibrium T = F / forcing_to_temp."""
        return self.f2xco2 / self.equilibrium_sensitivity

    def validate(self) -> None:
        if self.f2xco2 <= 0:
            raise ValidationError("f2xco2: must be positive")
        if self.m_preindustrial <= 0:
            raise ValidationError("m_preindustrial: must be positive")
        m = np.asarray(self.carbon_transfer)
        if m.shape != (3, 3):
            raise ValidationError("carbon_transfer: must be 3x3")
        if np.any(m < 0) or np.any(m > 1):
            raise ValidationError("carbon_transfer: entries must lie in [0, 1]")
        colsums = m.sum(axis=0)
        if np.any(np.abs(colsums - 1.0) > 1e-12):
            raise ValidationError(
                f"carbon_transfer: column sums {colsums} must equal 1")
        for name in ("m_atm0", "m_upper0", "m_lower0"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name}: must be positive")
        if self.equilibrium_sensitivity <= 0:
            raise ValidationError("equilibrium_sensitivity: must be positive")


@dataclass(frozen=True)
class EconParams:
    """Preferences, production, damages, and policy-cost parameters."""

    capital_share: float            # Cobb-Douglas capital exponent
    depreciation: float             # 1/yr
    damage_coeff: float             # fraction of gross output per degC^2
    abatement_exponent: float       # cost-curve convexity
    sg_damage_coeff: float          # fraction of gross output at F_SRM = f2xco2
    sg_damage_exponent: float       # 2 by default, 1 in the linear variant
    elasticity_marginal_utility: float
    time_preference: float          # 1/yr
    initial_capital: float          # trillions 2010 USD
    initial_control_rate: float     # emissions control in the base year

    @property
    def long_run_savings(self) -> float:
        """Steady-state savings rate used to pin the end of the horizon."""
        dk, el, rho = self.depreciation, self.elasticity_marginal_utility, self.time_preference
        return (dk + 0.004) / (dk + 0.004 * el + rho) * self.capital_share

    def validate(self) -> None:
        if self.damage_coeff <= 0:
            raise ValidationError("damage_coeff: must be positive")
        if not 0 < self.depreciation < 1:
            raise ValidationError("depreciation: must lie in (0, 1)")
        if not 0 < self.capital_share < 1:
            raise ValidationError("capital_share: must lie in (0, 1)")
        if self.abatement_exponent <= 1:
            raise ValidationError("abatement_exponent: must exceed 1")
        if self.sg_damage_coeff < 0:
            raise ValidationError("sg_damage_coeff: must be nonnegative")
        if self.sg_damage_exponent not in (1.0, 2.0):
            raise ValidationError("sg_damage_exponent: must be 1 or 2")
        if self.time_preference < 0:
            raise ValidationError("time_preference: must be nonnegative")
        if self.initial_capital <= 0:
            raise ValidationError("initial_capital: must be positive")


class ParameterSet(NamedTuple):
    """Full calibration at annual resolution, immutable after load."""

    paths: ExogenousPaths
    climate: ClimateParams
    econ: EconParams


@dataclass(frozen=True)
class RawCalibration:
    """The 5-year primitives exactly as read from a parameter file."""

    horizon_years: int
    start_year: int
    elasticity_marginal_utility: float
    time_preference: float
    capital_share: float
    depreciation: float
    initial_capital: float
    initial_gross_output: float
    pop_initial: float
    pop_growth_calibration: float
    pop_asymptote: float
    tfp_initial: float
    tfp_growth_per_period: float
    tfp_growth_decline_per_period: float
    e_industrial_initial: float
    control_rate_initial: float
    intensity_growth_per_year: float
    intensity_growth_decline_per_period: float
    land_emissions_initial: float
    land_decline_per_period: float
    abatement_exponent: float
    backstop_price_initial: float
    backstop_decline_per_period: float
    damage_coeff: float
    sg_damage_coeff: float
    sg_damage_exponent: float
    m_atm0: float
    m_upper0: float
    m_lower0: float
    m_atm_eq: float
    m_upper_eq: float
    m_lower_eq: float
    carbon_atm_to_upper_5yr: float
    carbon_upper_to_lower_5yr: float
    transfer_matrix_5yr: np.ndarray | None
    f2xco2: float
    equilibrium_sensitivity: float
    temp_response_atm_5yr: float
    temp_exchange: float
    temp_response_ocean_5yr: float
    t_atm0: float
    t_ocean0: float
    forcing_nonco2_initial: float
    forcing_nonco2_final: float
    forcing_ramp_periods: int
    annual_climate: dict | None   # derived block, may be absent

    @property
    def sigma_initial(self) -> float:
        """2015 emissions intensity implied by output, emissions and control."""
        return self.e_industrial_initial / (
            self.initial_gross_output * (1.0 - self.control_rate_initial))


# --------------------------------------------------------------------------
# 5-year series construction (DICE recurrences)
# --------------------------------------------------------------------------

def flow_matrix(atm_to_upper: float, upper_to_lower: float,
                m_atm_eq: float, m_upper_eq: float, m_lower_eq: float) -> np.ndarray:
    """Column-stochastic reservoir matrix from the two DICE exchange rates.

    Return flows are set by the equilibrium reservoir ratios so that the
    equilibrium distribution is a fixed point of the matrix.
    """
    b12 = atm_to_upper
    b23 = upper_to_lower
    b21 = b12 * m_atm_eq / m_upper_eq
    b32 = b23 * m_upper_eq / m_lower_eq
    return np.array([
        [1.0 - b12, b21, 0.0],
        [b12, 1.0 - b21 - b23, b32],
        [0.0, b23, 1.0 - b32],
    ])


def build_five_year_paths(raw: RawCalibration) -> ExogenousPaths:
    """Evaluate the DICE2016R2 recurrences over the 100-period grid."""
    n = N_PERIODS
    t = np.arange(n)
    years = raw.start_year + PERIOD_YEARS * t

    pop = np.empty(n)
    pop[0] = raw.pop_initial
    for i in range(1, n):
        pop[i] = pop[i - 1] * (raw.pop_asymptote / pop[i - 1]) ** raw.pop_growth_calibration

    growth = raw.tfp_growth_per_period * np.exp(
        -raw.tfp_growth_decline_per_period * PERIOD_YEARS * t)
    tfp = np.empty(n)
    tfp[0] = raw.tfp_initial
    for i in range(1, n):
        tfp[i] = tfp[i - 1] / (1.0 - growth[i - 1])

    gsig = raw.intensity_growth_per_year * (
        1.0 + raw.intensity_growth_decline_per_period) ** (PERIOD_YEARS * t)
    sigma = np.empty(n)
    sigma[0] = raw.sigma_initial
    for i in range(1, n):
        sigma[i] = sigma[i - 1] * math.exp(gsig[i - 1] * PERIOD_YEARS)

    land = raw.land_emissions_initial * (1.0 - raw.land_decline_per_period) ** t

    fex = np.full(n, raw.forcing_nonco2_initial)
    ramp = raw.forcing_ramp_periods
    delta = raw.forcing_nonco2_final - raw.forcing_nonco2_initial
    fex[: ramp + 1] += delta * t[: ramp + 1] / ramp
    fex[ramp + 1:] += delta

    backstop_price = raw.backstop_price_initial * (
        1.0 - raw.backstop_decline_per_period) ** t
    theta1 = backstop_price * sigma / raw.abatement_exponent / 1000.0

    return ExogenousPaths(years, pop, tfp, sigma, land, fex, theta1)


# --------------------------------------------------------------------------
# 5-year -> 1-year conversion
# --------------------------------------------------------------------------

def _interp_geometric(values: np.ndarray, n_years: int) -> np.ndarray:
    out = np.empty(n_years)
    last = len(values) - 1
    for t in range(n_years):
        i, r = divmod(t, PERIOD_YEARS)
        if i >= last:
            ratio = (values[last] / values[last - 1]) ** (1.0 / PERIOD_YEARS)
            out[t] = values[last] * ratio ** (t - PERIOD_YEARS * last)
        elif r == 0:
            out[t] = values[i]
        else:
            out[t] = values[i] * (values[i + 1] / values[i]) ** (r / PERIOD_YEARS)
    return out


def _interp_linear(values: np.ndarray, n_years: int) -> np.ndarray:
    out = np.empty(n_years)
    last = len(values) - 1
    for t in range(n_years):
        i, r = divmod(t, PERIOD_YEARS)
        if i >= last:
            slope = (values[last] - values[last - 1]) / PERIOD_YEARS
            out[t] = values[last] + slope * (t - PERIOD_YEARS * last)
        elif r == 0:
            out[t] = values[i]
        else:
            out[t] = values[i] + (values[i + 1] - values[i]) * r / PERIOD_YEARS
    return out


def annualize_paths(paths5: ExogenousPaths, horizon_years: int | None = None) -> ExogenousPaths:
    """Interpolate a 5-year path set to annual resolution.

    Growth-defined series (population, productivity, emissions intensity,
    backstop cost) are interpolated geometrically, additive series
    (land-use emissions, exogenous forcing) linearly.  Values at 5-year
    nodes are reproduced exactly; years beyond the last node are
    extrapolated with the final inter-node rate.
    """
    if paths5.step_years != PERIOD_YEARS:
        raise ValidationError(
            f"years: expected {PERIOD_YEARS}-year spacing, got {paths5.step_years}")
    paths5.validate()
    if horizon_years is None:
        horizon_years = PERIOD_YEARS * paths5.horizon
    years = paths5.years[0] + np.arange(horizon_years)
    annual = ExogenousPaths(
        years=years,
        population=_interp_geometric(paths5.population, horizon_years),
        productivity=_interp_geometric(paths5.productivity, horizon_years),
        emissions_intensity=_interp_geometric(paths5.emissions_intensity, horizon_years),
        land_emissions=_interp_linear(paths5.land_emissions, horizon_years),
        exogenous_forcing=_interp_linear(paths5.exogenous_forcing, horizon_years),
        backstop_cost_frac=_interp_geometric(paths5.backstop_cost_frac, horizon_years),
    )
    annual.validate(min_span_years=400)
    return annual


def annualize_carbon_cycle(phi5: np.ndarray) -> np.ndarray:
    """Annual reservoir matrix whose fifth power reproduces the 5-year matrix.

    Uses the principal matrix fifth root when it is a valid stochastic
    matrix (max elementwise error of phi^5 below 1e-6).  When the root has
    negative entries -- as it does for the DICE2016R2 matrix, whose exact
    zero corners are unreachable by any nonnegative annual matrix -- falls
    back to a bound-constrained least-squares fit over column-stochastic
    matrices and accepts a residual up to 1e-3.
    """
    phi5 = np.asarray(phi5, dtype=float)
    if phi5.shape != (3, 3):
        raise ValidationError("carbon_transfer: must be 3x3")
    if np.any(phi5 < 0):
        raise ValidationError("carbon_transfer: entries must be nonnegative")
    if np.any(np.abs(phi5.sum(axis=0) - 1.0) > 1e-9):
        raise ValidationError("carbon_transfer: column sums must equal 1")

    root = fractional_matrix_power(phi5, 1.0 / PERIOD_YEARS)
    if np.iscomplexobj(root):
        if np.abs(root.imag).max() > 1e-12:
            root = np.full((3, 3), np.nan)
        else:
            root = root.real
    if np.all(np.isfinite(root)) and root.min() >= 0.0:
        out = root / root.sum(axis=0, keepdims=True)
        err = np.abs(np.linalg.matrix_power(out, PERIOD_YEARS) - phi5).max()
        if err < ROOT_TOL:
            return out
        start = out
    else:
        start = np.clip(np.where(np.isfinite(root), root, 0.0), 0.0, 1.0)
        start /= np.maximum(start.sum(axis=0, keepdims=True), 1e-12)

    out = _fit_stochastic_root(phi5, start)
    err = np.abs(np.linalg.matrix_power(out, PERIOD_YEARS) - phi5).max()
    if err > REFIT_TOL:
        raise CalibrationError(
            f"no valid annual carbon matrix within tolerance: "
            f"achieved max residual {err:.3e} > {REFIT_TOL:.0e}",
            residual=err)
    return out


_OFFDIAG = ((1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2))


def _fit_stochastic_root(phi5: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Least-squares column-stochastic fifth root, off-diagonals free."""

    def unpack(x):
        m = np.zeros((3, 3))
        for k, (i, j) in enumerate(_OFFDIAG):
            m[i, j] = x[k]
        for j in range(3):
            m[j, j] = 1.0 - (m[:, j].sum() - m[j, j])
        return m

    def resid(x):
        return (np.linalg.matrix_power(unpack(x), PERIOD_YEARS) - phi5).ravel()

    x0 = np.clip([start[i, j] for i, j in _OFFDIAG], 0.0, 1.0)
    fit = least_squares(resid, x0, bounds=(0.0, 1.0),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    out = unpack(fit.x)
    # exact unit column sums (diagonals absorb any residual)
    for j in range(3):
        out[j, j] = 1.0 - (out[:, j].sum() - out[j, j])
    return out


def annualize_temperature(c1_5yr: float, c4_5yr: float) -> tuple[float, float]:
    """First-guess annual adjustment speeds: the 5-year speeds divided by 5."""
    return c1_5yr / PERIOD_YEARS, c4_5yr / PERIOD_YEARS


# --------------------------------------------------------------------------
# File loading
# --------------------------------------------------------------------------

def default_params_path():
    """Path to the bundled DICE2016R2 calibration file."""
    return resources.files("tridice.data") / "dice2016r2.yaml"


def _require(mapping: dict, dotted: str):
    node = mapping
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ParamFileError(f"missing required key: {dotted}")
        node = node[part]
    return node


def _number(mapping: dict, dotted: str) -> float:
    value = _require(mapping, dotted)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParamFileError(f"{dotted}: expected a number, got {value!r}")
    return float(value)


def load_raw(path=None) -> RawCalibration:
    """Parse a calibration file into its raw 5-year primitives."""
    if path is None:
        path = default_params_path()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParamFileError(f"cannot read parameter file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParamFileError(f"parameter file is not valid YAML{where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParamFileError("parameter file must be a YAML mapping")

    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise ParamFileError(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    matrix = None
    if isinstance(doc.get("carbon_cycle_5yr"), dict) and \
            "transfer_matrix" in doc["carbon_cycle_5yr"]:
        rows = doc["carbon_cycle_5yr"]["transfer_matrix"]
        try:
            matrix = np.array(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParamFileError(
                f"carbon_cycle_5yr.transfer_matrix: not a numeric matrix: {exc}"
            ) from exc
        if matrix.shape != (3, 3):
            raise ParamFileError(
                "carbon_cycle_5yr.transfer_matrix: must be 3x3")

    annual = doc.get("annual_climate")
    if annual is not None and not isinstance(annual, dict):
        raise ParamFileError("annual_climate: must be a mapping")

    return RawCalibration(
        horizon_years=int(_number(doc, "horizon_years")),
        start_year=int(_number(doc, "start_year")),
        elasticity_marginal_utility=_number(doc, "preferences.elasticity_marginal_utility"),
        time_preference=_number(doc, "preferences.time_preference"),
        capital_share=_number(doc, "economy.capital_share"),
        depreciation=_number(doc, "economy.depreciation"),
        initial_capital=_number(doc, "economy.initial_capital"),
        initial_gross_output=_number(doc, "economy.initial_gross_output"),
        pop_initial=_number(doc, "population.initial"),
        pop_growth_calibration=_number(doc, "population.growth_calibration"),
        pop_asymptote=_number(doc, "population.asymptote"),
        tfp_initial=_number(doc, "productivity.initial"),
        tfp_growth_per_period=_number(doc, "productivity.growth_per_period"),
        tfp_growth_decline_per_period=_number(doc, "productivity.growth_decline_per_period"),
        e_industrial_initial=_number(doc, "emissions.initial_industrial"),
        control_rate_initial=_number(doc, "emissions.initial_control_rate"),
        intensity_growth_per_year=_number(doc, "emissions.intensity_growth_per_year"),
        intensity_growth_decline_per_period=_number(doc, "emissions.intensity_growth_decline_per_period"),
        land_emissions_initial=_number(doc, "emissions.initial_land_use"),
        land_decline_per_period=_number(doc, "emissions.land_use_decline_per_period"),
        abatement_exponent=_number(doc, "abatement.exponent"),
        backstop_price_initial=_number(doc, "abatement.backstop_price"),
        backstop_decline_per_period=_number(doc, "abatement.backstop_decline_per_period"),
        damage_coeff=_number(doc, "damages.temperature_quadratic"),
        sg_damage_coeff=_number(doc, "solar_geo.damage_coeff"),
        sg_damage_exponent=_number(doc, "solar_geo.damage_exponent"),
        m_atm0=_number(doc, "carbon_cycle_5yr.initial.atmosphere"),
        m_upper0=_number(doc, "carbon_cycle_5yr.initial.upper_ocean"),
        m_lower0=_number(doc, "carbon_cycle_5yr.initial.lower_ocean"),
        m_atm_eq=_number(doc, "carbon_cycle_5yr.equilibrium.atmosphere"),
        m_upper_eq=_number(doc, "carbon_cycle_5yr.equilibrium.upper_ocean"),
        m_lower_eq=_number(doc, "carbon_cycle_5yr.equilibrium.lower_ocean"),
        carbon_atm_to_upper_5yr=_number(doc, "carbon_cycle_5yr.atm_to_upper"),
        carbon_upper_to_lower_5yr=_number(doc, "carbon_cycle_5yr.upper_to_lower"),
        transfer_matrix_5yr=matrix,
        f2xco2=_number(doc, "temperature_5yr.forcing_co2_doubling"),
        equilibrium_sensitivity=_number(doc, "temperature_5yr.equilibrium_sensitivity"),
        temp_response_atm_5yr=_number(doc, "temperature_5yr.response_atm"),
        temp_exchange=_number(doc, "temperature_5yr.exchange_coeff"),
        temp_response_ocean_5yr=_number(doc, "temperature_5yr.response_ocean"),
        t_atm0=_number(doc, "temperature_5yr.initial.atmosphere"),
        t_ocean0=_number(doc, "temperature_5yr.initial.ocean"),
        forcing_nonco2_initial=_number(doc, "exogenous_forcing.initial"),
        forcing_nonco2_final=_number(doc, "exogenous_forcing.final"),
        forcing_ramp_periods=int(_number(doc, "exogenous_forcing.ramp_periods")),
        annual_climate=annual,
    )


def five_year_matrix(raw: RawCalibration) -> np.ndarray:
    """The 5-year carbon matrix: explicit override or flow-rate construction."""
    if raw.transfer_matrix_5yr is not None:
        return np.asarray(raw.transfer_matrix_5yr, dtype=float)
    return flow_matrix(raw.carbon_atm_to_upper_5yr, raw.carbon_upper_to_lower_5yr,
                       raw.m_atm_eq, raw.m_upper_eq, raw.m_lower_eq)


def build_parameter_set(raw: RawCalibration) -> ParameterSet:
    """Assemble the annual-resolution parameter bundle from raw primitives.

    Uses the file's ``annual_climate`` block when present; otherwise runs
    the baseline-matching recalibration (slower, see tridice.calibration).
    """
    paths5 = build_five_year_paths(raw)
    paths = annualize_paths(paths5, raw.horizon_years)

    if raw.annual_climate is not None:
        block = raw.annual_climate
        for key in ("carbon_atm_to_upper", "carbon_upper_to_lower",
                    "temp_response_atm", "temp_response_ocean"):
            if key not in block:
                raise ParamFileError(f"annual_climate.{key}: missing")
        phi = flow_matrix(float(block["carbon_atm_to_upper"]),
                          float(block["carbon_upper_to_lower"]),
                          raw.m_atm_eq, raw.m_upper_eq, raw.m_lower_eq)
        c1 = float(block["temp_response_atm"])
        c4 = float(block["temp_response_ocean"])
    else:
        from .calibration import recalibrate_annual_climate
        x12, x23, c1, c4 = recalibrate_annual_climate(raw)
        phi = flow_matrix(x12, x23, raw.m_atm_eq, raw.m_upper_eq, raw.m_lower_eq)

    climate = ClimateParams(
        f2xco2=raw.f2xco2,
        m_preindustrial=raw.m_atm_eq,
        carbon_transfer=phi,
        temp_response_atm=c1,
        temp_exchange=raw.temp_exchange,
        temp_response_ocean=c4,
        equilibrium_sensitivity=raw.equilibrium_sensitivity,
        m_atm0=raw.m_atm0,
        m_upper0=raw.m_upper0,
        m_lower0=raw.m_lower0,
        t_atm0=raw.t_atm0,
        t_ocean0=raw.t_ocean0,
    )
    econ = EconParams(
        capital_share=raw.capital_share,
        depreciation=raw.depreciation,
        damage_coeff=raw.damage_coeff,
        abatement_exponent=raw.abatement_exponent,
        sg_damage_coeff=raw.sg_damage_coeff,
        sg_damage_exponent=raw.sg_damage_exponent,
        elasticity_marginal_utility=raw.elasticity_marginal_utility,
        time_preference=raw.time_preference,
        initial_capital=raw.initial_capital,
        initial_control_rate=raw.control_rate_initial,
    )
    paths.validate(min_span_years=400)
    climate.validate()
    econ.validate()
    return ParameterSet(paths, climate, econ)


def load_params(path=None) -> ParameterSet:
    """Load, validate, and annualize a calibration file.

    With no argument, loads the bundled DICE2016R2 file.
    """
    return build_parameter_set(load_raw(path))


def with_overrides(econ: EconParams, overrides: dict | None) -> EconParams:
    """Apply scenario parameter overrides (absolute values) to EconParams."""
    if not overrides:
        return econ
    valid = set(EconParams.__dataclass_fields__)
    for key in overrides:
        if key not in valid:
            raise ValidationError(f"override: unknown parameter {key!r}")
    out = replace(econ, **{k: float(v) for k, v in overrides.items()})
    out.validate()
    return out
