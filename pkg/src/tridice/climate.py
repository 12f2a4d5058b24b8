"""Carbon cycle, radiative forcing, and two-box temperature dynamics.

One function per annual update.  All functions are pure; the simulator
owns the state.  Emissions are carried in GtCO2 everywhere in the economy
and converted to GtC (dividing by 3.666) only at the carbon-cycle
boundary here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import CO2_PER_C, ClimateParams


@dataclass(frozen=True)
class ClimateState:
    """Carbon reservoirs (GtC) and temperatures (degC above 1900)."""

    m_atm: float
    m_upper: float
    m_lower: float
    t_atm: float
    t_ocean: float

    def validate(self) -> None:
        for name in ("m_atm", "m_upper", "m_lower"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name}: reservoir must be positive")
        if not (math.isfinite(self.t_atm) and math.isfinite(self.t_ocean)):
            raise ValidationError("t_atm/t_ocean: must be finite")

    @property
    def total_carbon(self) -> float:
        return self.m_atm + self.m_upper + self.m_lower

    @classmethod
    def initial(cls, params: ClimateParams) -> "ClimateState":
        return cls(params.m_atm0, params.m_upper0, params.m_lower0,
                   params.t_atm0, params.t_ocean0)


def carbon_step(state: ClimateState, emissions: float,
                params: ClimateParams) -> ClimateState:
    """Advance the three reservoirs by one year.

    Reservoirs are mixed by the annual transfer matrix, then one year of
    `emissions` (GtCO2/yr, negative for net removal) is injected into the
    atmospheric box.  Total carbon changes by exactly the injected amount.

    Raises
    ------
    ValidationError
        If the injection would leave the atmosphere non-positive
        (unphysically large removal at this state).
    """
    if not math.isfinite(emissions):
        raise ValidationError("emissions: must be finite")
    phi = params.carbon_transfer
    m = np.array([state.m_atm, state.m_upper, state.m_lower])
    mixed = phi @ m
    m_atm = mixed[0] + emissions / CO2_PER_C
    if m_atm <= 0:
        raise ValidationError(
            f"m_atm: removal of {-emissions:.1f} GtCO2 exhausts the "
            f"atmospheric reservoir ({mixed[0]:.1f} GtC before injection)")
    return ClimateState(m_atm, mixed[1], mixed[2], state.t_atm, state.t_ocean)


def forcing(m_atm: float, f_ex: float, f_srm: float,
            params: ClimateParams) -> float:
    """Total radiative forcing, W/m2.

    CO2 forcing is logarithmic in the atmospheric stock relative to 1750;
    solar geoengineering enters as a direct negative forcing term.
    """
    if m_atm <= 0:
        raise ValidationError("m_atm: must be positive")
    if f_srm < 0:
        raise ValidationError("f_srm: must be nonnegative")
    return params.f2xco2 * math.log2(m_atm / params.m_preindustrial) \
        + f_ex - f_srm


def temperature_step(state: ClimateState, forc: float,
                     params: ClimateParams) -> ClimateState:
    """Advance the two temperature boxes by one year under forcing `forc`.

    The atmosphere relaxes toward the forcing-implied equilibrium while
    exchanging heat with the ocean box; (0, 0) is a fixed point at zero
    forcing.
    """
    t_atm = state.t_atm + params.temp_response_atm * (
        forc - params.forcing_to_temp * state.t_atm
        - params.temp_exchange * (state.t_atm - state.t_ocean))
    t_ocean = state.t_ocean + params.temp_response_ocean * (
        state.t_atm - state.t_ocean)
    return ClimateState(state.m_atm, state.m_upper, state.m_lower,
                        t_atm, t_ocean)
