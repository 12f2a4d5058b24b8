"""Jit-compiled forward simulation and adjoint gradient.

The coupled climate-economy recurrence is inherently sequential, so both
passes are scalar loops compiled with numba.  The forward pass records
every intermediate needed by the reverse pass; the reverse pass walks the
dependency chain backwards and accumulates exact gradients of the welfare
objective with respect to all three control paths and to an additive
emissions pulse (used for the social cost of carbon).

Two smooth guards keep the objective differentiable for the optimizer on
pathological control paths:

* per-capita consumption below ``CPC_FLOOR`` is mapped through an
  exponential floor, so CRRA utility stays finite with a strong gradient
  pushing back (the infeasibility signal for non-positive consumption);
* atmospheric carbon below ``MAT_FLOOR`` is floored the same way before
  the logarithmic forcing term (unphysically large removal);
* the capital stock below ``CAP_FLOOR`` is floored before the
  Cobb-Douglas exponent (negative net output can imply disinvestment).

Both floors are far outside the region visited by any reported optimum;
reported solutions are checked against them.
"""

import numpy as np
from numba import njit

CPC_FLOOR = 0.5    # thousand USD per person-year
MAT_FLOOR = 10.0   # GtC
CAP_FLOOR = 1.0    # trillion USD
_EXP_CLAMP = -40.0

LN2 = np.log(2.0)


@njit(cache=True)
def _smooth_floor(x, floor):
    """C1 positive floor: identity above `floor`, exponential decay below."""
    if x >= floor:
        return x, 1.0
    z = x / floor - 1.0
    if z < _EXP_CLAMP:
        z = _EXP_CLAMP
    s = np.exp(z)
    return floor * s, s


@njit(cache=True)
def forward(mu, s, f, pulse,
            pop, tfp, sigma, eland, fex, theta1, uw,
            phi,
            k0, m_at0, m_up0, m_lo0, t_atm0, t_ocean0,
            capital_share, depreciation, damage_coeff, abat_exp,
            sg_coeff, sg_exp, elasmu,
            f2x, m1750, c1, c3, c4, feedback,
            apply_damages, t_cap, penalty):
    """Simulate the annual recurrence; returns welfare and all per-year arrays.

    `uw` is the utility weight per year (population times discount factor,
    possibly carrying a terminal continuation weight in its last entry).
    `feedback` is f2x / equilibrium_sensitivity.  `dclim` holds the damage
    function value; it reduces output only when `apply_damages` is true.
    """
    n = mu.shape[0]
    p11, p12, p13 = phi[0, 0], phi[0, 1], phi[0, 2]
    p21, p22, p23 = phi[1, 0], phi[1, 1], phi[1, 2]
    p31, p32, p33 = phi[2, 0], phi[2, 1], phi[2, 2]

    cap = np.empty(n)
    kslope = np.empty(n)
    m_at = np.empty(n)
    m_up = np.empty(n)
    m_lo = np.empty(n)
    t_atm = np.empty(n)
    t_ocean = np.empty(n)
    forc = np.empty(n)
    ygross = np.empty(n)
    eind = np.empty(n)
    e_tot = np.empty(n)
    ynet = np.empty(n)
    cons = np.empty(n)
    cpc = np.empty(n)
    ceff = np.empty(n)
    cslope = np.empty(n)
    maeff = np.empty(n)
    maslope = np.empty(n)
    dclim = np.empty(n)
    dsg = np.empty(n)
    lamb = np.empty(n)

    cap[0] = k0
    kslope[0] = 1.0
    m_at[0], m_up[0], m_lo[0] = m_at0, m_up0, m_lo0
    t_atm[0], t_ocean[0] = t_atm0, t_ocean0
    maeff[0], maslope[0] = _smooth_floor(m_at0, MAT_FLOOR)
    forc[0] = f2x * np.log(maeff[0] / m1750) / LN2 + fex[0] - f[0]

    w = 0.0
    co2_to_c = 3.666
    for t in range(n):
        yg = tfp[t] * (pop[t] / 1000.0) ** (1.0 - capital_share) \
            * cap[t] ** capital_share
        ygross[t] = yg
        ei = sigma[t] * yg * (1.0 - mu[t])
        eind[t] = ei
        e_tot[t] = ei + eland[t] + pulse[t]

        dclim[t] = damage_coeff * t_atm[t] * t_atm[t]
        dsg[t] = sg_coeff * (f[t] / f2x) ** sg_exp
        lamb[t] = theta1[t] * mu[t] ** abat_exp
        dc = dclim[t] if apply_damages else 0.0
        yn = yg * (1.0 - dc - dsg[t]) * (1.0 - lamb[t])
        ynet[t] = yn
        cons[t] = (1.0 - s[t]) * yn
        cp = 1000.0 * cons[t] / pop[t]
        cpc[t] = cp
        ceff[t], cslope[t] = _smooth_floor(cp, CPC_FLOOR)
        u = (ceff[t] ** (1.0 - elasmu) - 1.0) / (1.0 - elasmu) - 1.0
        w += uw[t] * u
        if penalty > 0.0 and t_atm[t] > t_cap:
            viol = t_atm[t] - t_cap
            w -= penalty * viol * viol

        if t < n - 1:
            cap[t + 1], kslope[t + 1] = _smooth_floor(
                (1.0 - depreciation) * cap[t] + s[t] * yn, CAP_FLOOR)
            a, b, c_ = m_at[t], m_up[t], m_lo[t]
            m_at[t + 1] = p11 * a + p12 * b + p13 * c_ + e_tot[t] / co2_to_c
            m_up[t + 1] = p21 * a + p22 * b + p23 * c_
            m_lo[t + 1] = p31 * a + p32 * b + p33 * c_
            maeff[t + 1], maslope[t + 1] = _smooth_floor(m_at[t + 1], MAT_FLOOR)
            fc = f2x * np.log(maeff[t + 1] / m1750) / LN2 + fex[t + 1] - f[t + 1]
            forc[t + 1] = fc
            t_atm[t + 1] = t_atm[t] + c1 * (
                fc - feedback * t_atm[t] - c3 * (t_atm[t] - t_ocean[t]))
            t_ocean[t + 1] = t_ocean[t] + c4 * (t_atm[t] - t_ocean[t])

    return (w, cap, m_at, m_up, m_lo, t_atm, t_ocean, forc, ygross, eind,
            e_tot, ynet, cons, cpc, ceff, cslope, maeff, maslope,
            dclim, dsg, lamb, kslope)


@njit(cache=True)
def backward(mu, s, f,
             pop, tfp, sigma, eland, fex, theta1, uw,
             phi,
             capital_share, depreciation, damage_coeff, abat_exp,
             sg_coeff, sg_exp, elasmu,
             f2x, m1750, c1, c3, c4, feedback,
             apply_damages, t_cap, penalty,
             cap, t_atm, t_ocean, ygross, ynet, ceff, cslope,
             maeff, maslope, dclim, dsg, lamb, kslope):
    """Reverse pass over :func:`forward`; exact gradients of the objective.

    Returns (gmu, gs, gf, ge) where ge[t] is the derivative with respect
    to an additive GtCO2 emission at year t (the emissions shadow value).
    """
    n = mu.shape[0]
    p11, p12, p13 = phi[0, 0], phi[0, 1], phi[0, 2]
    p21, p22, p23 = phi[1, 0], phi[1, 1], phi[1, 2]
    p31, p32, p33 = phi[2, 0], phi[2, 1], phi[2, 2]
    co2_to_c = 3.666

    gmu = np.zeros(n)
    gs = np.zeros(n)
    gf = np.zeros(n)
    ge = np.zeros(n)

    a_cap = 0.0
    a_mat = 0.0
    a_mup = 0.0
    a_mlo = 0.0
    a_ta = 0.0
    a_to = 0.0

    for t in range(n - 1, -1, -1):
        if t < n - 1:
            # reverse the state step t -> t+1
            a_ta_t = a_ta * (1.0 - c1 * feedback - c1 * c3) + a_to * c4
            a_to_t = a_ta * c1 * c3 + a_to * (1.0 - c4)
            a_forc = c1 * a_ta
            gf[t + 1] -= a_forc
            a_mat_adj = a_mat + a_forc * f2x / (LN2 * maeff[t + 1]) * maslope[t + 1]
            a_mat_t = p11 * a_mat_adj + p21 * a_mup + p31 * a_mlo
            a_mup_t = p12 * a_mat_adj + p22 * a_mup + p32 * a_mlo
            a_mlo_t = p13 * a_mat_adj + p23 * a_mup + p33 * a_mlo
            a_e = a_mat_adj / co2_to_c
            ge[t] = a_e
            a_cap_raw = a_cap * kslope[t + 1]
            a_cap_t = (1.0 - depreciation) * a_cap_raw
            a_ynet = s[t] * a_cap_raw
            gs[t] += ynet[t] * a_cap_raw
        else:
            a_ta_t = 0.0
            a_to_t = 0.0
            a_mat_t = 0.0
            a_mup_t = 0.0
            a_mlo_t = 0.0
            a_e = 0.0
            a_cap_t = 0.0
            a_ynet = 0.0

        # objective contribution at t
        a_cpc = uw[t] * ceff[t] ** (-elasmu) * cslope[t]
        a_cons = 1000.0 / pop[t] * a_cpc
        gs[t] += -ynet[t] * a_cons
        a_ynet += (1.0 - s[t]) * a_cons
        if penalty > 0.0 and t_atm[t] > t_cap:
            a_ta_t += -2.0 * penalty * (t_atm[t] - t_cap)

        # flows at t
        yg = ygross[t]
        dc = dclim[t] if apply_damages else 0.0
        a_ygross = a_ynet * (1.0 - dc - dsg[t]) * (1.0 - lamb[t])
        a_dsg = -a_ynet * yg * (1.0 - lamb[t])
        a_lamb = -a_ynet * yg * (1.0 - dc - dsg[t])
        gmu[t] += a_lamb * theta1[t] * abat_exp * mu[t] ** (abat_exp - 1.0)
        gf[t] += a_dsg * sg_coeff * sg_exp * (f[t] / f2x) ** (sg_exp - 1.0) / f2x
        if apply_damages:
            a_dclim = -a_ynet * yg * (1.0 - lamb[t])
            a_ta_t += a_dclim * 2.0 * damage_coeff * t_atm[t]

        gmu[t] += -sigma[t] * yg * a_e
        a_ygross += sigma[t] * (1.0 - mu[t]) * a_e
        a_cap_t += a_ygross * capital_share * yg / cap[t]

        a_cap = a_cap_t
        a_mat, a_mup, a_mlo = a_mat_t, a_mup_t, a_mlo_t
        a_ta, a_to = a_ta_t, a_to_t

    return gmu, gs, gf, ge
