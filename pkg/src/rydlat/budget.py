"""Loss calibration of the lower Rabi frequency and the black-body time budget."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, UnknownTemperature
from .lattice import loss_rate, loss_shortcut, trap_center_state
from .params import DressingParams

# Depopulation rates of the Rydberg state (1/s) at the tabulated temperatures (K)
BBR_RATES = {300: 1960.0, 77: 500.0, 3: 17.0}
SURVIVAL_THRESHOLD = 0.82


@dataclass
class Calibration:
    omega1: float
    u0: float
    loss: float
    loss_shortcut: float
    evaluations: int


def center_loss(params: DressingParams, omega1: float, omega2_x1=None, omega2_x2=None) -> tuple[float, float]:
    """Per-atom loss (1/s) and potential (rad/s) at the trap center for a trial omega1."""
    p = params.with_(omega1=omega1)
    rho, u = trap_center_state(p, omega2_x1, omega2_x2)
    return loss_rate(p, rho, 0), u


def calibrate_omega1(
    params: DressingParams,
    gamma_target: float,
    omega2_x1: float | None = None,
    omega2_x2: float | None = None,
    rtol: float = 1e-6,
    n_check: int = 9,
) -> Calibration:
    """Find omega1 giving per-atom loss ``gamma_target`` at the trap center.

    A first solve at ``params.omega1`` (or 1e-3 omega2c if that is zero) is
    extrapolated with the omega1^4 law to place a factor-2 bracket, which is
    widened if needed.  The bracket is sampled at ``n_check`` points and must be
    strictly increasing before the root search runs.
    """
    if not gamma_target > 0:
        raise ValueError("gamma_target must be > 0")
    count = 0

    def loss(o1):
        nonlocal count
        count += 1
        return center_loss(params, o1, omega2_x1, omega2_x2)[0]

    o0 = params.omega1 if params.omega1 > 0 else 1e-3 * params.omega2c
    l0 = loss(o0)
    if not l0 > 0:
        raise BracketFailure(f"zero loss at omega1={o0:.6g}", [(o0, l0)])
    guess = o0 * (gamma_target / l0) ** 0.25
    lo, hi = guess / 2, guess * 2
    llo, lhi = loss(lo), loss(hi)
    for _ in range(20):
        if llo < gamma_target < lhi:
            break
        if llo >= gamma_target:
            lo /= 2
            llo = loss(lo)
        if lhi <= gamma_target:
            hi *= 2
            lhi = loss(hi)
    else:
        raise BracketFailure("could not bracket the target loss", [(lo, llo), (hi, lhi)])

    grid = np.geomspace(lo, hi, n_check)
    samples = [(float(o), loss(o)) for o in grid]
    vals = np.array([s[1] for s in samples])
    if np.any(np.diff(vals) <= 0):
        raise BracketFailure("loss is not monotone in omega1 over the bracket", samples)

    lt = math.log(gamma_target)
    x = brentq(lambda q: math.log(loss(math.exp(q))) - lt, math.log(lo), math.log(hi), xtol=rtol * 1e-2, rtol=4 * np.finfo(float).eps)
    o1 = math.exp(x)
    gam, u = center_loss(params, o1, omega2_x1, omega2_x2)
    return Calibration(o1, u, gam, float(loss_shortcut(params, u)), count + 1)


def calibration_scan(params: DressingParams, omega2c_values, gamma_target: float = 1.0) -> list[Calibration]:
    """Calibrate at each omega2c with the detuning tied to it by omega2c = 2|delta| (sign kept)."""
    out = []
    s = math.copysign(1.0, params.delta)
    for o2c in np.atleast_1d(omega2c_values):
        p = params.with_(omega2c=float(o2c), delta=s * float(o2c) / 2)
        out.append(calibrate_omega1(p, gamma_target))
    return out


def bbr_rate(temperature: float) -> float:
    key = int(temperature) if float(temperature).is_integer() else temperature
    if key not in BBR_RATES:
        raise UnknownTemperature(temperature, BBR_RATES)
    return BBR_RATES[key]


@dataclass(frozen=True)
class BBRBudget:
    temperature: float
    gamma_bbr: float
    p_r: float
    tau_max: float
    threshold: float = SURVIVAL_THRESHOLD

    def survival(self, tau):
        return np.exp(-self.p_r * self.gamma_bbr * np.asarray(tau))


def budget_from_pr(p_r: float, temperature: float, threshold: float = SURVIVAL_THRESHOLD) -> BBRBudget:
    if not p_r > 0:
        raise ValueError("p_r must be > 0")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    g = bbr_rate(temperature)
    return BBRBudget(float(temperature), g, p_r, -math.log(threshold) / (p_r * g), threshold)


def bbr_budget(n_sites: int, omega1: float, omega2c: float, temperature: float, threshold: float = SURVIVAL_THRESHOLD) -> BBRBudget:
    """Time until exp(-P_r Gamma_BBR tau) drops to ``threshold`` with P_r = N omega1^2 / omega2c^2."""
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    return budget_from_pr(n_sites * omega1**2 / omega2c**2, temperature, threshold)
