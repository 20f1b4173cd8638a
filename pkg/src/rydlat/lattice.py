"""Interaction-induced trapping potential on a standing-wave dressing field.

Two routes to the pair potential are provided and kept independent:

* :func:`pair_potential` / :func:`potential_numeric` take the dissipative
  two-atom steady state and evaluate Tr[rho (H1 + H2 + V)], minus the same
  quantity for non-interacting atoms.
* :func:`potential_analytic` is the closed-form perturbative result valid
  inside the soft core for omega1 << omega2 and gamma_p << |delta|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDiverged
from .params import E, P, DressingParams, StandingWave
from .quantum import liouvillian, pair_hamiltonian, partial_trace, single_hamiltonian, steady_state


def rabi_profile(sw: StandingWave, x):
    return sw.omega2(x)


# --- numeric route -----------------------------------------------------------


def interaction_energy(params: DressingParams, omega2_x1: float, omega2_x2: float, v: float) -> tuple[float, np.ndarray]:
    """Steady-state energy Tr[rho H] and the steady state itself."""
    h = pair_hamiltonian(params, omega2_x1, omega2_x2, v)
    rho = steady_state(liouvillian(h, params))
    return float(np.einsum("ij,ji->", rho, h).real), rho


def single_energy(params: DressingParams, omega2_local: float) -> float:
    """Steady-state energy of one atom; without interaction the pair state is a product of these."""
    h = single_hamiltonian(params, omega2_local)
    rho = steady_state(liouvillian(h, params))
    return float(np.einsum("ij,ji->", rho, h).real)


def pair_potential(params: DressingParams, omega2_x1: float, omega2_x2: float, v: float | None = None) -> float:
    """Baseline-subtracted steady-state pair energy at shift ``v`` (default: the cap)."""
    v = params.v_max if v is None else v
    u, _ = interaction_energy(params, omega2_x1, omega2_x2, v)
    return u - single_energy(params, omega2_x1) - single_energy(params, omega2_x2)


def potential_numeric(params: DressingParams, x1: float, x2: float, sw: StandingWave) -> float:
    v = params.interaction(x1 - x2)
    return pair_potential(params, sw.omega2(x1), sw.omega2(x2), v)


def intensity_scan(params: DressingParams, omega2_x2, omega2_x1: float | None = None, v: float | None = None) -> np.ndarray:
    """Numeric potential versus the second atom's Rabi frequency, atom 1 fixed (default at a node)."""
    a = params.omega2c if omega2_x1 is None else omega2_x1
    return np.array([pair_potential(params, a, b, v) for b in np.atleast_1d(omega2_x2)])


# --- analytic route ----------------------------------------------------------


def potential_analytic(params: DressingParams, omega2_x1, omega2_x2):
    """Closed-form soft-core dressing interaction (rad/s), vectorised over its arguments."""
    params.warn_if_nonperturbative("potential_analytic")
    a = np.square(np.asarray(omega2_x1, dtype=float))
    b = np.square(np.asarray(omega2_x2, dtype=float))
    d = params.delta
    gp = params.gamma_p
    num = (8 * d * d * (a + b) - (a - b) ** 2) * (a + b + 8 * d * d)
    den = (a + b - 8 * d * d) ** 2 + 64 * gp * gp * d * d
    out = params.omega1**4 / (4 * a * b * d) * num / den
    return float(out) if np.ndim(out) == 0 else out


def resonant_depth(params: DressingParams) -> float:
    """Closed form evaluated at the symmetric resonance omega2(x1) = omega2(x2) = 2|delta|."""
    return params.omega1**4 / (4 * params.delta * params.gamma_p**2)


class LorentzianParams(NamedTuple):
    w: float
    u0: float


def lorentzian_params(params: DressingParams, sw: StandingWave | None = None) -> LorentzianParams:
    """Half width ``w`` and depth ``u0 = omega1^4 / (8 delta gamma_p^2)`` of a single trap well.

    ``u0`` is half of :func:`resonant_depth`; both are kept because they differ
    by exactly that factor.
    """
    sw = sw or params.standing_wave()
    if sw.omega2sw <= 0:
        raise ValueError("omega2sw must be > 0 for a finite trap width")
    w = 2 * params.gamma_p / (sw.k * math.sin(sw.theta / 2) * sw.omega2sw)
    kw = sw.k * math.sin(sw.theta / 2) * w
    if kw > params.perturbative_threshold:
        import warnings

        from .params import PerturbativeRegimeWarning

        warnings.warn(f"k*w = {kw:.3g} is not small; the Lorentzian form is a poor approximation", PerturbativeRegimeWarning, stacklevel=2)
    u0 = params.omega1**4 / (8 * params.delta * params.gamma_p**2)
    return LorentzianParams(w, u0)


def lorentzian_profile(u0: float, w: float, xj: float, x):
    x = np.asarray(x, dtype=float)
    out = u0 / (1 + (x - xj) ** 2 / w**2)
    return float(out) if out.ndim == 0 else out


class LorentzianFit(NamedTuple):
    u0: float
    w: float
    x0: float
    rms: float


def _half_max_width(x, u, i0):
    half = abs(u[i0]) / 2
    au = np.abs(u)
    widths = []
    for step in (1, -1):
        j = i0
        while 0 <= j + step < len(u) and au[j + step] > half:
            j += step
        k = j + step
        if not 0 <= k < len(u) or au[k] > half or au[j] == au[k]:
            continue
        t = (au[j] - half) / (au[j] - au[k])
        widths.append(abs(x[j] + t * (x[k] - x[j]) - x[i0]))
    return float(np.mean(widths)) if widths else None


def fit_lorentzian(x, u, max_rel_rms: float = 0.2) -> LorentzianFit:
    """Least-squares fit of ``u0 / (1 + (x - x0)^2 / w^2)`` to samples.

    The fit starts from the largest-magnitude sample and its half-maximum
    crossing, so it is deterministic.  Raises :class:`FitDiverged` if no
    half-maximum crossing exists or the rms residual exceeds
    ``max_rel_rms * |u0|``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != u.shape or x.size < 7:
        raise ValueError("need at least 7 samples with matching x and u")
    order = np.argsort(x)
    x, u = x[order], u[order]
    i0 = int(np.argmax(np.abs(u)))
    if u[i0] == 0:
        raise FitDiverged("all samples are zero")
    w0 = _half_max_width(x, u, i0)
    if w0 is None or w0 <= 0:
        raise FitDiverged("no half-maximum crossing in the samples")
    xs, us = x[i0], u[i0]

    def resid(p):
        a, lw, c = p
        return a / (1 + ((x - xs) / w0 - c) ** 2 / np.exp(2 * lw)) - u / us

    sol = least_squares(resid, [1.0, 0.0, 0.0], xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    a, lw, c = sol.x
    u0 = a * us
    w = float(np.exp(lw) * w0)
    x0 = xs + c * w0
    rms = float(np.sqrt(np.mean((lorentzian_profile(u0, w, x0, x) - u) ** 2)))
    if not sol.success or rms > max_rel_rms * abs(u0):
        raise FitDiverged(f"rms residual {rms:.3e} against peak {u0:.3e}")
    return LorentzianFit(float(u0), w, float(x0), rms)


# --- resonance geometry ------------------------------------------------------


def resonance_surface(sw: StandingWave, delta: float, gamma_p: float, x1, x2) -> np.ndarray:
    """(omega2(x1)^2 + omega2(x2)^2 - 8 delta^2) / gamma_p on the product grid x1 x x2.

    For a 3D standing wave ``x1`` and ``x2`` are arrays of positions with a
    trailing axis of length 3.
    """
    a = np.atleast_1d(sw.omega2(x1))
    b = np.atleast_1d(sw.omega2(x2))
    return (a[:, None] ** 2 + b[None, :] ** 2 - 8 * delta**2) / gamma_p


def soft_core_radius(params: DressingParams) -> float:
    """Distance at which (omega1/omega2c)^2 C6/R^6 equals omega1 omega2c / (2|delta|)."""
    c6 = params.require_c6()
    return (2 * abs(params.delta) * params.omega1 * c6 / params.omega2c**3) ** (1 / 6)


def site_count(lattice_constant: float, r_c: float, dims: int = 1) -> int:
    """Occupied lattice sites within distance r_c of a given site (excluding itself)."""
    if lattice_constant <= 0:
        raise ValueError("lattice_constant must be > 0")
    q = r_c / lattice_constant
    if dims == 1:
        return 2 * int(math.floor(q))
    if dims != 3:
        raise ValueError("dims must be 1 or 3")
    # i^2 + j^2 + k^2 <= q^2 over integers; i^2 + j^2 + k^2 is an integer so floor(q^2) is exact
    m = int(math.floor(q * q * (1 + 1e-15)))
    n = math.isqrt(m)
    i = np.arange(-n, n + 1)
    rest = m - (i[:, None] ** 2 + i[None, :] ** 2)
    kmax = np.where(rest >= 0, np.floor(np.sqrt(np.maximum(rest, 0))).astype(np.int64), -1)
    # guard against sqrt rounding
    kmax = np.where((kmax + 1) ** 2 <= rest, kmax + 1, kmax)
    kmax = np.where((kmax >= 0) & (kmax**2 > rest), kmax - 1, kmax)
    total = int(np.sum(np.where(kmax >= 0, 2 * kmax + 1, 0)))
    return total - 1


def collective_depth(u0: float, lattice_constant: float, r_c: float, dims: int = 1) -> float:
    return site_count(lattice_constant, r_c, dims) * u0


# --- loss --------------------------------------------------------------------


def loss_rate(params: DressingParams, rho_pair: np.ndarray, atom: int = 0) -> float:
    """Per-atom scattering rate Tr[rho_i (gamma_p s_pp + gamma_e s_ee)] in 1/s."""
    r = partial_trace(rho_pair, atom)
    return float((params.gamma_p * r[P, P] + params.gamma_e * r[E, E]).real)


def single_loss(params: DressingParams, omega2_local: float) -> float:
    """Loss rate of an isolated dressed atom; the pair value minus this is the interaction-induced part."""
    h = single_hamiltonian(params, omega2_local)
    r = steady_state(liouvillian(h, params))
    return float((params.gamma_p * r[P, P] + params.gamma_e * r[E, E]).real)


def loss_shortcut(params: DressingParams, u):
    """Profile relation gamma_p U / delta used as a quick loss estimate."""
    return params.gamma_p * np.asarray(u) / params.delta


def trap_center_state(params: DressingParams, omega2_x1: float | None = None, omega2_x2: float | None = None):
    """Steady state (and its potential) of two atoms inside the soft core at the given Rabi frequencies."""
    a = params.omega2c if omega2_x1 is None else omega2_x1
    b = params.omega2c if omega2_x2 is None else omega2_x2
    u, rho = interaction_energy(params, a, b, params.v_max)
    return rho, u - single_energy(params, a) - single_energy(params, b)


# --- surfaces ----------------------------------------------------------------


@dataclass
class PotentialSurface:
    """U(x1, x2) sampled on a product grid; ``values[i, j]`` belongs to (axis1[i], axis2[j])."""

    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis1 = np.asarray(self.axis1, dtype=float)
        self.axis2 = np.asarray(self.axis2, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.axis1.size, self.axis2.size):
            raise ValueError("values shape does not match the axes")

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        ok = True
        for ax in (self.axis1, self.axis2):
            d = np.diff(ax)
            ok &= ax.size > 1 and np.allclose(d, d[0], rtol=rtol, atol=0)
        return bool(ok)

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.axis1[1] - self.axis1[0]), float(self.axis2[1] - self.axis2[0])

    def rows(self):
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                yield a, b, self.values[i, j]


def potential_surface(params: DressingParams, sw: StandingWave, x1, x2, method: str = "analytic", v: float | None = None) -> PotentialSurface:
    """Sample U on the product grid ``x1 x x2``.

    ``method="analytic"`` evaluates the closed form (soft-core limit);
    ``method="numeric"`` solves the steady state at every grid point with
    ``v`` (default: the interaction for the actual separation if C6 is
    configured, otherwise the cap).
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    a = sw.omega2(x1)
    b = sw.omega2(x2)
    if method == "analytic":
        vals = potential_analytic(params, np.asarray(a)[:, None], np.asarray(b)[None, :])
    elif method == "numeric":
        a = np.atleast_1d(a)
        b = np.atleast_1d(b)
        ea = np.array([single_energy(params, o) for o in a])
        eb = ea if np.array_equal(a, b) else np.array([single_energy(params, o) for o in b])
        const_v = v is not None or params.c6 is None
        # U(x1, x2) = U(x2, x1) lets identical axes be filled from one triangle
        mirror = const_v and np.array_equal(x1, x2)
        vals = np.empty((x1.size, x2.size))
        for i in range(x1.size):
            for j in range(i if mirror else 0, x2.size):
                if v is not None:
                    vij = v
                elif params.c6 is not None:
                    vij = params.interaction(x1[i] - x2[j])
                else:
                    vij = params.v_max
                vals[i, j] = interaction_energy(params, a[i], b[j], vij)[0] - ea[i] - eb[j]
                if mirror:
                    vals[j, i] = vals[i, j]
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = {"method": method, "units": {"axis": "m", "values": "rad/s"}, "params": params.to_dict()}
    return PotentialSurface(x1, x2, vals, meta)


def default_grid(sw: StandingWave, n: int = 512, refine: int = 8, refine_cells: int = 8) -> np.ndarray:
    """One standing-wave period with ``refine``-fold oversampling around both nodes."""
    period = sw.period
    base = np.linspace(0.0, period, n, endpoint=False)
    dx = period / n
    fine = np.arange(-refine_cells * refine, refine_cells * refine + 1) * dx / refine
    pts = np.concatenate([base, fine, period + fine])
    pts = pts[(pts >= 0) & (pts <= period)]
    return np.unique(np.round(pts / dx * refine * 16) / (refine * 16) * dx)
