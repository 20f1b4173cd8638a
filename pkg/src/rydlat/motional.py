"""Two-atom motional ground state on a pair-potential surface.

The wavefunction lives on the (x1, x2) plane and feels
H = -(hbar / 2m)(d^2/dx1^2 + d^2/dx2^2) + U(x1, x2) + g_nl |psi|^2
in rad/s.  Imaginary-time split-step propagation with a spectral kinetic
term relaxes any nodeless start towards the ground state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import BoxedSpectrumUnsupported, FitWindowTooSmall, NotAnExtremum, NotConverged, UnstableStep
from .lattice import PotentialSurface
from .params import HBAR


@dataclass
class Wavefunction2D:
    axis1: np.ndarray
    axis2: np.ndarray
    amplitudes: np.ndarray
    energy: float
    norm: float
    iterations: int = 0
    propagator_energy: float = float("nan")
    kinetic: float = float("nan")
    potential: float = float("nan")
    energy_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def cell_area(self) -> float:
        return float((self.axis1[1] - self.axis1[0]) * (self.axis2[1] - self.axis2[0]))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def correlation(self) -> float:
        return density_marginals(self)[2]


@dataclass
class ModeReport:
    stiffness_plus: float
    stiffness_minus: float
    omega_plus: float
    omega_minus: float
    bound_plus: bool
    bound_minus: bool
    cross: float
    center: tuple
    half_window: float
    n_points: int
    correlation: float | None = None


def _wavenumbers(n: int, d: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=d)


def stability_bound(mass: float, dx: float, hbar: float = HBAR) -> float:
    """Largest admissible imaginary time step m dx^2 / (2 hbar)."""
    return mass * dx * dx / (2 * hbar)


def _check_well(u: np.ndarray) -> None:
    i, j = np.unravel_index(np.argmin(u), u.shape)
    edge = min(u[0].min(), u[-1].min(), u[:, 0].min(), u[:, -1].min())
    if i in (0, u.shape[0] - 1) or j in (0, u.shape[1] - 1) or not u[i, j] < edge:
        raise BoxedSpectrumUnsupported("the surface has no interior well; its lowest states would be set by the box")


def ground_state(
    u: PotentialSurface,
    mass: float,
    dt: float,
    tol: float,
    g_nl: float = 0.0,
    max_iters: int = 200_000,
    psi0: np.ndarray | None = None,
    hbar: float = HBAR,
) -> Wavefunction2D:
    """Imaginary-time ground state on a uniform periodic grid.

    Each step applies exp(-dt U/2) exp(-dt T) exp(-dt U/2) and renormalises.
    In the linear case the step operator A is symmetric positive, and the
    propagator energy -ln<psi|A|psi>/dt cannot increase from one step to the
    next; that sequence is checked every step.  Convergence is declared once
    both the last drop and the remaining drop extrapolated from the ratio of
    successive drops are below ``tol``.  With ``g_nl`` != 0 the mean-field
    energy is used instead.  The reported ``energy`` is always <psi|H|psi>.
    """
    if not u.is_uniform():
        raise ValueError("ground_state needs a uniform grid")
    x1, x2 = u.axis1, u.axis2
    dx1, dx2 = u.spacing
    bound = stability_bound(mass, min(dx1, dx2), hbar)
    if not 0 < dt < bound:
        raise UnstableStep(f"dt={dt:.3e} s must lie below m dx^2 / (2 hbar) = {bound:.3e} s")
    pot = u.values
    _check_well(pot)
    shift = float(pot.min())
    vs = pot - shift
    da = dx1 * dx2
    k1 = _wavenumbers(x1.size, dx1)
    k2 = _wavenumbers(x2.size, dx2)
    tk = (hbar / (2 * mass)) * (k1[:, None] ** 2 + k2[None, :] ** 2)
    exp_t = np.exp(-dt * tk)
    exp_v = np.exp(-0.5 * dt * vs)

    if psi0 is None:
        i, j = np.unravel_index(np.argmin(pot), pot.shape)
        s1 = (x1[-1] - x1[0]) / 8
        s2 = (x2[-1] - x2[0]) / 8
        psi = np.exp(-((x1[:, None] - x1[i]) ** 2) / (2 * s1**2) - (x2[None, :] - x2[j]) ** 2 / (2 * s2**2))
    else:
        psi = np.array(psi0, dtype=float)
    psi = psi / math.sqrt(np.sum(psi**2) * da)

    def kinetic(p):
        pk = np.fft.fft2(p)
        return float(np.sum(tk * np.abs(pk) ** 2) / p.size * da)

    def mf_energy(p):
        d = p**2
        return kinetic(p) + float(np.sum(pot * d) * da) + 0.5 * g_nl * float(np.sum(d * d) * da)

    history = []
    prev = math.inf
    last_drop = math.inf
    delta = math.inf
    for it in range(1, max_iters + 1):
        if g_nl:
            ev = np.exp(-0.5 * dt * (vs + g_nl * psi**2))
        else:
            ev = exp_v
        phi = ev * np.fft.ifft2(exp_t * np.fft.fft2(ev * psi)).real
        n2 = float(np.sum(phi**2) * da)
        if not math.isfinite(n2) or n2 <= 0:
            raise UnstableStep(f"norm became {n2} at step {it}")
        if g_nl:
            psi = phi / math.sqrt(n2)
            e = mf_energy(psi)
        else:
            r = float(np.sum(psi * phi) * da)
            if not r > 0:
                raise UnstableStep(f"non-positive overlap {r} at step {it}")
            e = -math.log(r) / dt + shift
            psi = phi / math.sqrt(n2)
        slack = 1e-12 * max(abs(e), abs(shift), 1.0)
        if e > prev + slack:
            raise UnstableStep(f"energy rose by {e - prev:.3e} rad/s at step {it}")
        history.append(e)
        step_drop = prev - e
        q = step_drop / last_drop if 0 < last_drop < math.inf else math.inf
        # remaining decrease if the per-step drops keep shrinking geometrically
        delta = step_drop / (1 - q) if 0 <= q < 1 else math.inf
        prev, last_drop = e, step_drop
        if step_drop < tol and delta < tol:
            break
    else:
        raise NotConverged(max_iters, delta)

    psi = np.abs(psi)
    kin = kinetic(psi)
    epot = float(np.sum(pot * psi**2) * da)
    energy = kin + epot + 0.5 * g_nl * float(np.sum(psi**4) * da)
    return Wavefunction2D(
        x1.copy(), x2.copy(), psi, energy, float(np.sum(psi**2) * da), it, e, kin, epot, np.array(history)
    )


def density_marginals(psi: Wavefunction2D) -> tuple[np.ndarray, np.ndarray, float]:
    """Marginal densities of each atom and the Pearson correlation of the joint density."""
    d = psi.density
    dx1 = psi.axis1[1] - psi.axis1[0]
    dx2 = psi.axis2[1] - psi.axis2[0]
    total = d.sum() * dx1 * dx2
    w = d / d.sum()
    p1 = d.sum(axis=1) * dx2 / total
    p2 = d.sum(axis=0) * dx1 / total
    m1 = float(np.sum(w.sum(axis=1) * psi.axis1))
    m2 = float(np.sum(w.sum(axis=0) * psi.axis2))
    a = psi.axis1 - m1
    b = psi.axis2 - m2
    cov = float(a @ w @ b)
    v1 = float(np.sum(w.sum(axis=1) * a**2))
    v2 = float(np.sum(w.sum(axis=0) * b**2))
    return p1, p2, cov / math.sqrt(v1 * v2)


def gaussian_widths(psi: Wavefunction2D) -> tuple[float, float]:
    """Standard deviations of |psi| (not |psi|^2) along each axis.

    For a harmonic ground state these equal sqrt(hbar / (m omega)).
    """
    a = np.abs(psi.amplitudes)
    w = a / a.sum()
    out = []
    for ax, marg in ((psi.axis1, w.sum(axis=1)), (psi.axis2, w.sum(axis=0))):
        m = np.sum(marg * ax)
        out.append(float(math.sqrt(np.sum(marg * (ax - m) ** 2))))
    return out[0], out[1]


# --- normal modes -------------------------------------------------------------


def _nearest(axis, x):
    return int(np.argmin(np.abs(axis - x)))


def find_extremum(u: PotentialSurface, guess) -> tuple[float, float]:
    """Grid point of the local maximum of |U| reached by steepest ascent from ``guess``."""
    a = np.abs(u.values)
    i, j = _nearest(u.axis1, guess[0]), _nearest(u.axis2, guess[1])
    while True:
        lo_i, hi_i = max(i - 1, 0), min(i + 2, a.shape[0])
        lo_j, hi_j = max(j - 1, 0), min(j + 2, a.shape[1])
        block = a[lo_i:hi_i, lo_j:hi_j]
        di, dj = np.unravel_index(np.argmax(block), block.shape)
        ni, nj = lo_i + di, lo_j + dj
        if (ni, nj) == (i, j):
            return float(u.axis1[i]), float(u.axis2[j])
        i, j = ni, nj


def _hwhm_estimate(u: PotentialSurface, center) -> float:
    interp = RegularGridInterpolator((u.axis1, u.axis2), u.values, bounds_error=False, fill_value=None)
    u0 = float(interp([center])[0])
    span = min(u.axis1[-1] - u.axis1[0], u.axis2[-1] - u.axis2[0])
    r = np.linspace(0, span / 2, 400)[1:]
    widths = []
    for d in ((1, 1), (1, -1)):
        e = np.array(d) / math.sqrt(2)
        for sgn in (1, -1):
            pts = np.asarray(center)[None, :] + sgn * r[:, None] * e[None, :]
            vals = np.abs(interp(pts))
            below = np.flatnonzero(vals < abs(u0) / 2)
            if below.size:
                widths.append(r[below[0]])
    if not widths:
        return span / 4
    return float(min(widths))


def mode_analysis(
    u: PotentialSurface,
    center,
    mass: float,
    half_window: float | None = None,
    hbar: float = HBAR,
    psi: Wavefunction2D | None = None,
) -> ModeReport:
    """Quadratic fit of U in s+- = (dx1 +- dx2)/sqrt(2) around an extremum of |U|.

    The fit is a full quadratic (including the s+ s- cross term) over the
    square |s+|, |s-| <= ``half_window``; by default half of the trap width
    ``w`` from ``u.metadata["w"]`` or, failing that, of the smallest
    half-maximum distance of |U| along the two diagonals.  If the ground
    state ``psi`` is given its density correlation is attached to the report.
    """
    c1, c2 = float(center[0]), float(center[1])
    i, j = _nearest(u.axis1, c1), _nearest(u.axis2, c2)
    dx1, dx2 = u.spacing
    if abs(u.axis1[i] - c1) > dx1 / 2 + 1e-15 or abs(u.axis2[j] - c2) > dx2 / 2 + 1e-15:
        raise NotAnExtremum("center lies outside the grid")
    a = np.abs(u.values)
    if i in (0, a.shape[0] - 1) or j in (0, a.shape[1] - 1) or a[i, j] < a[i - 1 : i + 2, j - 1 : j + 2].max():
        raise NotAnExtremum(f"|U| has no local extremum within half a cell of ({c1:.6g}, {c2:.6g})")
    cx, cy = float(u.axis1[i]), float(u.axis2[j])
    if half_window is None:
        w = u.metadata.get("w") if u.metadata else None
        half_window = 0.5 * (w if w else _hwhm_estimate(u, (cx, cy)))
    d1 = u.axis1[:, None] - cx
    d2 = u.axis2[None, :] - cy
    sp_ = (d1 + d2) / math.sqrt(2)
    sm_ = (d1 - d2) / math.sqrt(2)
    mask = (np.abs(sp_) <= half_window) & (np.abs(sm_) <= half_window)
    n = int(mask.sum())
    sp_, sm_ = sp_[mask], sm_[mask]
    design = np.column_stack([np.ones(n), sp_, sm_, 0.5 * sp_**2, 0.5 * sm_**2, sp_ * sm_])
    scale = np.array([1, half_window, half_window, half_window**2, half_window**2, half_window**2])
    if n < 9 or np.linalg.matrix_rank(design / scale) < 6:
        raise FitWindowTooSmall(f"{n} grid points inside a half window of {half_window:.3e} m")
    coef, *_ = np.linalg.lstsq(design / scale, u.values[mask], rcond=None)
    coef = coef / scale
    kp, km = float(coef[3]), float(coef[4])
    return ModeReport(
        kp,
        km,
        math.sqrt(hbar * abs(kp) / mass),
        math.sqrt(hbar * abs(km) / mass),
        kp > 0,
        km > 0,
        float(coef[5]),
        (cx, cy),
        float(half_window),
        n,
        None if psi is None else density_marginals(psi)[2],
    )


def harmonic_surface(omega: float, mass: float, half_width: float, n: int, hbar: float = HBAR) -> PotentialSurface:
    """0.5 m omega^2 (x1^2 + x2^2) / hbar on a periodic grid; used as an oracle."""
    x = np.linspace(-half_width, half_width, n, endpoint=False)
    vals = 0.5 * mass * omega**2 * (x[:, None] ** 2 + x[None, :] ** 2) / hbar
    return PotentialSurface(x, x, vals, {"kind": "harmonic", "omega": omega})
