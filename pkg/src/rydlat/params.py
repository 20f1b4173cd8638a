"""Physical parameters of the dressing scheme and the standing-wave field.

All frequencies are angular frequencies in rad/s (hbar = 1 for energies), all
lengths in metres.  The basis of a single atom is ordered (g, p, e) everywhere
in the package.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.constants import atomic_mass, hbar

from .errors import MissingC6, ParameterError

TWO_PI = 2.0 * math.pi

# 87.9056 u, the atomic mass of 88Sr
SR88_MASS = 87.9056121 * atomic_mass
HBAR = hbar

G, P, E = 0, 1, 2
LEVELS = ("g", "p", "e")


class PerturbativeRegimeWarning(UserWarning):
    """Raised when a formula valid for omega1 << omega2c or gamma_p << |delta| is used outside that regime."""


@dataclass(frozen=True)
class DressingParams:
    """Laser and atom scalars for the three-level dressing ladder.

    ``c6`` may be ``None``; operations that need it raise :class:`MissingC6`.
    ``v_max_factor`` caps the van der Waals shift at ``v_max_factor * |delta|``
    to stand in for the infinite interaction inside the soft core.
    """

    omega1: float
    omega2c: float
    omega2sw: float
    delta: float
    gamma_p: float
    gamma_e: float
    wavelength: float
    theta: float = math.pi
    c6: float | None = None
    mass: float = SR88_MASS
    v_max_factor: float = 1e6
    perturbative_threshold: float = 0.2

    def __post_init__(self):
        checks = [
            (self.omega1 >= 0, "omega1 must be >= 0"),
            (self.omega2c > 0, "omega2c must be > 0"),
            (self.omega2sw >= 0, "omega2sw must be >= 0"),
            (self.delta != 0 and math.isfinite(self.delta), "delta must be finite and nonzero"),
            (self.gamma_p > 0, "gamma_p must be > 0"),
            (self.gamma_e >= 0, "gamma_e must be >= 0"),
            (self.wavelength > 0, "wavelength must be > 0"),
            (0 < self.theta <= math.pi, "theta must lie in (0, pi]"),
            (self.mass > 0, "mass must be > 0"),
            (self.v_max_factor > 0, "v_max_factor must be > 0"),
            (self.c6 is None or self.c6 > 0, "c6 must be > 0 when given"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParameterError(msg)

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def v_max(self) -> float:
        return self.v_max_factor * abs(self.delta)

    @property
    def coupling_ratio(self) -> float:
        """omega1 / omega2c; the dressing formulas assume this is small."""
        return self.omega1 / self.omega2c

    @property
    def decay_ratio(self) -> float:
        """gamma_p / |delta|."""
        return self.gamma_p / abs(self.delta)

    @property
    def is_perturbative(self) -> bool:
        t = self.perturbative_threshold
        return self.coupling_ratio <= t and self.decay_ratio <= t

    def warn_if_nonperturbative(self, where: str = "") -> None:
        if not self.is_perturbative:
            warnings.warn(
                f"{where or 'formula'} assumes omega1/omega2c and gamma_p/|delta| below "
                f"{self.perturbative_threshold}; got {self.coupling_ratio:.3g} and {self.decay_ratio:.3g}",
                PerturbativeRegimeWarning,
                stacklevel=3,
            )

    def require_c6(self) -> float:
        if self.c6 is None:
            raise MissingC6()
        return self.c6

    def interaction(self, r):
        """Van der Waals shift C6/r^6 for separation ``r``, capped at ``v_max``."""
        c6 = self.require_c6()
        r = np.abs(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore", over="ignore"):
            v = c6 / r**6
        v = np.minimum(v, self.v_max)
        return float(v) if v.ndim == 0 else v

    def with_(self, **changes) -> DressingParams:
        return replace(self, **changes)

    def standing_wave(self, dimensionality: int = 1) -> StandingWave:
        return StandingWave(self.omega2c, self.omega2sw, self.k, self.theta, dimensionality)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StandingWave:
    """Spatial Rabi-frequency profile of the upper transition.

    1D: ``omega2c + omega2sw * |sin(k x sin(theta/2))|``.
    3D: ``omega2c + omega2sw * |sin(k x) sin(k y) sin(k z)|``; positions are
    arrays whose last axis has length 3.
    """

    omega2c: float
    omega2sw: float
    k: float
    theta: float = math.pi
    dimensionality: int = 1

    def __post_init__(self):
        if self.dimensionality not in (1, 3):
            raise ParameterError("dimensionality must be 1 or 3")
        if self.k <= 0:
            raise ParameterError("k must be > 0")
        if not 0 < self.theta <= math.pi:
            raise ParameterError("theta must lie in (0, pi]")

    @property
    def k_eff(self) -> float:
        return self.k * math.sin(self.theta / 2) if self.dimensionality == 1 else self.k

    @property
    def period(self) -> float:
        """Spacing between adjacent nodes along one axis."""
        return math.pi / self.k_eff

    def nodes(self, n: int) -> np.ndarray:
        return np.arange(n) * self.period

    def omega2(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimensionality == 1:
            s = np.abs(np.sin(self.k_eff * x))
        else:
            if x.shape[-1] != 3:
                raise ValueError("3D standing wave expects positions with a trailing axis of length 3")
            s = np.abs(np.prod(np.sin(self.k * x), axis=-1))
        out = self.omega2c + self.omega2sw * s
        return float(out) if np.ndim(out) == 0 else out


def hz(f):
    """Frequency quoted as f/2pi in Hz -> angular frequency in rad/s."""
    return np.multiply(f, TWO_PI)


def to_hz(w):
    return np.divide(w, TWO_PI)
