"""Eigenstructure of the singly and doubly excited pair subspaces.

S2 is spanned by (gp, ge) for one excitation, S3 by (pp, pe, ep, ee).  Large
``v`` decouples |ee> and leaves three finite branches whose zero crossing is the
interaction-induced resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SubspaceSpectrum:
    labels: tuple
    energies: np.ndarray
    eigenvectors: np.ndarray | None = None


def _fix_phase(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real and positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > tol * np.abs(col).max())[0]
        out[:, j] = col * (abs(col[idx]) / col[idx])
    return out


def eigh_sorted(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense Hermitian eigendecomposition, ascending, with a fixed column phase."""
    w, v = np.linalg.eigh(h)
    return w, _fix_phase(v)


def s2_matrix(delta: float, omega2: float) -> np.ndarray:
    return np.array([[-delta, omega2 / 2], [omega2 / 2, 0.0]], dtype=complex)


def s2_spectrum(delta: float, omega2: float) -> SubspaceSpectrum:
    w, v = eigh_sorted(s2_matrix(delta, omega2))
    return SubspaceSpectrum(("beta_minus", "beta_plus"), w, v)


def s2_closed_form(delta: float, omega2: float) -> np.ndarray:
    r = 0.5 * math.sqrt(delta**2 + omega2**2)
    return np.array([-delta / 2 - r, -delta / 2 + r])


def s3_matrix(delta: float, omega2_x1: float, omega2_x2: float, v: float) -> np.ndarray:
    """Hamiltonian block on (pp, pe, ep, ee)."""
    a, b = omega2_x1 / 2, omega2_x2 / 2
    return np.array(
        [
            [-2 * delta, b, a, 0.0],
            [b, -delta, 0.0, a],
            [a, 0.0, -delta, b],
            [0.0, a, b, v],
        ],
        dtype=complex,
    )


def s3_spectrum(delta: float, omega2_x1: float, omega2_x2: float, v: float) -> SubspaceSpectrum:
    w, vec = eigh_sorted(s3_matrix(delta, omega2_x1, omega2_x2, v))
    return SubspaceSpectrum(("s3_0", "s3_1", "s3_2", "s3_3"), w, vec)


def s3_asymptotic(delta: float, omega2_x1: float, omega2_x2: float) -> SubspaceSpectrum:
    """Finite branches once |ee> is pushed away; sorted ascending with their labels.

    The decoupled |ee> level is not included in ``energies``.
    """
    r = 0.5 * math.sqrt(delta**2 + omega2_x1**2 + omega2_x2**2)
    vals = {"lambda_minus": -1.5 * delta - r, "lambda_1": -delta, "lambda_plus": -1.5 * delta + r}
    order = sorted(vals, key=vals.get)
    return SubspaceSpectrum(tuple(order), np.array([vals[k] for k in order]))


def s3_finite_numeric(delta, omega2_x1, omega2_x2, v) -> np.ndarray:
    """The three numeric S3 eigenvalues closest to the asymptotic set (drops the |ee>-like level)."""
    w = np.linalg.eigvalsh(s3_matrix(delta, omega2_x1, omega2_x2, v))
    return np.delete(w, np.argmax(np.abs(w - (-1.5 * delta))))


def resonant_branch(delta: float, omega2_x1: float, omega2_x2: float) -> float:
    """The branch that can reach zero: lambda_plus for delta > 0, lambda_minus for delta < 0."""
    r = 0.5 * math.sqrt(delta**2 + omega2_x1**2 + omega2_x2**2)
    return -1.5 * delta + math.copysign(r, delta)


def resonance_offset(delta, omega2_x1, omega2_x2, gamma_p):
    """(omega2(x1)^2 + omega2(x2)^2 - 8 delta^2) / gamma_p^2."""
    return (np.square(omega2_x1) + np.square(omega2_x2) - 8 * delta**2) / gamma_p**2


def resonance_offset_hwhm(delta, omega2_x1, omega2_x2, gamma_p):
    """Same detuning normalised so that +-1 is the half-maximum of the pair potential.

    Near the symmetric resonance a shift of one Rabi frequency by 2 gamma_p
    changes the sum of squares by 8 |delta| gamma_p.
    """
    return (np.square(omega2_x1) + np.square(omega2_x2) - 8 * delta**2) / (8 * abs(delta) * gamma_p)


def resonance_partner(delta: float, omega2_x1: float) -> float:
    """Rabi frequency at atom 2 that completes the resonance for a given atom 1 (nan if none)."""
    rest = 8 * delta**2 - omega2_x1**2
    return math.sqrt(rest) if rest > 0 else math.nan


def spectrum_scan(delta: float, omega2_x1, omega2_x2) -> np.ndarray:
    """Rows (omega2_x1, omega2_x2, lambda_minus, lambda_1, lambda_plus) on the product grid."""
    rows = []
    for a in np.atleast_1d(omega2_x1):
        for b in np.atleast_1d(omega2_x2):
            r = 0.5 * math.sqrt(delta**2 + a**2 + b**2)
            rows.append((a, b, -1.5 * delta - r, -delta, -1.5 * delta + r))
    return np.array(rows)
