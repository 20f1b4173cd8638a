"""Dressed-atom operators, the two-atom master equation and its steady state.

Single-atom basis is (g, p, e); the pair basis is the row-major product
(gg, gp, ge, pg, pp, pe, eg, ep, ee).  Operators are plain complex ndarrays in
units of rad/s.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import DegenerateSteadyState, DimensionMismatch, NumericalError
from .params import E, G, P, DressingParams

PAIR_LABELS = tuple(a + b for a in "gpe" for b in "gpe")
EE = 8


def sigma(a: int, b: int, dim: int = 3) -> np.ndarray:
    """Transition operator |a><b|."""
    out = np.zeros((dim, dim), dtype=complex)
    out[a, b] = 1.0
    return out


def on_atom(op: np.ndarray, atom: int) -> np.ndarray:
    """Embed a single-atom operator into the pair space."""
    eye = np.eye(op.shape[0])
    return np.kron(op, eye) if atom == 0 else np.kron(eye, op)


SWAP = np.zeros((9, 9))
for _i in range(3):
    for _j in range(3):
        SWAP[_j * 3 + _i, _i * 3 + _j] = 1.0


def single_hamiltonian(params: DressingParams, omega2_local: float) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[G, P] = h[P, G] = params.omega1 / 2
    h[P, E] = h[E, P] = omega2_local / 2
    h[P, P] = -params.delta
    return h


def pair_hamiltonian(params: DressingParams, omega2_at_x1: float, omega2_at_x2: float, v: float) -> np.ndarray:
    """H1 + H2 + v |ee><ee| for atoms seeing upper Rabi frequencies omega2_at_x1/x2."""
    h = on_atom(single_hamiltonian(params, omega2_at_x1), 0) + on_atom(single_hamiltonian(params, omega2_at_x2), 1)
    h[EE, EE] += v
    return h


def jump_operators(gamma_p: float, gamma_e: float, n_atoms: int = 2) -> np.ndarray:
    """Collapse operators sqrt(gamma_p)|g><p| and sqrt(gamma_e)|p><e| on every atom."""
    ops = []
    single = [np.sqrt(gamma_p) * sigma(G, P), np.sqrt(gamma_e) * sigma(P, E)]
    for c in single:
        if n_atoms == 1:
            ops.append(c)
        else:
            ops.extend(on_atom(c, a) for a in range(n_atoms))
    return np.array(ops)


def liouvillian(h: np.ndarray, params: DressingParams | None = None, *, gamma_p=None, gamma_e=None) -> np.ndarray:
    """Vectorised generator of d rho/dt = -i[H, rho] + sum_c D(c) rho.

    Rates come from ``params`` unless given explicitly (the explicit form also
    allows the dissipation-free limit, which ``DressingParams`` forbids).
    Vectorisation is row-major, see :func:`vec`.
    """
    gp = params.gamma_p if gamma_p is None else gamma_p
    ge = params.gamma_e if gamma_e is None else gamma_e
    n_atoms = 1 if h.shape[0] == 3 else 2
    return _kernels.lindblad(h, jump_operators(gp, ge, n_atoms))


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(n, n)


def steady_state(l: np.ndarray, rtol: float = 1e-8, residual_rtol: float = 1e-10) -> np.ndarray:
    """Unique fixed point of the superoperator ``l`` with unit trace.

    One population equation is replaced by the trace constraint (trace
    preservation makes it redundant) and the square system is solved directly.

    Uniqueness is judged from the singular values of ``l``: the second
    smallest must exceed ``rtol`` times the median singular value.  The median
    rather than the largest is the reference because a capped interaction puts
    a handful of singular values many decades above the rest.
    """
    n2 = l.shape[0]
    n = int(round(np.sqrt(n2)))
    s = np.linalg.svd(l, compute_uv=False)
    scale = float(np.median(s))
    if s[-2] <= rtol * scale:
        raise DegenerateSteadyState(float(s[-1]), float(s[-2]), scale)

    a = np.array(l, dtype=complex, copy=True)
    b = np.zeros(n2, dtype=complex)
    a[0, :] = np.eye(n).reshape(-1)
    b[0] = 1.0
    rho = np.linalg.solve(a, b).reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    res = np.abs(l @ rho.reshape(-1)).max()
    if res > residual_rtol * np.abs(l).sum(axis=1).max():
        raise NumericalError(f"steady-state residual {res:.3e} exceeds bound")
    return rho


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    if rho.shape != op.shape:
        raise DimensionMismatch(f"state {rho.shape} vs operator {op.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced state of atom ``keep`` (0 or 1) from a two-atom density matrix."""
    if rho.shape != (9, 9):
        raise DimensionMismatch(f"expected a 9x9 pair state, got {rho.shape}")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    r = rho.reshape(3, 3, 3, 3)
    return np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def check_density_matrix(rho: np.ndarray, tol_trace=1e-10, tol_herm=1e-10, tol_psd=1e-9) -> None:
    """Raise ``ValueError`` naming the first violated density-matrix invariant."""
    tr = np.trace(rho)
    if abs(tr - 1) > tol_trace:
        raise ValueError(f"trace {tr}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol_herm:
        raise ValueError(f"hermiticity defect {herm}")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -tol_psd:
        raise ValueError(f"negative eigenvalue {lo}")


def dark_state(omega1: float, omega2: float) -> np.ndarray:
    """Normalised |d> proportional to omega2|g> - omega1|e>."""
    d = np.array([omega2, 0.0, -omega1], dtype=complex)
    return d / np.linalg.norm(d)


def pair_steady_state(params: DressingParams, omega2_at_x1: float, omega2_at_x2: float, v: float):
    """Convenience wrapper returning (rho, H) for the given local Rabi frequencies."""
    h = pair_hamiltonian(params, omega2_at_x1, omega2_at_x2, v)
    return steady_state(liouvillian(h, params)), h
