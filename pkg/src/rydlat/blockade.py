"""Blockade leakage through a manifold of dipole-coupled Rydberg pair states.

Basis of the mixing Hamiltonian: index 0 is |gg>, index 1 the symmetric
single excitation |r0 g+>, and index 2 + i the i-th pair state of the
manifold.  The laser ladder drives gg -> r0g+ -> r0r0; dipolar terms C3/R^3
couple pair states among themselves.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import AsymmetricCoupling, DuplicateLabel, ManifoldError, ParseError, StepTooLarge
from .params import TWO_PI, DressingParams

GG, R0G = 0, 1
DENSE_LIMIT = 200


@dataclass
class PairManifold:
    """Pair states with detunings (rad/s) and a symmetric sparse C3 matrix (rad/s m^3)."""

    labels: tuple
    detunings: np.ndarray
    couplings: sp.csr_matrix
    r0_index: int = 0

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.couplings = sp.csr_matrix(self.couplings, dtype=float)
        n = len(self.labels)
        if n < 1:
            raise ManifoldError("a manifold needs at least one state")
        if len(set(self.labels)) != n:
            raise DuplicateLabel("pair-state labels must be unique")
        if self.detunings.shape != (n,) or self.couplings.shape != (n, n):
            raise ManifoldError("detunings and couplings do not match the number of labels")
        if not 0 <= self.r0_index < n:
            raise ManifoldError("r0_index out of range")
        if self.detunings[self.r0_index] != 0:
            raise ManifoldError("the target pair must have zero detuning")
        if abs(self.couplings - self.couplings.T).max() > 0:
            raise AsymmetricCoupling("coupling matrix is not symmetric")

    @property
    def n_states(self) -> int:
        return len(self.labels)

    def nonzero_fraction(self) -> float:
        n = self.n_states
        if n < 2:
            return 0.0
        off = self.couplings.copy()
        off.setdiag(0)
        off.eliminate_zeros()
        return off.nnz / (n * (n - 1))


# --- file format -------------------------------------------------------------


def load_manifold(path) -> PairManifold:
    """Read the two-section CSV written by :func:`save_manifold`.

    The first data row is the target pair.  Couplings listed in one direction
    only are mirrored; if both directions are listed they must agree.
    """
    labels, dets, entries = [], [], {}
    section = "states"
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                if s.lstrip("#").strip().lower() == "couplings":
                    section = "couplings"
                continue
            row = next(csv.reader([s]))
            if section == "states":
                if row[:2] == ["label", "delta_rad_per_s"]:
                    continue
                if len(row) != 2:
                    raise ParseError(lineno, f"expected 2 fields, got {len(row)}")
                try:
                    d = float(row[1])
                except ValueError:
                    raise ParseError(lineno, f"bad detuning {row[1]!r}") from None
                if row[0] in labels:
                    raise DuplicateLabel(f"line {lineno}: label {row[0]!r} repeated")
                labels.append(row[0])
                dets.append(d)
            else:
                if row[:3] == ["label_i", "label_j", "c3_rad_per_s_m3"]:
                    continue
                if len(row) != 3:
                    raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
                try:
                    c = float(row[2])
                except ValueError:
                    raise ParseError(lineno, f"bad coupling {row[2]!r}") from None
                key = (row[0], row[1])
                if key in entries:
                    raise ParseError(lineno, f"coupling {key} repeated")
                entries[key] = (c, lineno)
    if not labels:
        raise ParseError(0, "no pair states")
    if dets[0] != 0:
        raise ParseError(1, "the first pair state is the target and must have zero detuning")
    index = {lab: i for i, lab in enumerate(labels)}
    rows, cols, vals = [], [], []
    for (a, b), (c, lineno) in entries.items():
        if a not in index or b not in index:
            raise ParseError(lineno, f"unknown label in coupling ({a}, {b})")
        rev = entries.get((b, a))
        if rev is not None and rev[0] != c:
            raise AsymmetricCoupling(f"coupling({a},{b}) = {c} but coupling({b},{a}) = {rev[0]}")
        i, j = index[a], index[b]
        rows.append(i)
        cols.append(j)
        vals.append(c)
        if rev is None and i != j:
            rows.append(j)
            cols.append(i)
            vals.append(c)
    n = len(labels)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return PairManifold(tuple(labels), np.array(dets), mat, 0)


def save_manifold(m: PairManifold, path) -> None:
    """Write states (target first) and the upper triangle of the couplings."""
    order = [m.r0_index] + [i for i in range(m.n_states) if i != m.r0_index]
    upper = sp.triu(m.couplings).tocoo()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("label,delta_rad_per_s\n")
        for i in order:
            fh.write(f"{m.labels[i]},{m.detunings[i]:.17g}\n")
        fh.write("# couplings\nlabel_i,label_j,c3_rad_per_s_m3\n")
        for i, j, c in sorted(zip(upper.row, upper.col, upper.data)):
            fh.write(f"{m.labels[i]},{m.labels[j]},{c:.17g}\n")


def synth_manifold(seed: int, n_states: int, detuning_scale: float, coupling_scale: float, sparsity: float) -> PairManifold:
    """Random manifold standing in for real pair-state data.

    Detunings are normal with standard deviation ``detuning_scale`` (the target
    is pinned to 0); exactly ``round((1 - sparsity) * n (n - 1) / 2)`` upper
    triangle couplings are drawn, normal with standard deviation
    ``coupling_scale``, and mirrored.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if not 0 <= sparsity <= 1:
        raise ValueError("sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    dets = rng.normal(0.0, detuning_scale, n_states)
    dets[0] = 0.0
    n_pairs = n_states * (n_states - 1) // 2
    nnz = int(round((1 - sparsity) * n_pairs))
    flat = np.sort(rng.choice(n_pairs, size=nnz, replace=False)) if nnz else np.zeros(0, dtype=np.int64)
    # unrank flat upper-triangle indices (row-major, i < j)
    starts = np.cumsum(np.r_[0, np.arange(n_states - 1, 0, -1)])
    i = np.searchsorted(starts, flat, side="right") - 1
    j = flat - starts[i] + i + 1
    c = rng.normal(0.0, coupling_scale, nnz)
    mat = sp.coo_matrix((np.r_[c, c], (np.r_[i, j], np.r_[j, i])), shape=(n_states, n_states)).tocsr()
    labels = tuple(["r0r0"] + [f"p{k}" for k in range(1, n_states)])
    return PairManifold(labels, dets, mat, 0)


# --- dynamics ----------------------------------------------------------------


def effective_rabi(params: DressingParams) -> float:
    """Two-photon Rabi frequency omega1 omega2c / (2|delta|)."""
    return params.omega1 * params.omega2c / (2 * abs(params.delta))


def mixing_hamiltonian(manifold: PairManifold, r: float, omega_t: float, convention: str = "printed", target_shift: float = 0.0) -> sp.csr_matrix:
    """Sparse Hamiltonian on (gg, r0g+, pair states).

    ``convention="printed"`` puts omega_t/sqrt(2) on both ladder links;
    ``"collective"`` uses sqrt(2) omega_t on gg -> r0g+ instead.
    ``target_shift`` adds a diagonal shift on the target pair.
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    first = {"printed": omega_t / math.sqrt(2), "collective": math.sqrt(2) * omega_t}.get(convention)
    if first is None:
        raise ValueError(f"unknown convention {convention!r}")
    n = manifold.n_states
    t0 = 2 + manifold.r0_index
    dip = (manifold.couplings / r**3).tocoo()
    diag = np.r_[0.0, 0.0, manifold.detunings]
    diag[t0] += target_shift
    rows = np.r_[np.arange(n + 2), GG, R0G, R0G, t0, dip.row + 2]
    cols = np.r_[np.arange(n + 2), R0G, GG, t0, R0G, dip.col + 2]
    vals = np.r_[diag, first, first, omega_t / math.sqrt(2), omega_t / math.sqrt(2), dip.data]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n + 2, n + 2))


@dataclass
class LeakageTrace:
    times: np.ndarray
    populations: np.ndarray
    leakage_max: float
    norm_drift: float = 0.0
    dt_used: float = float("nan")

    @property
    def leakage(self) -> np.ndarray:
        """Population outside gg and r0g+ at each output time."""
        return self.populations[:, 2:].sum(axis=1)


def _as_operator(h):
    if sp.issparse(h):
        return h.toarray() if h.shape[0] < DENSE_LIMIT else sp.csr_matrix(h, dtype=complex)
    return np.asarray(h, dtype=complex)


def evolve(
    h,
    psi0=None,
    t_final: float = 1.0,
    dt: float = 1e-3,
    n_out: int = 200,
    tol: float = 1e-10,
    norm_tol: float = 1e-6,
    max_substeps: int = 1 << 20,
) -> LeakageTrace:
    """RK4 propagation of i dpsi/dt = H psi with step-halving error control.

    Each output interval is integrated with step ``dt`` and with ``dt/2``;
    while the two disagree by more than ``tol`` the step is halved.  The
    finer result is kept.  Raises :class:`StepTooLarge` if the norm drifts by
    more than ``norm_tol`` or if one output interval would need more than
    ``max_substeps`` steps.
    """
    op = _as_operator(h)
    n = op.shape[0]
    if psi0 is None:
        psi0 = np.zeros(n, dtype=complex)
        psi0[GG] = 1.0
    psi = np.array(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > 1e-12:
        raise ValueError("psi0 must be normalised")
    times = np.linspace(0.0, t_final, n_out + 1)
    span = times[1] - times[0]
    pops = np.empty((n_out + 1, n))
    pops[0] = np.abs(psi) ** 2
    step = dt
    for k in range(1, n_out + 1):
        while True:
            m = max(1, math.ceil(span / step - 1e-9))
            coarse = _kernels.rk4(op, psi, span / m, m)
            fine = _kernels.rk4(op, psi, span / (2 * m), 2 * m)
            if np.abs(fine - coarse).max() <= tol:
                break
            step = span / (2 * m)
            if 2 * m > max_substeps:
                raise StepTooLarge(f"step-size control needs more than {max_substeps} steps per output interval")
        psi = fine
        drift = abs(np.linalg.norm(psi) - 1)
        if drift > norm_tol:
            raise StepTooLarge(f"norm drift {drift:.3e} exceeds {norm_tol:.1e}")
        pops[k] = np.abs(psi) ** 2
    drift = float(np.abs(pops.sum(axis=1) - 1).max())
    leak = pops[:, 2:].sum(axis=1) if n > 2 else np.zeros(n_out + 1)
    return LeakageTrace(times, pops, float(leak.max()), drift, span / (2 * m))


def exact_propagate(h, psi0, times) -> np.ndarray:
    """Populations from dense eigendecomposition, rows indexed by time."""
    hd = h.toarray() if sp.issparse(h) else np.asarray(h)
    w, v = np.linalg.eigh(hd)
    c = v.conj().T @ np.asarray(psi0, dtype=complex)
    amp = v @ (c[:, None] * np.exp(-1j * np.outer(w, times)))
    return (np.abs(amp) ** 2).T


def spectral_leakage(h, times) -> np.ndarray:
    """Leakage 1 - P(gg) - P(r0g+) starting from |gg>, from the exact spectrum of ``h``.

    Only the gg and r0g+ components of the eigenvectors are needed.
    """
    hd = h.toarray() if sp.issparse(h) else np.asarray(h)
    if np.iscomplexobj(hd) and np.abs(hd.imag).max() == 0:
        hd = hd.real
    w, v = np.linalg.eigh(hd)
    a = v[GG].conj() * v[GG]
    b = v[R0G].conj() * v[GG]
    ph = np.exp(-1j * np.outer(times, w))
    c0 = ph @ a
    c1 = ph @ b
    return 1.0 - np.abs(c0) ** 2 - np.abs(c1) ** 2


def default_window(omega_t: float, periods: float = 10.0) -> float:
    return periods * TWO_PI / omega_t


def leakage_scan(
    manifold: PairManifold,
    params: DressingParams,
    r_values,
    window: float | None = None,
    n_samples: int = 2000,
    convention: str = "printed",
    method: str = "spectral",
    dt: float | None = None,
) -> list[tuple[float, float]]:
    """Maximum pair-state population over the window at each distance."""
    omega_t = effective_rabi(params)
    window = default_window(omega_t) if window is None else window
    times = np.linspace(0.0, window, n_samples)
    out = []
    for r in r_values:
        if not r > 0:
            raise ValueError("r values must be > 0")
        h = mixing_hamiltonian(manifold, float(r), omega_t, convention)
        if method == "spectral":
            leak = float(spectral_leakage(h, times).max())
        elif method == "rk4":
            step = dt if dt is not None else 0.05 / max(abs(h).sum(axis=1).max(), omega_t)
            leak = evolve(h, t_final=window, dt=step, n_out=n_samples - 1).leakage_max
        else:
            raise ValueError(f"unknown method {method!r}")
        out.append((float(r), leak))
    return out
