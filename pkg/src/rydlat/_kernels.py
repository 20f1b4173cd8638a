"""Hot inner loops, compiled with numba when available.

Set ``RYDLAT_DISABLE_NUMBA=1`` to force the pure-numpy path.  Both paths are
kept numerically equivalent; ``tests/test_kernels.py`` runs them side by side
and ``benchmarks/bench_kernels.py`` times them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
_DISABLED = os.environ.get("RYDLAT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


def use_numba() -> bool:
    return NUMBA_AVAILABLE and not _DISABLED


def _jit(fn):
    if not NUMBA_AVAILABLE:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# --- Lindblad superoperator -------------------------------------------------
#
# Row-major vectorisation: rho[k, l] -> vec[k * n + l], so that
# vec(A rho B) = kron(A, B.T) @ vec(rho).


def lindblad_numpy(h: np.ndarray, jumps: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    eye = np.eye(n)
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in jumps:
        cdc = c.conj().T @ c
        out += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    return out


def _lindblad_loops(h, jumps):
    n = h.shape[0]
    m = jumps.shape[0]
    out = np.zeros((n * n, n * n), dtype=np.complex128)
    cdc = np.zeros((m, n, n), dtype=np.complex128)
    for a in range(m):
        for i in range(n):
            for j in range(n):
                acc = 0j
                for q in range(n):
                    acc += np.conj(jumps[a, q, i]) * jumps[a, q, j]
                cdc[a, i, j] = acc
    for i in range(n):
        for j in range(n):
            row = i * n + j
            for k in range(n):
                for l in range(n):
                    col = k * n + l
                    val = 0j
                    if j == l:
                        val += -1j * h[i, k]
                    if i == k:
                        val += 1j * h[l, j]
                    for a in range(m):
                        val += jumps[a, i, k] * np.conj(jumps[a, j, l])
                        if j == l:
                            val -= 0.5 * cdc[a, i, k]
                        if i == k:
                            val -= 0.5 * cdc[a, l, j]
                    out[row, col] = val
    return out


_lindblad_jit = _jit(_lindblad_loops)


def lindblad(h: np.ndarray, jumps: np.ndarray) -> np.ndarray:
    h = np.ascontiguousarray(h, dtype=np.complex128)
    jumps = np.ascontiguousarray(jumps, dtype=np.complex128).reshape(-1, h.shape[0], h.shape[0])
    if use_numba():
        return _lindblad_jit(h, jumps)
    return lindblad_numpy(h, jumps)


# --- RK4 propagation of i d/dt psi = H psi on a CSR matrix -------------------


def _csr_matvec(indptr, indices, data, x, out):
    n = indptr.shape[0] - 1
    for i in range(n):
        acc = 0j
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc


_csr_matvec_jit = _jit(_csr_matvec)


def _rk4_csr_loops(indptr, indices, data, psi, h, nsteps):
    n = psi.shape[0]
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    y = psi.copy()
    mih = -1j * h
    for _ in range(nsteps):
        _csr_matvec_jit(indptr, indices, data, y, k1)
        for i in range(n):
            k1[i] *= mih
            tmp[i] = y[i] + 0.5 * k1[i]
        _csr_matvec_jit(indptr, indices, data, tmp, k2)
        for i in range(n):
            k2[i] *= mih
            tmp[i] = y[i] + 0.5 * k2[i]
        _csr_matvec_jit(indptr, indices, data, tmp, k3)
        for i in range(n):
            k3[i] *= mih
            tmp[i] = y[i] + k3[i]
        _csr_matvec_jit(indptr, indices, data, tmp, k4)
        for i in range(n):
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + mih * k4[i]) / 6.0
    return y


_rk4_csr_jit = _jit(_rk4_csr_loops)


def rk4_numpy(matvec, psi: np.ndarray, h: float, nsteps: int) -> np.ndarray:
    y = psi.copy()
    mih = -1j * h
    for _ in range(nsteps):
        k1 = mih * matvec(y)
        k2 = mih * matvec(y + 0.5 * k1)
        k3 = mih * matvec(y + 0.5 * k2)
        k4 = mih * matvec(y + k3)
        y = y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return y


def rk4(hmat, psi: np.ndarray, h: float, nsteps: int) -> np.ndarray:
    """Advance ``psi`` by ``nsteps`` RK4 steps of size ``h`` under ``hmat``.

    ``hmat`` is a dense ndarray or a scipy CSR matrix.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if isinstance(hmat, np.ndarray):
        return rk4_numpy(hmat.__matmul__, psi, h, nsteps)
    if use_numba():
        data = np.ascontiguousarray(hmat.data, dtype=np.complex128)
        return _rk4_csr_jit(hmat.indptr.astype(np.int64), hmat.indices.astype(np.int64), data, psi, float(h), int(nsteps))
    return rk4_numpy(hmat.__matmul__, psi, h, nsteps)
