from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from rydlat import _kernels
from rydlat.quantum import jump_operators, pair_hamiltonian

from .conftest import scaled_params


@pytest.fixture
def numpy_only(monkeypatch):
    monkeypatch.setattr(_kernels, "_DISABLED", True)


def _random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def test_lindblad_paths_agree(rng):
    p = scaled_params(omega1=0.3)
    h = pair_hamiltonian(p, 2.1, 1.7, 50.0)
    jumps = jump_operators(p.gamma_p, p.gamma_e)
    a = _kernels.lindblad_numpy(h, jumps)
    if _kernels.NUMBA_AVAILABLE:
        b = _kernels._lindblad_jit(np.ascontiguousarray(h, dtype=complex), np.ascontiguousarray(jumps, dtype=complex))
        np.testing.assert_allclose(b, a, rtol=0, atol=1e-12 * np.abs(a).max())


def test_lindblad_dispatch_respects_flag(numpy_only, rng):
    h = _random_hermitian(rng, 3)
    jumps = jump_operators(0.1, 0.01, 1)
    assert not _kernels.use_numba()
    np.testing.assert_array_equal(_kernels.lindblad(h, jumps), _kernels.lindblad_numpy(h, jumps))


def test_rk4_paths_agree(rng):
    n = 40
    h = sp.random(n, n, density=0.1, random_state=3, format="csr")
    h = (h + h.T).tocsr().astype(complex)
    h.setdiag(rng.normal(size=n))
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    ref = _kernels.rk4_numpy(h.__matmul__, psi, 1e-3, 50)
    got = _kernels.rk4(h, psi, 1e-3, 50)
    np.testing.assert_allclose(got, ref, atol=1e-13)
    dense = _kernels.rk4(h.toarray(), psi, 1e-3, 50)
    np.testing.assert_allclose(dense, ref, atol=1e-13)


def test_rk4_numpy_path_when_disabled(numpy_only, rng):
    h = sp.identity(5, format="csr", dtype=complex)
    psi = np.ones(5, dtype=complex) / np.sqrt(5)
    out = _kernels.rk4(h, psi, 1e-2, 100)
    np.testing.assert_allclose(out, psi * np.exp(-1j * 1.0), atol=1e-9)


@pytest.mark.parametrize("value,expected", [("1", "False"), ("0", str(_kernels.NUMBA_AVAILABLE))])
def test_environment_flag_selects_path(value, expected):
    env = dict(os.environ, RYDLAT_DISABLE_NUMBA=value)
    out = subprocess.run(
        [sys.executable, "-c", "import rydlat._kernels as k; print(k.use_numba())"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == expected
