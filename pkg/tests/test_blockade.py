from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from rydlat import blockade as bk
from rydlat.errors import AsymmetricCoupling, DuplicateLabel, ManifoldError, ParseError, StepTooLarge
from rydlat.params import TWO_PI

C3 = TWO_PI * 3e-9


@pytest.fixture(scope="module")
def big():
    return bk.synth_manifold(7, 3800, TWO_PI * 1e9, C3, 0.99)


def _write(tmp_path, text):
    p = tmp_path / "m.csv"
    p.write_text(text)
    return p


# --- file format -------------------------------------------------------------------


def test_load_single_state(tmp_path):
    m = bk.load_manifold(_write(tmp_path, "label,delta_rad_per_s\nr0r0,0\n"))
    assert m.n_states == 1 and m.labels == ("r0r0",)


def test_load_rejects_asymmetric(tmp_path):
    text = "r0r0,0\na,1e9\n# couplings\nr0r0,a,1.0\na,r0r0,2.0\n"
    with pytest.raises(AsymmetricCoupling):
        bk.load_manifold(_write(tmp_path, text))


def test_load_mirrors_one_sided_coupling(tmp_path):
    m = bk.load_manifold(_write(tmp_path, "r0r0,0\na,1e9\n# couplings\nr0r0,a,2.5\n"))
    assert m.couplings[0, 1] == m.couplings[1, 0] == 2.5


@pytest.mark.parametrize(
    "text,err,line",
    [
        ("r0r0,0\nr0r0,1\n", DuplicateLabel, None),
        ("r0r0,0\na,b,c\n", ParseError, 2),
        ("r0r0,0\na,fast\n", ParseError, 2),
        ("r0r0,0\n# couplings\nr0r0,x,1\n", ParseError, 3),
        ("a,1\n", ParseError, 1),
        ("", ParseError, 0),
    ],
)
def test_load_errors(tmp_path, text, err, line):
    with pytest.raises(err) as exc:
        bk.load_manifold(_write(tmp_path, text))
    if line is not None:
        assert exc.value.line == line
    assert isinstance(exc.value, ManifoldError)


def test_round_trip_large(tmp_path, big):
    p = tmp_path / "big.csv"
    bk.save_manifold(big, p)
    back = bk.load_manifold(p)
    assert back.labels == big.labels
    np.testing.assert_array_equal(back.detunings, big.detunings)
    assert abs(back.couplings - big.couplings).max() == 0


def test_manifold_validation():
    with pytest.raises(ManifoldError):
        bk.PairManifold(("a",), [1.0], sp.csr_matrix((1, 1)))
    with pytest.raises(AsymmetricCoupling):
        bk.PairManifold(("a", "b"), [0.0, 1.0], sp.csr_matrix(np.array([[0, 1.0], [2.0, 0]])))


# --- synthetic manifolds -----------------------------------------------------------


def test_synth_trivial():
    m = bk.synth_manifold(0, 1, 1.0, 1.0, 0.99)
    assert m.n_states == 1 and m.couplings.nnz == 0


def test_synth_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    bk.save_manifold(bk.synth_manifold(3, 300, 1e9, 1.0, 0.9), a)
    bk.save_manifold(bk.synth_manifold(3, 300, 1e9, 1.0, 0.9), b)
    assert a.read_bytes() == b.read_bytes()
    bk.save_manifold(bk.synth_manifold(4, 300, 1e9, 1.0, 0.9), b)
    assert a.read_bytes() != b.read_bytes()


def test_synth_statistics(big):
    assert big.nonzero_fraction() == pytest.approx(0.01, abs=0.002)
    assert np.std(big.detunings[1:]) == pytest.approx(TWO_PI * 1e9, rel=0.1)
    off = sp.triu(big.couplings, 1).data
    assert np.std(off) == pytest.approx(C3, rel=0.1)
    assert big.detunings[0] == 0


# --- Hamiltonian -------------------------------------------------------------------


def test_single_state_ladder():
    m = bk.synth_manifold(0, 1, 1.0, 1.0, 0.0)
    h = bk.mixing_hamiltonian(m, 1e-6, 2.0).toarray()
    s = 2.0 / math.sqrt(2)
    np.testing.assert_allclose(h, [[0, s, 0], [s, 0, s], [0, s, 0]])
    hc = bk.mixing_hamiltonian(m, 1e-6, 2.0, convention="collective").toarray()
    assert hc[0, 1] == pytest.approx(2.0 * math.sqrt(2))
    with pytest.raises(ValueError):
        bk.mixing_hamiltonian(m, 0.0, 1.0)


def test_dipolar_cubic_law():
    m = bk.PairManifold(("r0r0", "a"), [0.0, 5.0], sp.csr_matrix(np.array([[0, 3.0], [3.0, 0]])))
    h1 = bk.mixing_hamiltonian(m, 1.0, 0.0)
    h2 = bk.mixing_hamiltonian(m, 2 ** (1 / 3), 0.0)
    assert h2[2, 3] == pytest.approx(h1[2, 3] / 2, rel=1e-14)
    assert h1[3, 3] == 5.0


def test_large_hamiltonian_hermitian(big):
    h = bk.mixing_hamiltonian(big, 1e-6, TWO_PI * 1e5)
    assert h.shape == (3802, 3802)
    assert abs(h - h.conj().T).max() == 0


# --- dynamics ----------------------------------------------------------------------


def test_resonant_ladder_full_cycling():
    m = bk.synth_manifold(0, 1, 1.0, 1.0, 0.0)
    om = 1.0
    h = bk.mixing_hamiltonian(m, 1.0, om)
    t = np.linspace(0, 4 * math.pi / om * math.sqrt(2), 400)
    tr = bk.evolve(h, t_final=t[-1], dt=0.01, n_out=399)
    exact = bk.exact_propagate(h, np.eye(3)[0], tr.times)
    np.testing.assert_allclose(tr.populations, exact, atol=1e-8)
    # eigenvalues 0, +-omega: complete transfer to the pair state at t = pi / omega
    assert bk.exact_propagate(h, np.eye(3)[0], [math.pi / om])[0, 2] == pytest.approx(1.0, abs=1e-12)
    assert tr.leakage_max > 0.999


def test_strong_shift_suppresses_leakage():
    m = bk.synth_manifold(0, 1, 1.0, 1.0, 0.0)
    om = 1.0
    t = np.linspace(0, 40 * math.pi, 4000)
    leaks = []
    for v in (50.0, 100.0, 200.0):
        h = bk.mixing_hamiltonian(m, 1.0, om, target_shift=v)
        leaks.append(bk.spectral_leakage(h, t).max())
    for v, leak in zip((50.0, 100.0, 200.0), leaks):
        # second-order admixture of r0r0 into r0g+: (omega_t / sqrt(2) / v)^2, at most doubled by beating
        est = (om / math.sqrt(2) / v) ** 2
        assert est / 2 <= leak <= 2 * 2 * est
    assert leaks[0] / leaks[1] == pytest.approx(4.0, rel=0.1)


def test_zero_drive_freezes_populations():
    m = bk.synth_manifold(1, 10, 1e3, 1e2, 0.5)
    tr = bk.evolve(bk.mixing_hamiltonian(m, 1.0, 0.0), t_final=1.0, dt=1e-3, n_out=10)
    np.testing.assert_allclose(tr.populations[:, 0], 1.0, atol=1e-14)
    assert tr.leakage_max < 1e-28


def _random_small(seed, n):
    return bk.synth_manifold(seed, n, 20.0, 10.0, 0.8)


@pytest.mark.parametrize("n", [1, 5, 20, 50])
def test_evolve_matches_exact(n):
    m = _random_small(n, n)
    h = bk.mixing_hamiltonian(m, 1.3, 2.0)
    tr = bk.evolve(h, t_final=5.0, dt=1e-3, n_out=50, tol=1e-11)
    exact = bk.exact_propagate(h, np.eye(n + 2)[0], tr.times)
    assert np.abs(tr.populations - exact).max() <= 1e-8
    assert tr.norm_drift <= 1e-8
    np.testing.assert_allclose(bk.spectral_leakage(h, tr.times), exact[:, 2:].sum(axis=1), atol=1e-10)


def test_evolve_sparse_path_conserves_norm_and_energy(big):
    h = bk.mixing_hamiltonian(big, 2e-6, TWO_PI * 1e5)
    assert h.shape[0] > bk.DENSE_LIMIT
    psi0 = np.zeros(h.shape[0], dtype=complex)
    psi0[0] = 1
    psi0[1] = 1
    psi0 /= np.linalg.norm(psi0)
    tr = bk.evolve(h, psi0, t_final=1e-10, dt=1e-13, n_out=2, tol=1e-10)
    assert tr.norm_drift <= 1e-8
    from rydlat import _kernels

    op = sp.csr_matrix(h, dtype=complex)
    out = _kernels.rk4(op, psi0, tr.dt_used, int(round(1e-10 / tr.dt_used)))
    e0 = float((psi0.conj() @ (op @ psi0)).real)
    e1 = float((out.conj() @ (op @ out)).real)
    assert abs(e1 - e0) <= 1e-8 * abs(h).sum(axis=1).max()


def test_energy_conservation_dense():
    m = _random_small(3, 30)
    h = bk.mixing_hamiltonian(m, 1.1, 3.0).toarray()
    psi = np.zeros(32, dtype=complex)
    psi[0] = 1
    e0 = float((psi.conj() @ h @ psi).real)
    from rydlat import _kernels

    out = _kernels.rk4(h.astype(complex), psi, 1e-4, 20000)
    e1 = float((out.conj() @ h @ out).real)
    scale = np.abs(h).max()
    assert abs(e1 - e0) <= 1e-8 * scale


def test_step_too_large():
    m = _random_small(2, 5)
    h = bk.mixing_hamiltonian(m, 0.2, 5.0)
    # accepting every step (huge tol) with dt far above 1/|H| lets the norm run away
    with pytest.raises(StepTooLarge, match="norm drift"):
        bk.evolve(h, t_final=1.0, dt=1.0, n_out=1, tol=1e30)
    with pytest.raises(StepTooLarge, match="steps per output"):
        bk.evolve(h, t_final=1.0, dt=1.0, n_out=1, tol=1e-30, max_substeps=1 << 10)


@given(s=st.floats(0.1, 10.0), seed=st.integers(0, 50))
def test_leakage_scaling_invariance(s, seed):
    m = _random_small(seed, 8)
    t = np.linspace(0, 3.0, 60)
    h = bk.mixing_hamiltonian(m, 1.0, 2.0)
    ms = bk.PairManifold(m.labels, s * m.detunings, s * m.couplings)
    hs = bk.mixing_hamiltonian(ms, 1.0, 2.0 * s)
    np.testing.assert_allclose(bk.spectral_leakage(hs, t / s), bk.spectral_leakage(h, t), atol=1e-9)


def test_leakage_scan_limits(big, ref):
    scan = bk.leakage_scan(big, ref, [1.59e-7, 1e-4], n_samples=500)
    assert scan[0][1] < 1e-2
    assert scan[1][1] > 0.99
    with pytest.raises(ValueError):
        bk.leakage_scan(big, ref, [0.0])


def test_leakage_scan_rk4_agrees_with_spectral(ref):
    m = _random_small(5, 20)
    m = bk.PairManifold(m.labels, m.detunings * 1e4, m.couplings * 1e-14)
    r = [3e-6, 3e-5]
    a = bk.leakage_scan(m, ref, r, n_samples=201)
    b = bk.leakage_scan(m, ref, r, n_samples=201, method="rk4")
    np.testing.assert_allclose([x[1] for x in a], [x[1] for x in b], atol=1e-7)
