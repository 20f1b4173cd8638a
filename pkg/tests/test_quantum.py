from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from rydlat.errors import DegenerateSteadyState, DimensionMismatch
from rydlat.params import E, G, P
from rydlat.quantum import (
    EE,
    SWAP,
    check_density_matrix,
    dark_state,
    expectation,
    liouvillian,
    on_atom,
    pair_hamiltonian,
    pair_steady_state,
    partial_trace,
    sigma,
    single_hamiltonian,
    steady_state,
    trace_distance,
    unvec,
    vec,
)

from .conftest import MHZ, scaled_params


def _random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def _random_density(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = a @ a.conj().T
    return r / np.trace(r)


# --- Hamiltonians ------------------------------------------------------------


def test_single_hamiltonian_couplings_off(ref):
    p = ref.with_(omega1=0.0, delta=10 * MHZ)
    np.testing.assert_array_equal(single_hamiltonian(p, 0.0), np.diag([0, -10 * MHZ, 0]))


def test_single_hamiltonian_node_coupling(ref):
    h = single_hamiltonian(ref, ref.omega2c)
    assert h[P, E] == pytest.approx(5 * MHZ, rel=1e-15)
    assert h[G, P] == pytest.approx(ref.omega1 / 2)
    assert h[P, P] == -ref.delta


def test_single_hamiltonian_eigenvalues():
    d = 5 * MHZ
    p = scaled_params(omega1=0.0, delta=d)
    w = np.linalg.eigvalsh(single_hamiltonian(p, 2 * d))
    expected = np.sort([0.0, d * (-1 - math.sqrt(5)) / 2, d * (-1 + math.sqrt(5)) / 2])
    np.testing.assert_allclose(w, expected, rtol=1e-12, atol=1e-6)


def test_pair_hamiltonian_separable_limit():
    p = scaled_params(omega1=0.3)
    h = pair_hamiltonian(p, 1.9, 2.3, 0.0)
    w1 = np.linalg.eigvalsh(single_hamiltonian(p, 1.9))
    w2 = np.linalg.eigvalsh(single_hamiltonian(p, 2.3))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), np.sort(np.add.outer(w1, w2).ravel()), atol=1e-12)


def test_pair_hamiltonian_interaction_entry():
    p = scaled_params(omega1=0.3)
    assert pair_hamiltonian(p, 1.0, 2.0, 37.5)[EE, EE] == 37.5


def test_pair_hamiltonian_swap_covariance():
    p = scaled_params(omega1=0.3)
    a = pair_hamiltonian(p, 1.3, 2.7, 4.0)
    b = pair_hamiltonian(p, 2.7, 1.3, 4.0)
    np.testing.assert_allclose(SWAP @ a @ SWAP.T, b, atol=1e-15)
    assert np.abs(a - a.conj().T).max() <= 1e-12 * np.abs(a).max()


# --- Liouvillian -------------------------------------------------------------


def test_liouvillian_preserves_trace(rng):
    p = scaled_params(omega1=0.2)
    l = liouvillian(pair_hamiltonian(p, 2.0, 2.2, 10.0), p)
    assert l.shape == (81, 81)
    for _ in range(100):
        rho = _random_hermitian(rng, 9)
        assert abs(np.trace(unvec(l @ vec(rho)))) < 1e-12


def test_liouvillian_unitary_limit():
    p = scaled_params(omega1=0.2)
    h = pair_hamiltonian(p, 2.0, 1.5, 3.0)
    l = liouvillian(h, gamma_p=0.0, gamma_e=0.0)
    assert np.abs(np.linalg.eigvals(l).real).max() < 1e-10
    np.testing.assert_allclose(l, -1j * (np.kron(h, np.eye(9)) - np.kron(np.eye(9), h.T)))


def test_vectorization_round_trip(rng):
    rho = _random_density(rng, 9)
    np.testing.assert_array_equal(unvec(vec(rho)), rho)
    a, b = _random_hermitian(rng, 9), _random_hermitian(rng, 9)
    np.testing.assert_allclose(vec(a @ rho @ b), np.kron(a, b.T) @ vec(rho), atol=1e-12)


def test_liouvillian_matches_direct_action(rng):
    p = scaled_params(omega1=0.4, gamma_p=0.3, gamma_e=0.05)
    h = pair_hamiltonian(p, 1.2, 2.5, 7.0)
    rho = _random_density(rng, 9)
    direct = -1j * (h @ rho - rho @ h)
    for a in (0, 1):
        for c in (math.sqrt(p.gamma_p) * sigma(G, P), math.sqrt(p.gamma_e) * sigma(P, E)):
            c = on_atom(c, a)
            cdc = c.conj().T @ c
            direct += c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)
    np.testing.assert_allclose(unvec(liouvillian(h, p) @ vec(rho)), direct, atol=1e-12)


# --- steady state ------------------------------------------------------------


def test_steady_state_without_drive_is_ground():
    p = scaled_params(omega1=0.0)
    rho, _ = pair_steady_state(p, 2.0, 2.0, 100.0)
    target = np.zeros((9, 9))
    target[0, 0] = 1
    np.testing.assert_allclose(rho, target, atol=1e-14)


def _dark_infidelity(p, o2):
    rho, _ = pair_steady_state(p, o2, o2, 0.0)
    d = dark_state(p.omega1, o2)
    dd = np.kron(d, d)
    return 1 - float((dd.conj() @ rho @ dd).real)


@pytest.mark.parametrize("o1", [0.005, 0.02, 0.08])
def test_steady_state_follows_dark_state(o1):
    # ideal limit: without decay out of e the dark product state is exact
    p = scaled_params(omega1=o1, delta=1.0, gamma_p=0.05, gamma_e=0.0)
    assert _dark_infidelity(p, 2.0) < 10 * (o1 / 2.0) ** 4


@pytest.mark.parametrize("o1", [0.005, 0.02, 0.08])
def test_dark_state_infidelity_from_upper_decay(o1):
    # decay of the small e admixture costs about 4 (omega1/omega2)^2 gamma_e/gamma_p
    p = scaled_params(omega1=o1, delta=1.0, gamma_p=0.05, gamma_e=1e-3)
    est = 4 * (o1 / 2.0) ** 2 * p.gamma_e / p.gamma_p
    assert 0.5 * est < _dark_infidelity(p, 2.0) < 2 * est


def test_steady_state_matches_long_time_propagation():
    p = scaled_params(omega1=0.1, delta=1.0, gamma_p=0.05, gamma_e=0.01)
    rho, h = pair_steady_state(p, 1.8, 2.1, 20.0)
    l = liouvillian(h, p)
    rho0 = np.zeros((9, 9), dtype=complex)
    rho0[0, 0] = 1
    rho_t = unvec(sla.expm(l * (100 / p.gamma_p)) @ vec(rho0))
    assert trace_distance(rho_t, rho) <= 1e-6


def test_steady_state_residual_bound(ref):
    rho, h = pair_steady_state(ref, ref.omega2c, 1.1 * ref.omega2c, ref.v_max)
    l = liouvillian(h, ref)
    assert np.abs(l @ vec(rho)).max() <= 1e-10 * np.abs(l).sum(axis=1).max()
    check_density_matrix(rho)


def test_degenerate_steady_state_reports_both_values():
    p = scaled_params(omega1=0.3)
    l = liouvillian(pair_hamiltonian(p, 2.0, 2.0, 5.0), gamma_p=0.0, gamma_e=0.0)
    with pytest.raises(DegenerateSteadyState) as exc:
        steady_state(l)
    assert exc.value.sigma_small <= exc.value.sigma_next


@given(
    log_ratio=st.floats(-3.0, 0.0),
    log_v=st.floats(-1.0, 2.0),
    a=st.floats(0.5, 3.0),
    b=st.floats(0.5, 3.0),
    sign=st.sampled_from([-1.0, 1.0]),
)
def test_steady_state_invariants_property(log_ratio, log_v, a, b, sign):
    p = scaled_params(omega1=10**log_ratio * a, delta=sign, gamma_p=1e-2, gamma_e=1e-3)
    rho, h = pair_steady_state(p, a, b, 10**log_v)
    check_density_matrix(rho)
    l = liouvillian(h, p)
    assert np.abs(l @ vec(rho)).max() <= 1e-10 * np.abs(l).sum(axis=1).max()
    rho_s, _ = pair_steady_state(p, b, a, 10**log_v)
    np.testing.assert_allclose(SWAP @ rho @ SWAP.T, rho_s, atol=1e-9)


@given(
    o1=st.floats(1e-3, 1.0),
    a=st.floats(0.1, 3.0),
    b=st.floats(0.1, 3.0),
    v=st.floats(0.0, 1e3),
    gp=st.floats(1e-3, 0.5),
    ge=st.floats(0.0, 0.1),
)
def test_liouvillian_spectrum_has_no_growth(o1, a, b, v, gp, ge):
    p = scaled_params(omega1=o1, gamma_p=gp, gamma_e=ge)
    w = np.linalg.eigvals(liouvillian(pair_hamiltonian(p, a, b, v), p))
    assert w.real.max() <= 1e-10 * max(1.0, v)


# --- expectation and partial trace -------------------------------------------


def test_expectation_examples(rng):
    gg = np.zeros((9, 9))
    gg[0, 0] = 1
    assert expectation(gg, on_atom(sigma(P, P), 0)) == 0
    rho = _random_density(rng, 9)
    assert expectation(rho, np.eye(9)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        expectation(rho, np.eye(3))


def test_expectation_of_hamiltonian_is_real(rng):
    p = scaled_params(omega1=0.2)
    rho, h = pair_steady_state(p, 1.5, 2.5, 3.0)
    assert abs(expectation(rho, h).imag) < 1e-10 * np.abs(h).max()


def test_partial_trace_of_product(rng):
    a, b = _random_density(rng, 3), _random_density(rng, 3)
    rho = np.kron(a, b)
    np.testing.assert_allclose(partial_trace(rho, 0), a, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, 1), b, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        partial_trace(a, 0)


def test_partial_trace_population_two_routes(rng):
    p = scaled_params(omega1=0.3, gamma_p=0.1)
    rho, _ = pair_steady_state(p, 1.7, 2.6, 8.0)
    for atom in (0, 1):
        r = partial_trace(rho, atom)
        assert np.trace(r).real == pytest.approx(1.0, abs=1e-12)
        check_density_matrix(r)
        direct = expectation(rho, on_atom(sigma(P, P), atom)).real
        assert r[P, P].real == pytest.approx(direct, abs=1e-14)
