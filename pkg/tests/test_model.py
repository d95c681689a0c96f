import math

import numpy as np
import pytest

from qfi_twoqubit.linalg import hermitian_eig, is_density_matrix, max_abs, partial_trace_over_A
from qfi_twoqubit.model import (
    InitialStateParams,
    ModelParams,
    analytic_eigensystem,
    analytic_state,
    build_hamiltonian,
    build_initial_state,
    evolve_numeric,
    liouvillian,
    lindblad_rhs,
    reduced_state_B,
    x_state_leakage,
)

EE, EG, GE, GG = np.eye(4)


def proj(v):
    return np.outer(v, v.conj())


def test_hamiltonian_zero_coupling():
    assert max_abs(build_hamiltonian(0.0)) == 0


def test_hamiltonian_half_coupling_entries():
    # (v/2)(S_A+ S_B- + h.c.) expanded in |ee>,|eg>,|ge>,|gg>
    h = build_hamiltonian(1.0, prefactor=0.5)
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 0.5
    assert max_abs(h - expected) == 0


def test_hamiltonian_default_prefactor_is_one():
    assert build_hamiltonian(1.0)[1, 2] == 1.0


@pytest.mark.parametrize("v", [0.3, -2.0])
def test_hamiltonian_annihilates_aligned_states(v):
    h = build_hamiltonian(v)
    assert max_abs(h @ EE) == 0 and max_abs(h @ GG) == 0
    assert max_abs(h - h.conj().T) == 0


def test_initial_state_a0_chi0_spectrum():
    rho = build_initial_state(InitialStateParams(0.0, 0.0))
    assert np.allclose(hermitian_eig(rho).eigenvalues, [0, 0, 1 / 3, 2 / 3], atol=1e-15)


def test_initial_state_a1_chi_half_pi():
    rho = build_initial_state(InitialStateParams(1.0, math.pi / 2))
    assert np.allclose(np.diag(rho), [1 / 3, 1 / 3, 1 / 3, 0])
    assert abs(rho[1, 2] - 1j / 3) < 1e-16


@pytest.mark.parametrize("a,chi", [(0.0, 0.0), (0.4, 2.5), (1.0, -1.0)])
def test_initial_state_valid(a, chi):
    assert is_density_matrix(build_initial_state(InitialStateParams(a, chi)))


@pytest.mark.parametrize("a", [-0.1, 1.0001])
def test_initial_state_rejects_a(a):
    with pytest.raises(ValueError, match="a must"):
        InitialStateParams(a, 0.0)


def test_rhs_ground_state_is_steady():
    assert max_abs(lindblad_rhs(proj(GG), ModelParams(0.7, 0.3, 0.5))) == 0


def test_rhs_doubly_excited():
    g = 0.37
    rhs = lindblad_rhs(proj(EE), ModelParams.equal_rates(1.3, g))
    expected = -2 * g * proj(EE) + g * proj(EG) + g * proj(GE)
    assert max_abs(rhs - expected) < 1e-15


def test_rhs_traceless_hermitian(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    rhs = lindblad_rhs(rho, ModelParams(0.4, 0.2, 0.9))
    assert abs(np.trace(rhs)) < 1e-12
    assert max_abs(rhs - rhs.conj().T) < 1e-12


def test_liouvillian_matches_rhs(rng):
    mp = ModelParams(0.8, 0.1, 0.6)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert max_abs((liouvillian(mp) @ x.ravel()).reshape(4, 4) - lindblad_rhs(x, mp)) < 1e-13


def test_evolve_zero_generator_is_identity():
    rho0 = build_initial_state(InitialStateParams(0.3, 0.9))
    assert max_abs(evolve_numeric(rho0, ModelParams(0, 0, 0), 7.5) - rho0) < 1e-14


def test_evolve_doubly_excited_population():
    rho0 = build_initial_state(InitialStateParams(1.0, 0.0))
    rho = evolve_numeric(rho0, ModelParams.equal_rates(0.0, 0.2), 3.0)
    assert abs(rho[0, 0] - math.exp(-1.2) / 3) < 1e-12


@pytest.mark.parametrize("t", [1.0, 5.0, 20.0])
def test_evolve_matches_closed_form(t):
    p = InitialStateParams(0.8, 0.5)
    num = evolve_numeric(build_initial_state(p), ModelParams.equal_rates(0.2, 0.1), t)
    assert max_abs(num - analytic_state(p, 0.1, 0.2, t)) <= 1e-8


def test_half_prefactor_equals_doubled_coupling():
    # the (v/2) operator at coupling 2v is the same dynamics as prefactor 1 at v
    p = InitialStateParams(0.3, 2.0)
    rho0 = build_initial_state(p)
    lit = evolve_numeric(rho0, ModelParams(0.4, 0.1, 0.1, coupling_prefactor=0.5), 6.0)
    assert max_abs(lit - analytic_state(p, 0.1, 0.2, 6.0)) < 1e-10
    off = evolve_numeric(rho0, ModelParams(0.2, 0.1, 0.1, coupling_prefactor=0.5), 6.0)
    assert max_abs(off - analytic_state(p, 0.1, 0.2, 6.0)) > 1e-2


def test_evolve_adaptive_matches_fixed():
    p = InitialStateParams(0.5, 1.1)
    mp = ModelParams(1.0, 0.3, 0.7)
    rho0 = build_initial_state(p)
    a = evolve_numeric(rho0, mp, 4.0, tol=1e-11)
    b = evolve_numeric(rho0, mp, 4.0)
    assert max_abs(a - b) < 1e-9


def test_evolve_unequal_rates_valid_x_state():
    p = InitialStateParams(0.6, 0.4)
    rho = evolve_numeric(build_initial_state(p), ModelParams(0.5, 0.05, 0.8), 12.0)
    assert is_density_matrix(rho, herm_tol=1e-10)
    assert x_state_leakage(rho) < 1e-10


def test_evolve_rejects_negative_time():
    with pytest.raises(ValueError, match="t must"):
        evolve_numeric(np.eye(4) / 4, ModelParams(0, 0, 0), -1.0)


def test_evolve_coarse_step_reports_breakdown():
    rho0 = build_initial_state(InitialStateParams(1.0, 0.0))
    with pytest.raises(ValueError, match="smaller dt"):
        evolve_numeric(rho0, ModelParams.equal_rates(0.0, 50.0), 10.0, dt=0.5)


def test_common_gamma_requires_equal_rates():
    assert ModelParams.equal_rates(1, 0.2).common_gamma == 0.2
    with pytest.raises(ValueError, match="gamma_a == gamma_b"):
        ModelParams(1, 0.2, 0.3).common_gamma


def test_negative_rate_rejected():
    with pytest.raises(ValueError, match="gamma_a"):
        ModelParams(1, -0.1, 0.2)


@pytest.mark.parametrize("a,chi", [(0.0, 0.0), (0.7, 0.5), (1.0, 2.0)])
def test_analytic_state_initial_condition(a, chi):
    p = InitialStateParams(a, chi)
    assert max_abs(analytic_state(p, 0.4, 1.3, 0.0) - build_initial_state(p)) < 1e-15


def test_analytic_state_unitary_populations():
    p = InitialStateParams(0.0, math.pi / 2)
    for v, t in [(0.3, 1.7), (1.0, 0.4)]:
        rho = analytic_state(p, 0.0, v, t)
        s = math.sin(2 * v * t)
        assert abs(rho[1, 1] - (1 - s) / 3) < 1e-15
        assert abs(rho[2, 2] - (1 + s) / 3) < 1e-15


def test_analytic_rho11_monotone():
    p = InitialStateParams(0.9, 0.3)
    r11 = [analytic_state(p, 0.25, 0.6, t)[0, 0].real for t in np.linspace(0, 30, 61)]
    assert np.all(np.diff(r11) <= 0)


def test_analytic_eigensystem_at_t0():
    a = 0.35
    es = analytic_eigensystem(InitialStateParams(a, 0.8), 0.1, 0.2, 0.0)
    assert np.allclose(np.sort(es.lambdas), np.sort([a / 3, 0, (1 - a) / 3, 2 / 3]), atol=1e-15)


@pytest.mark.parametrize("a,chi,g,v,t", [(0.8, 0.5, 0.1, 0.2, 5.0), (0.3, 2.0, 1.0, 1.0, 1.3),
                                         (0.5, math.pi / 2, 0.0, 1.0, 0.7), (1.0, 0.0, 0.5, 0.2, 9.0)])
def test_analytic_eigensystem_matches_numeric(a, chi, g, v, t):
    p = InitialStateParams(a, chi)
    rho = analytic_state(p, g, v, t)
    es = analytic_eigensystem(p, g, v, t)
    assert np.allclose(np.sort(es.lambdas), hermitian_eig(rho).eigenvalues, atol=1e-8)
    assert abs(es.lambdas.sum() - 1) < 1e-10
    assert np.allclose(np.linalg.norm(es.vectors, axis=0), 1, atol=1e-10)
    assert max_abs(rho @ es.vectors - es.vectors * es.lambdas) < 1e-8


def test_lambda2_independent_of_coupling_and_phase():
    base = analytic_eigensystem(InitialStateParams(0.6, 0.0), 0.3, 0.0, 2.0).lambdas[1]
    for chi, v in [(1.0, 0.2), (2.5, 3.0)]:
        assert analytic_eigensystem(InitialStateParams(0.6, chi), 0.3, v, 2.0).lambdas[1] == base
    assert abs(base - 0.6 / 3 * math.exp(-1.2) * (math.exp(0.6) - 1)) < 1e-15


def test_reduced_state_t0():
    rb = reduced_state_B(InitialStateParams(0.25, 1.0), 0.3, 0.5, 0.0)
    assert np.allclose(np.diag(rb), [1.25 / 3, 1.75 / 3])


def test_reduced_state_matches_partial_trace(rng):
    for _ in range(20):
        a, chi, g, v, t = rng.uniform(0, 1), rng.uniform(-3, 3), rng.uniform(0, 2), rng.uniform(-2, 2), rng.uniform(0, 30)
        p = InitialStateParams(a, chi)
        assert max_abs(partial_trace_over_A(analytic_state(p, g, v, t)) - reduced_state_B(p, g, v, t)) < 1e-10


def test_reduced_state_full_decay():
    rb = reduced_state_B(InitialStateParams(0.5, 0.5), math.inf, 0.2, 1.0)
    assert np.allclose(np.diag(rb), [0, 1])
