import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from openresponse import opcore
from openresponse.davies import (DaviesQubit, chi_qubit_freq, chi_qubit_time, davies_generator,
                                 mhr_qubit, thermal_qubit_generator)
from openresponse.dephasing import DephasingModel
from openresponse.lindblad import (LindbladGenerator, build_superoperator,
                                   hamiltonian_superoperator, spectral_projector_P0,
                                   steady_states)
from openresponse.opcore import SIGMA_X, SIGMA_Y, SIGMA_Z, vec, unvec
from openresponse.response import (NotSteadyError, Perturbation, chi_freq, chi_freq_spectral,
                                   chi_time, default_epsilon, dissipated_power, energy_flows,
                                   kramers_kronig, linear_response, mhr, mhr_operator,
                                   thermal_susceptibility)

from conftest import random_generator

# 2 exp(-pi/4) tanh(1) and tanh(1) (1/|2 + i g| + 1/g), g = 0.2 (1 + e^-2), both by mpmath
CHI_DAVIES_HALF_PI = 0.694479627167991190693
MHR_QUBIT_REF = 3.73241587674863985815

Q_REF = DaviesQubit(1.0, 0.5, 0.4, 0.5)


def davies_setup(q=Q_REF):
    return build_superoperator(davies_generator(q)), q.fixed_point


def ergodic(d, rng):
    L0 = build_superoperator(random_generator(d, rng))
    return L0, steady_states(L0).states[0]


def test_perturbation_kinds(rng):
    p = Perturbation.hamiltonian(SIGMA_X)
    assert p.kind == "hamiltonian" and np.allclose(p.superop, -1j * opcore.commutator_superop(SIGMA_X))
    g = random_generator(2, rng)
    assert np.allclose(Perturbation.generator(g).superop, build_superoperator(g))
    with pytest.raises(ValueError, match="hermitian"):
        Perturbation.hamiltonian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="trace"):
        Perturbation.raw(np.eye(4))


def test_commuting_hamiltonian_perturbation_gives_zero():
    L0, rho = davies_setup()
    chi = chi_time(L0, Perturbation.hamiltonian(SIGMA_Z), rho, SIGMA_X, np.linspace(0, 5, 11))
    assert np.max(np.abs(chi.values)) < 1e-15


def test_davies_reference_value():
    L0, rho = davies_setup()
    t = np.array([0.0, np.pi / 2, 3.0])
    engine = chi_time(L0, Perturbation.hamiltonian(SIGMA_X), rho, SIGMA_X, t).values
    closed = chi_qubit_time(Q_REF, SIGMA_X, SIGMA_X, t).values
    assert abs(closed[1] - CHI_DAVIES_HALF_PI) < 1e-14
    assert np.max(np.abs(engine - closed)) < 1e-10


def test_not_steady_is_rejected():
    L0, _ = davies_setup()
    with pytest.raises(NotSteadyError, match="steady"):
        chi_time(L0, Perturbation.hamiltonian(SIGMA_X), np.eye(2) / 2, SIGMA_X, [0.0, 1.0])


def test_imaginary_residual_reported_small(rng):
    L0, rho = ergodic(3, rng)
    A, B = opcore.random_hermitian(3, rng), opcore.random_hermitian(3, rng)
    chi = chi_time(L0, Perturbation.hamiltonian(B), rho, A, np.linspace(0, 4, 9))
    assert chi.meta["imag_residual"] < 1e-10


def _backward_unitary_formula(L0, rho, A, B, t):
    # i Tr(rho [B(-t), A]) with B(-t) = exp(-t L0^*)(B)
    Ld = opcore.hs_dual(L0)
    out = []
    for tk in t:
        Bm = unvec(sla.expm(-tk * Ld) @ vec(B))
        out.append((1j * np.trace(rho @ opcore.commutator(Bm, A))).real)
    return np.array(out)


def test_unitary_spectral_formula(rng):
    beta = 0.8
    rho = sla.expm(-beta * SIGMA_Z)
    rho /= np.trace(rho)
    L0 = hamiltonian_superoperator(SIGMA_Z)
    A, B = opcore.random_hermitian(2, rng), opcore.random_hermitian(2, rng)
    t = np.linspace(0, 6, 25)
    chi = chi_time(L0, Perturbation.hamiltonian(B), rho, A, t).values
    # two-level spectral sum with energies E = (+1, -1)
    E = np.array([1.0, -1.0])
    p = np.diag(rho).real
    ref = np.zeros_like(t)
    for m in range(2):
        for n in range(2):
            ref -= (p[m] - p[n]) * np.imag(B[m, n] * A[n, m] * np.exp(1j * (E[n] - E[m]) * t))
    assert np.max(np.abs(chi - ref)) < 1e-12
    assert np.max(np.abs(chi - _backward_unitary_formula(L0, rho, A, B, t))) < 1e-12


def test_dissipative_counterexample_to_unitary_formula():
    L0, rho = davies_setup()
    A, B = SIGMA_X + 0.4 * SIGMA_Z, SIGMA_X
    t = np.linspace(0, 3, 13)
    chi = chi_time(L0, Perturbation.hamiltonian(B), rho, A, t).values
    assert np.max(np.abs(chi - _backward_unitary_formula(L0, rho, A, B, t))) > 1e-3


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_difference_of_correlators(seed, d):
    rng = np.random.default_rng(seed)
    L0, rho = ergodic(d, rng)
    A, B = opcore.random_hermitian(d, rng), opcore.random_hermitian(d, rng)
    t = np.linspace(0, 3, 7)
    chi = chi_time(L0, Perturbation.hamiltonian(B), rho, A, t).values
    Ld = opcore.hs_dual(L0)
    Ls = opcore.sharp_conjugate(Ld, rho)
    for tk, c in zip(t, chi):
        At = unvec(sla.expm(tk * Ld) @ vec(A))
        Bs = unvec(sla.expm(tk * Ls) @ vec(B))
        ref = -1j * (opcore.weighted_inner(rho, At, B) - opcore.weighted_inner(rho, Bs, A))
        assert abs(ref.imag) < 1e-9
        assert abs(c - ref.real) < 1e-10 * max(1.0, np.linalg.cond(rho))


def test_frequency_matches_closed_form():
    L0, rho = davies_setup()
    w = np.linspace(-4, 4, 81)
    fr = chi_freq(L0, Perturbation.hamiltonian(SIGMA_X), rho, SIGMA_X, w)
    assert fr.epsilon == 0
    assert np.max(np.abs(fr.values - chi_qubit_freq(Q_REF, SIGMA_X, SIGMA_X, w).values)) < 1e-10


def test_frequency_matches_fourier_transform(rng):
    L0, rho = ergodic(3, rng)
    A, B = opcore.random_hermitian(3, rng), opcore.random_hermitian(3, rng)
    gap = -np.sort(np.linalg.eigvals(L0).real)[-2]
    t = np.linspace(0, 40 / gap, 40001)
    pert = Perturbation.hamiltonian(B)
    chi = chi_time(L0, pert, rho, A, t).values
    w = np.array([-1.3, 0.0, 0.7, 2.1])
    ft = np.array([trapezoid(np.exp(1j * om * t) * chi, t) for om in w])
    assert np.max(np.abs(ft - chi_freq(L0, pert, rho, A, w).values)) < 1e-4


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_reality_symmetry(seed, d):
    rng = np.random.default_rng(seed)
    L0, rho = ergodic(d, rng)
    A, B = opcore.random_hermitian(d, rng), opcore.random_hermitian(d, rng)
    w = np.linspace(-3, 3, 13)
    v = chi_freq(L0, Perturbation.hamiltonian(B), rho, A, w).values
    assert np.max(np.abs(v[::-1] - v.conj())) < 1e-10


def test_spectral_path_agrees(rng):
    L0, rho = ergodic(3, rng)
    A = opcore.random_hermitian(3, rng)
    pert = Perturbation.generator(random_generator(3, rng))
    w = np.linspace(-5, 5, 21)
    a = chi_freq(L0, pert, rho, A, w, 0.0).values
    b = chi_freq_spectral(L0, pert, rho, A, w, 0.0).values
    assert np.max(np.abs(a - b)) < 1e-9


def test_high_frequency_decay():
    L0, rho = davies_setup()
    w = np.array([1e3, 1e4, 1e5])
    v = chi_freq(L0, Perturbation.hamiltonian(SIGMA_X), rho, SIGMA_Y, w).values
    scaled = np.abs(v) * w
    assert np.allclose(scaled, scaled[-1], rtol=1e-2)


def test_singular_resolvent_needs_epsilon():
    L0 = hamiltonian_superoperator(0.5 * SIGMA_Z)
    rho = np.diag([0.7, 0.3])
    pert = Perturbation.hamiltonian(SIGMA_X)
    assert default_epsilon(L0) > 0
    with pytest.raises(ValueError, match="epsilon"):
        chi_freq(L0, pert, rho, SIGMA_X, [1.0], epsilon=0.0)
    assert np.isfinite(chi_freq(L0, pert, rho, SIGMA_X, [1.0]).values).all()
    with pytest.raises(ValueError, match="empty"):
        chi_freq(L0, pert, rho, SIGMA_X, [])


def test_mhr_reference_value():
    beta, Delta, gm = 2.0, 1.0, 0.4
    gammas = (gm * np.exp(-2.0), gm)
    closed = mhr_qubit(Delta, beta, gammas, SIGMA_X, 1.0)
    assert abs(closed - MHR_QUBIT_REF) < 1e-12
    L0 = build_superoperator(thermal_qubit_generator(Delta, gammas))
    rho = steady_states(L0).states[0]
    assert abs(mhr(L0, Perturbation.hamiltonian(SIGMA_X), rho, 1.0) - MHR_QUBIT_REF) < 1e-8


def test_mhr_zero_when_state_unperturbed():
    L0, rho = davies_setup()
    assert mhr(L0, Perturbation.hamiltonian(SIGMA_Z), rho, 0.7) == 0
    out = mhr(L0, Perturbation.hamiltonian(SIGMA_Z), rho, [0.1, 0.7])
    assert out.shape == (2,) and np.all(out == 0)


def test_mhr_bounds_response(rng):
    L0, rho = ergodic(3, rng)
    pert = Perturbation.hamiltonian(opcore.random_hermitian(3, rng))
    Om = 0.9
    bound = mhr(L0, pert, rho, Om)
    X = mhr_operator(L0, pert, rho, Om)
    assert abs(opcore.trace_norm(X) - bound) < 1e-12
    for _ in range(50):
        A = opcore.random_hermitian(3, rng)
        A /= np.linalg.norm(A, 2)
        chi = chi_freq(L0, pert, rho, A, [Om]).values[0]
        assert abs(chi - 1j * np.trace(X @ A)) < 1e-12
        assert abs(chi) <= bound * (1 + 1e-12)


def test_thermal_susceptibility_finite_difference(rng):
    L0, rho = ergodic(3, rng)
    A = opcore.random_hermitian(3, rng)
    gen1 = random_generator(3, rng)
    L1 = build_superoperator(gen1)
    chiT = thermal_susceptibility(L0, Perturbation.generator(gen1), rho, A)
    lam = 1e-5
    plus = steady_states(L0 + lam * L1).states[0]
    minus = steady_states(L0 - lam * L1).states[0]
    fd = np.trace((plus - minus) @ A).real / (2 * lam)
    assert abs(chiT - fd) < 1e-5
    chi0 = chi_freq(L0, Perturbation.generator(gen1), rho, A, [0.0]).values[0]
    assert abs(chi0 - chiT) < 1e-10


def test_degenerate_kernel_static_difference():
    # non-abelian commutant: chi(t -> inf) = Tr(P0 L1(rho) A) != 0
    P = [np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 0.0, 1.0])]
    model = DephasingModel(P, np.array([[0, -0.4 + 1j], [-0.4 - 1j, 0]]))
    L0 = model.superoperator()
    rho = np.array([[0.4, 0.1j, 0], [-0.1j, 0.3, 0], [0, 0, 0.3]], dtype=complex)
    A = np.array([[1, 0.5, 0.2], [0.5, -1, 0.3], [0.2, 0.3, 0.5]], dtype=complex)
    B = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]])
    pert = Perturbation.hamiltonian(B)
    kernel_term = (vec(A.T) @ spectral_projector_P0(L0) @ pert.superop @ vec(rho)).real
    assert abs(kernel_term) > 1e-3
    chiT = thermal_susceptibility(L0, pert, rho, A)
    # chi(0) - chiT = Tr(P0 L1(rho) A) / eps up to O(eps) from the range part
    for eps in (1e-3, 1e-6):
        chi0 = chi_freq(L0, pert, rho, A, [0.0], epsilon=eps).values[0]
        assert abs(chi0 - chiT - kernel_term / eps) < 10 * eps
        assert abs(chi0 - chiT) > 1e-3


def test_dissipated_power_trivial_cases():
    L0, rho = davies_setup()
    assert dissipated_power(L0, SIGMA_X, rho, 0.0, 0.1) == 0
    assert abs(dissipated_power(L0, np.eye(2), rho, 1.0, 0.1)) < 1e-15


def _time_domain_power(gen, B, amp, Om, periods=30, skip=15):
    T = 2 * np.pi / Om
    t = np.linspace(0, periods * T, periods * 200 + 1)
    flows = energy_flows(gen, B, lambda s: amp * np.cos(Om * s),
                         lambda s: -amp * Om * np.sin(Om * s), t)
    sel = t >= skip * T
    return trapezoid(flows["dynamical"][sel], t[sel]) / ((periods - skip) * T)


def test_dissipated_power_thermal_qubit():
    # sigma^- lowers |0> -> |1>: population sits in the lower level (E = -1/2)
    g = 0.3
    gen = LindbladGenerator(0.5 * SIGMA_Z, (np.sqrt(g) * opcore.SIGMA_MINUS,
                                            np.sqrt(g * np.exp(-1.0)) * opcore.SIGMA_PLUS))
    L0 = build_superoperator(gen)
    rho = steady_states(L0).states[0]
    P = dissipated_power(L0, SIGMA_X, rho, 1.0, 0.01)
    assert P > 0
    assert abs(P - _time_domain_power(gen, SIGMA_X, 0.01, 1.0)) < 0.02 * abs(P)


def test_dissipated_power_davies_inverted_state():
    # the Davies fixed point puts weight p > 1/2 on the upper level: the drive extracts energy
    q = DaviesQubit(1.0, 0.5, 0.4, 0.3)
    L0 = build_superoperator(davies_generator(q))
    P = dissipated_power(L0, SIGMA_X, q.fixed_point, 1.0, 0.01)
    assert P < 0
    assert abs(P - _time_domain_power(davies_generator(q), SIGMA_X, 0.01, 1.0)) < 0.02 * abs(P)


def test_energy_flow_components():
    q = DaviesQubit(1.0, 0.5, 0.4, 0.3)
    t = np.linspace(0, 2, 5)
    flows = energy_flows(davies_generator(q), SIGMA_X, lambda s: 0.0, lambda s: 0.0, t)
    assert np.max(np.abs(flows["delta_b"])) < 1e-10
    assert np.max(np.abs(flows["dissipative"])) < 1e-10
    assert set(flows) == {"t", "dynamical", "dissipative", "delta_b"}


def test_linear_response_convolution():
    t = np.linspace(0, 2, 201)
    from openresponse.response import ResponseSeries

    chi = ResponseSeries(t, np.exp(-t))
    out = linear_response(chi, np.ones_like(t))
    assert np.max(np.abs(out - (1 - np.exp(-t)))) < 1e-4
    with pytest.raises(ValueError, match="grid"):
        linear_response(chi, np.ones(3))


def test_kramers_kronig_davies():
    w = np.linspace(-60, 60, 24001)
    fr = chi_qubit_freq(DaviesQubit(1.0, 0.5, 0.4, 0.3), SIGMA_X, SIGMA_X, w)
    kk = kramers_kronig(fr)
    central = np.abs(w) <= 30
    err = np.max(np.abs(kk.values.real - fr.values.real)[central])
    assert err <= 0.01 * np.max(np.abs(fr.values.real))
    assert np.array_equal(kk.values.imag, fr.values.imag)
    assert np.max(np.abs(kk.values.real - kk.values.real[::-1])) < 1e-9


def test_kramers_kronig_zero_and_narrow_grid():
    from openresponse.response import FrequencyResponse

    w = np.linspace(-5, 5, 101)
    zero = kramers_kronig(FrequencyResponse(w, np.zeros(101, dtype=complex)))
    assert np.all(zero.values == 0)
    fr = chi_qubit_freq(DaviesQubit(1.0, 0.5, 0.4, 0.3), SIGMA_X, SIGMA_X, w)
    with pytest.raises(ValueError, match="too narrow"):
        kramers_kronig(fr)


def test_observable_dimension_mismatch():
    L0, rho = davies_setup()
    with pytest.raises(ValueError, match="dimension"):
        chi_time(L0, Perturbation.hamiltonian(SIGMA_X), rho, np.eye(3), [0.0])
