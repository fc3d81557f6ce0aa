import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from openresponse import opcore
from openresponse.dephasing import (DephasingModel, chi_dephasing, dephasing_dual_map,
                                    from_lindblad, kernel_projection,
                                    random_commuting_generator)
from openresponse.lindblad import LindbladGenerator, build_superoperator, propagate
from openresponse.opcore import SIGMA_X, SIGMA_Z
from openresponse.response import NotSteadyError, Perturbation, chi_time

QUBIT_P = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def block_state(model, rng):
    """Random density matrix commuting with every projector."""
    rho = sum(p @ opcore.random_density_matrix(model.dim, rng) @ p for p in model.projectors)
    return rho / np.trace(rho)


def test_model_validation():
    with pytest.raises(ValueError, match="diagonal"):
        DephasingModel(QUBIT_P, np.array([[0.1, 0], [0, 0]]))
    with pytest.raises(ValueError, match="hermitian"):
        DephasingModel(QUBIT_P, np.array([[0, -1 + 1j], [-1 + 1j, 0]]))
    with pytest.raises(ValueError, match="non-positive"):
        DephasingModel(QUBIT_P, np.array([[0, 0.5], [0.5, 0]]))
    with pytest.raises(ValueError, match="identity"):
        DephasingModel((np.diag([1.0, 0.0]),), np.zeros((1, 1)))
    with pytest.raises(ValueError, match="orthogonal"):
        DephasingModel((np.eye(2), np.diag([0.0, 1.0])), np.zeros((2, 2)))


def test_dual_map_trivial_cases(rng):
    model = DephasingModel(QUBIT_P, np.array([[0, -0.2 + 1j], [-0.2 - 1j, 0]]))
    X = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.array_equal(dephasing_dual_map(model, 0.0, X), X)
    D = np.diag(np.diag(X))
    assert np.allclose(dephasing_dual_map(model, 7.0, D), D, atol=1e-15)
    with pytest.raises(ValueError):
        dephasing_dual_map(model, -1.0, X)


def test_qubit_dephasing_matches_engine(rng):
    g = 0.35
    gen = LindbladGenerator(np.zeros((2, 2)), (np.sqrt(g) * SIGMA_Z,))
    model = from_lindblad(gen)
    assert np.allclose(sorted(model.Lambda[np.triu_indices(2, 1)].real), [-2 * g])
    L = build_superoperator(gen)
    X = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    for t in (0.5, 2.0):
        # the generator is self-dual here, so the Schroedinger propagation is the dual map
        assert np.max(np.abs(dephasing_dual_map(model, t, X) - propagate(L, X, t))) < 1e-12
        assert abs(dephasing_dual_map(model, t, X)[0, 1] - X[0, 1] * np.exp(-2 * g * t)) < 1e-14


def test_dual_map_matches_dual_superoperator(rng):
    gen = random_commuting_generator((2, 1, 2), rng)
    model = from_lindblad(gen)
    dual = opcore.hs_dual(build_superoperator(gen))
    assert np.max(np.abs(model.dual_superoperator() - dual)) < 1e-12
    X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert np.max(np.abs(dephasing_dual_map(model, 1.3, X) - propagate(dual, X, 1.3))) < 1e-12


def test_from_lindblad_rejects_noncommuting():
    with pytest.raises(ValueError, match="commute"):
        from_lindblad(LindbladGenerator(SIGMA_Z, (SIGMA_X,)))
    with pytest.raises(ValueError, match="normal"):
        from_lindblad(LindbladGenerator(np.zeros((2, 2)), (opcore.SIGMA_MINUS,)))


def test_kernel_projection(rng):
    model = DephasingModel(QUBIT_P, np.array([[0, -1.0], [-1.0, 0]]))
    assert np.max(np.abs(kernel_projection(model, SIGMA_X))) == 0
    assert np.array_equal(kernel_projection(model, SIGMA_Z), SIGMA_Z)
    big = from_lindblad(random_commuting_generator((2, 3, 1), rng))
    for _ in range(20):
        A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        once = kernel_projection(big, A)
        assert np.max(np.abs(kernel_projection(big, once) - once)) < 1e-13


def test_real_lambda_gives_no_self_response(rng):
    # hermitian commuting jumps and no Hamiltonian give a real Lambda
    V, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    jumps = tuple(V @ np.diag(np.repeat(rng.normal(size=2), 2)) @ V.conj().T for _ in range(2))
    model = from_lindblad(LindbladGenerator(np.zeros((4, 4)), jumps))
    assert np.max(np.abs(model.Lambda.imag)) < 1e-12
    rho = block_state(model, rng)
    A = opcore.random_hermitian(4, rng)
    chi = chi_dephasing(model, rho, A, A, np.linspace(0, 5, 21))
    assert np.max(np.abs(chi.values)) < 1e-12


def test_abelian_commutant_has_no_constant_term(rng):
    model = from_lindblad(random_commuting_generator((1, 1, 1), rng))
    rho = block_state(model, rng)
    A, B = opcore.random_hermitian(3, rng), opcore.random_hermitian(3, rng)
    assert abs(chi_dephasing(model, rho, A, B, [0.0]).meta["chibar"]) < 1e-14


def test_non_abelian_commutant_constant_term(rng):
    model = from_lindblad(random_commuting_generator((2, 1), rng))
    rho = block_state(model, rng)
    A, B = opcore.random_hermitian(3, rng), opcore.random_hermitian(3, rng)
    chi = chi_dephasing(model, rho, A, B, [0.0, 200.0])
    assert abs(chi.meta["chibar"]) > 1e-3
    assert abs(chi.values[1] - chi.meta["chibar"]) < 1e-10


def test_matches_engine_d4(rng):
    gen = random_commuting_generator((2, 1, 1), rng)
    model = from_lindblad(gen)
    rho = block_state(model, rng)
    A, B = opcore.random_hermitian(4, rng), opcore.random_hermitian(4, rng)
    t = np.linspace(0, 6, 100)
    ref = chi_time(build_superoperator(gen), Perturbation.hamiltonian(B), rho, A, t).values
    assert np.max(np.abs(chi_dephasing(model, rho, A, B, t).values - ref)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       blocks=st.lists(st.integers(1, 3), min_size=1, max_size=4).filter(lambda b: sum(b) <= 6))
def test_matches_engine_property(seed, blocks):
    rng = np.random.default_rng(seed)
    gen = random_commuting_generator(tuple(blocks), rng)
    model = from_lindblad(gen)
    rho = block_state(model, rng)
    d = model.dim
    A, B = opcore.random_hermitian(d, rng), opcore.random_hermitian(d, rng)
    t = np.linspace(0, 4, 17)
    ref = chi_time(build_superoperator(gen), Perturbation.hamiltonian(B), rho, A, t).values
    assert np.max(np.abs(chi_dephasing(model, rho, A, B, t).values - ref)) < 1e-10


def test_self_response_phases_vanish(rng):
    model = from_lindblad(random_commuting_generator((1, 2, 1), rng))
    rho = block_state(model, rng)
    A = opcore.random_hermitian(4, rng)
    for n, pn in enumerate(model.projectors):
        for m, pm in enumerate(model.projectors):
            c = opcore.weighted_inner(rho, pn @ A @ pm, A)
            if n != m and abs(c) > 1e-14:
                assert abs(np.angle(c)) < 1e-10


def test_non_stationary_state_rejected(rng):
    model = DephasingModel(QUBIT_P, np.array([[0, -1.0], [-1.0, 0]]))
    with pytest.raises(NotSteadyError):
        chi_dephasing(model, np.full((2, 2), 0.5), SIGMA_X, SIGMA_X, [0.0])
