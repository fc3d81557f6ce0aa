"""Generalised dephasing channels and their closed-form response.

The dual semigroup acts as ``X -> sum_nm Pi_n X Pi_m exp(lambda_nm t)`` for
a complete family of orthogonal projectors ``Pi_n``.
"""

from dataclasses import dataclass

import numpy as np

from . import opcore
from .lindblad import LindbladGenerator, build_superoperator
from .opcore import as_operator, dag, vec
from .response import NotSteadyError, ResponseSeries

PROJ_TOL = 1e-12
GROUP_TOL = 1e-9
COEF_TOL = 1e-14


@dataclass(frozen=True)
class DephasingModel:
    """Projectors ``Pi_n`` and the matrix ``Lambda`` of dual-map eigenvalues.

    ``Lambda[n, m]`` multiplies ``Pi_n X Pi_m``.
    """

    projectors: tuple
    Lambda: np.ndarray

    def __post_init__(self):
        P = tuple(as_operator(p) for p in self.projectors)
        lam = np.asarray(self.Lambda, dtype=complex)
        k = len(P)
        if k == 0:
            raise ValueError("need at least one projector")
        d = P[0].shape[0]
        if lam.shape != (k, k):
            raise ValueError(f"Lambda must be {k}x{k}, got {lam.shape}")
        for n, pn in enumerate(P):
            if pn.shape != (d, d):
                raise ValueError("projectors have inconsistent dimensions")
            for m, pm in enumerate(P):
                target = pn if n == m else 0
                if np.max(np.abs(pn @ pm - target)) > PROJ_TOL:
                    raise ValueError("projectors are not mutually orthogonal idempotents")
        if np.max(np.abs(sum(P) - np.eye(d))) > PROJ_TOL:
            raise ValueError("projectors do not sum to the identity")
        if np.max(np.abs(np.diag(lam)), initial=0.0) > GROUP_TOL:
            raise ValueError("Lambda must have a vanishing main diagonal")
        if np.max(np.abs(lam - lam.conj().T)) > GROUP_TOL:
            raise ValueError("Lambda must be hermitian")
        if np.any(lam.real > GROUP_TOL):
            raise ValueError("Lambda must have non-positive real parts")
        object.__setattr__(self, "projectors", P)
        object.__setattr__(self, "Lambda", lam)

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    def dual_superoperator(self):
        """Column-stacked matrix of the dual generator."""
        out = 0
        for n, pn in enumerate(self.projectors):
            for m, pm in enumerate(self.projectors):
                if self.Lambda[n, m] != 0:
                    out = out + self.Lambda[n, m] * opcore.sandwich(pn, pm)
        if np.isscalar(out):
            return np.zeros((self.dim ** 2,) * 2, dtype=complex)
        return out

    def superoperator(self):
        """Schroedinger-picture generator (dual of :meth:`dual_superoperator`)."""
        return opcore.hs_dual(self.dual_superoperator())


def _joint_eigenspaces(ops, rng, tol=GROUP_TOL):
    d = ops[0].shape[0]
    herm = []
    for X in ops:
        herm.append((X + dag(X)) / 2)
        herm.append(1j * (X - dag(X)) / 2)
    herm = [h for h in herm if np.max(np.abs(h)) > 0]
    if not herm:
        return [np.eye(d, dtype=complex)]
    coeffs = rng.uniform(0.5, 1.5, size=len(herm))
    M = sum(c * h for c, h in zip(coeffs, herm))
    w, V = np.linalg.eigh(M)
    scale = max(1.0, np.max(np.abs(w)))
    groups, start = [], 0
    for k in range(1, d + 1):
        if k == d or w[k] - w[k - 1] > tol * scale:
            groups.append(V[:, start:k])
            start = k
    return [U @ dag(U) for U in groups]


def from_lindblad(gen, seed=0):
    """Build a :class:`DephasingModel` from a generator with commuting data.

    ``H`` and every jump must be normal and commute with each other. The
    projectors are the joint eigenspaces; ``Lambda[n, m]`` is read off by
    applying the dual generator to ``|u><v|`` with ``u`` in block ``n`` and
    ``v`` in block ``m``.
    """
    if not isinstance(gen, LindbladGenerator):
        raise TypeError("expected a LindbladGenerator")
    ops = [gen.H, *gen.jumps]
    for i, X in enumerate(ops):
        if np.max(np.abs(X @ dag(X) - dag(X) @ X)) > 1e-10:
            raise ValueError("dephasing data must consist of normal operators")
        for Y in ops[i + 1:]:
            if np.max(np.abs(opcore.commutator(X, Y))) > 1e-10:
                raise ValueError("Hamiltonian and jump operators must commute")
    P = _joint_eigenspaces(ops, np.random.default_rng(seed))
    dual = opcore.hs_dual(build_superoperator(gen))
    k = len(P)
    lam = np.zeros((k, k), dtype=complex)
    vecs = []
    for p in P:
        w, V = np.linalg.eigh(p)
        vecs.append(V[:, -1])
    for n in range(k):
        for m in range(k):
            E = vec(np.outer(vecs[n], vecs[m].conj()))
            lam[n, m] = np.vdot(E, dual @ E) / np.vdot(E, E)
    np.fill_diagonal(lam, 0.0)
    return DephasingModel(tuple(P), lam)


def kernel_projection(model, A):
    """``P0(A) = sum_n Pi_n A Pi_n``."""
    A = as_operator(A)
    return sum(p @ A @ p for p in model.projectors)


def dephasing_dual_map(model, t, X):
    if t < 0:
        raise ValueError("dual map only defined for t >= 0")
    X = as_operator(X)
    P = model.projectors
    out = np.zeros_like(X)
    for n, pn in enumerate(P):
        for m, pm in enumerate(P):
            out += pn @ X @ pm * np.exp(model.Lambda[n, m] * t)
    return out


def chi_dephasing(model, rho, A, B, t_grid, tol=1e-10):
    """Closed-form response of ``A`` to the Hamiltonian perturbation ``B``.

    ``chi(t) = chibar + 2 sum_{n != m} |c_nm| exp(gamma_mn t) sin(omega_mn t + theta_nm)``
    with ``c_nm = <Pi_n A Pi_m, B>_rho`` and ``chibar = -i Tr([rho, P0(A)] B)``.
    """
    rho, A, B = as_operator(rho), as_operator(A), as_operator(B)
    if not (opcore.is_hermitian(A) and opcore.is_hermitian(B)):
        raise ValueError("A and B must be hermitian")
    for p in model.projectors:
        if np.max(np.abs(opcore.commutator(p, rho))) > tol:
            raise NotSteadyError("rho does not commute with the projectors, so it is "
                                 "not stationary")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0):
        raise ValueError("t_grid must be non-negative")
    P0A = kernel_projection(model, A)
    chibar = float((-1j * np.trace(opcore.commutator(rho, P0A) @ B)).real)
    vals = np.full(t.shape, chibar)
    P = model.projectors
    lam = model.Lambda
    for n, pn in enumerate(P):
        for m, pm in enumerate(P):
            if n == m:
                continue
            c = opcore.weighted_inner(rho, pn @ A @ pm, B)
            if abs(c) < COEF_TOL:
                continue
            vals += 2 * abs(c) * np.exp(lam[m, n].real * t) * np.sin(
                lam[m, n].imag * t + np.angle(c))
    return ResponseSeries(t, vals, "A", "-i[B,.]", {"chibar": chibar})


def random_commuting_generator(block_sizes, rng, n_jumps=2, hamiltonian=True):
    """Random generator whose ``H`` and jumps are diagonal in a shared random
    basis, constant on blocks of the given sizes."""
    d = int(sum(block_sizes))
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    V, _ = np.linalg.qr(G)
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)

    def diag_op(values):
        return V @ np.diag(values[labels]) @ dag(V)

    k = len(block_sizes)
    H = diag_op(rng.normal(size=k)) if hamiltonian else np.zeros((d, d))
    jumps = tuple(diag_op(rng.normal(size=k) + 1j * rng.normal(size=k))
                  for _ in range(n_jumps))
    return LindbladGenerator((H + dag(H)) / 2, jumps)
