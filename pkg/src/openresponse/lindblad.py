"""Dense Lindblad generators: construction, spectra, steady states, propagation.

Superoperators are plain ``(d^2, d^2)`` complex arrays in the column-stacking
convention of :mod:`openresponse.opcore`.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from . import opcore
from .opcore import as_operator, dag, vec, unvec

KERNEL_TOL = 1e-9
SPEC_TOL = 1e-9
COND_MAX = 1e10
GAP_WARN = 1e-8


class DefectiveSpectrumError(np.linalg.LinAlgError):
    """Raised when the zero eigenvalue of a superoperator is not semisimple."""


@dataclass(frozen=True)
class LindbladGenerator:
    """Hamiltonian plus jump operators (rates absorbed into the jumps)."""

    H: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        H = as_operator(self.H)
        jumps = tuple(as_operator(L) for L in self.jumps)
        if not opcore.is_hermitian(H):
            raise ValueError("Hamiltonian is not hermitian")
        for L in jumps:
            if L.shape != H.shape:
                raise ValueError(
                    f"jump operator shape {L.shape} does not match Hamiltonian {H.shape}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self):
        return self.H.shape[0]

    def superoperator(self):
        return build_superoperator(self)

    def apply(self, rho):
        """Evaluate the generator directly in operator form."""
        rho = as_operator(rho)
        out = -1j * (self.H @ rho - rho @ self.H)
        for L in self.jumps:
            LdL = dag(L) @ L
            out += L @ rho @ dag(L) - 0.5 * (LdL @ rho + rho @ LdL)
        return out


def build_superoperator(gen):
    """Matrix of ``-i[H, .] + sum_mu (L . L^dag - {L^dag L, .}/2)``."""
    if not isinstance(gen, LindbladGenerator):
        raise TypeError("expected a LindbladGenerator")
    d = gen.dim
    eye = np.eye(d)
    H = gen.H
    M = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for L in gen.jumps:
        LdL = dag(L) @ L
        M += np.kron(L.conj(), L) - 0.5 * (np.kron(eye, LdL) + np.kron(LdL.T, eye))
    return M


def hamiltonian_superoperator(H):
    """Matrix of ``-i[H, .]``."""
    return -1j * opcore.commutator_superop(H)


def adjoint_superoperator(M):
    """Hilbert-Schmidt dual, i.e. the conjugate transpose of the matrix."""
    return opcore.hs_dual(M)


def trace_functional(d):
    """Row vector ``vec(1)^dag`` so that ``Tr X = trace_functional(d) @ vec(X)``."""
    return vec(np.eye(d)).conj()


def spectrum(M):
    """Eigenvalues sorted by decreasing real part."""
    lam = np.linalg.eigvals(np.asarray(M))
    return lam[np.lexsort((lam.imag, -lam.real))]


def heisenberg_evolve(M, A, t_grid):
    """Heisenberg-picture ``A(t) = exp(t M^*)(A)`` on ``t_grid``."""
    A = as_operator(A)
    rows = evolve_on_grid(adjoint_superoperator(M), vec(A), t_grid)
    return [unvec(r, A.shape[0]) for r in rows]


def expect(rho, A):
    return complex(np.trace(as_operator(rho) @ as_operator(A)))


# --------------------------------------------------------------------------
# propagation


def propagate(M, rho0, t):
    """``exp(t M)(rho0)`` for ``t >= 0`` by scaling-and-squaring ``expm``."""
    if t < 0:
        raise ValueError("propagate only defined for t >= 0 (semigroup)")
    rho0 = as_operator(rho0)
    if t == 0:
        return rho0.copy()
    return unvec(sla.expm(t * np.asarray(M)) @ vec(rho0), rho0.shape[0])


def propagator(M, t):
    if t < 0:
        raise ValueError("propagator only defined for t >= 0 (semigroup)")
    return sla.expm(t * np.asarray(M))


def _check_grid(t_grid, start_at_zero=True):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if start_at_zero and t[0] != 0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def evolve_on_grid(M, v0, t_grid):
    """Return ``exp(t M) v0`` for every ``t`` in ``t_grid`` (rows).

    Uniform grids reuse a single step propagator.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative times are not allowed")
    M = np.asarray(M)
    out = np.empty((t.size, v0.size), dtype=complex)
    if t.size > 1:
        dt = np.diff(t)
        uniform = np.allclose(dt, dt[0], rtol=1e-12, atol=0)
    else:
        uniform = False
    if uniform:
        step = sla.expm(dt[0] * M)
        v = sla.expm(t[0] * M) @ v0 if t[0] != 0 else v0.astype(complex)
        for k in range(t.size):
            out[k] = v
            v = step @ v
    else:
        prev, v = 0.0, v0.astype(complex)
        for k, tk in enumerate(t):
            if tk > prev:
                v = sla.expm((tk - prev) * M) @ v
            out[k] = v
            prev = tk
    return out


def propagate_time_dependent(M0, M1, xi, rho0, t_grid, rtol=1e-10, atol=1e-12):
    """Integrate ``d rho/dt = (M0 + xi(t) M1) rho`` on ``t_grid``.

    Uses an adaptive embedded Runge-Kutta 4(5) scheme. Returns a list of
    density matrices, one per grid point.
    """
    t = _check_grid(t_grid)
    rho0 = as_operator(rho0)
    M0, M1 = np.asarray(M0), np.asarray(M1)
    d = rho0.shape[0]

    def rhs(s, y):
        return M0 @ y + xi(s) * (M1 @ y)

    if t.size == 1:
        return [rho0.copy()]
    sol = solve_ivp(rhs, (t[0], t[-1]), vec(rho0).astype(complex), method="RK45",
                    t_eval=t, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"time-dependent integration failed: {sol.message}")
    return [unvec(sol.y[:, k], d) for k in range(t.size)]


# --------------------------------------------------------------------------
# kernel, projector, resolvent


def _null_space(M, tol):
    u, s, vh = np.linalg.svd(M)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def spectral_projector_P0(M, tol=KERNEL_TOL):
    """Spectral projection onto ``Ker M`` along the range of ``M``.

    Raises :class:`DefectiveSpectrumError` when the zero eigenvalue carries
    Jordan structure (left/right kernels not biorthogonalisable).
    """
    M = np.asarray(M)
    R = _null_space(M, tol)
    n = M.shape[0]
    if R.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    W = _null_space(dag(M), tol)
    if W.shape[1] != R.shape[1]:
        raise DefectiveSpectrumError(
            f"left and right kernels differ in dimension ({W.shape[1]} vs {R.shape[1]})")
    G = dag(W) @ R
    if np.linalg.cond(G) > COND_MAX:
        raise DefectiveSpectrumError(
            "zero eigenvalue is not semisimple (Jordan block detected); "
            "spectral projector is undefined")
    return R @ np.linalg.solve(G, dag(W))


def reduced_resolvent(M, tol=KERNEL_TOL):
    """``S = lim_{z->0} Q (M - z)^{-1} Q`` with ``Q = 1 - P0``.

    Uses ``(M + P0)^{-1} = S + P0``, valid when zero is semisimple.
    """
    M = np.asarray(M)
    P0 = spectral_projector_P0(M, tol)
    return np.linalg.inv(M + P0) - P0


@dataclass
class SteadyStateResult:
    states: list
    kernel_dim: int
    unique: bool
    ill_conditioned: bool = False
    eigenvalues: np.ndarray = field(default=None, repr=False)


def _tomographic_states(d):
    basis = np.eye(d, dtype=complex)
    out = [np.outer(basis[i], basis[i]) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            for ph in (1, 1j):
                psi = (basis[i] + ph * basis[j]) / np.sqrt(2)
                out.append(np.outer(psi, psi.conj()))
    return out


def _as_state(X):
    tr = np.trace(X)
    if abs(tr) < 1e-12:
        return None
    X = X / tr
    X = (X + dag(X)) / 2
    if np.linalg.eigvalsh(X).min() < -1e-8:
        return None
    return X


def steady_states(M, tol=KERNEL_TOL):
    """Kernel of ``M`` returned as a list of density matrices.

    For a one-dimensional kernel the single state is the normalised kernel
    vector. Otherwise the states are images of a tomographically complete
    set of pure states under the kernel projector, reduced to a linearly
    independent family spanning the kernel.
    """
    M = np.asarray(M)
    d = opcore.superop_dim(M)
    lam = np.linalg.eigvals(M)
    mags = np.sort(np.abs(lam))
    k_alg = int(np.sum(mags <= tol))
    R = _null_space(M, tol)
    kdim = R.shape[1]
    rest = mags[k_alg:]
    ill = bool(rest.size and rest[0] < GAP_WARN) or k_alg != kdim
    if ill:
        warnings.warn("kernel is poorly separated from the rest of the spectrum",
                      RuntimeWarning, stacklevel=2)
    states = []
    if kdim == 1:
        s = _as_state(unvec(R[:, 0], d))
        if s is not None:
            states.append(s)
    elif kdim > 1:
        try:
            P0 = spectral_projector_P0(M, tol)
        except DefectiveSpectrumError:
            P0 = R @ dag(R)
        basis = []
        for psi in _tomographic_states(d):
            s = _as_state(unvec(P0 @ vec(psi), d))
            if s is None:
                continue
            trial = np.column_stack(basis + [vec(s)])
            if np.linalg.matrix_rank(trial, tol=1e-8) == len(basis) + 1:
                basis.append(vec(s))
                states.append(s)
            if len(states) == kdim:
                break
    return SteadyStateResult(states=states, kernel_dim=kdim, unique=(kdim == 1),
                             ill_conditioned=ill, eigenvalues=lam)
