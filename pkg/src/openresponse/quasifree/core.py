"""Quasi-free fermionic Lindblad dynamics in the Majorana covariance picture.

``L`` fermionic modes give ``2L`` Majorana operators. A quadratic operator
is ``Gamma(M) = (i/4) sum_ij M_ij m_i m_j`` with ``M`` real antisymmetric,
Lindblad operators are linear, ``L_mu = sum_i l_i m_i``, and the covariance
matrix ``C_ij = (i/2) Tr(rho [m_i, m_j])`` obeys ``dC/dt = X C + C X^T - Y``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from ..response import FrequencyResponse, NotSteadyError, ResponseSeries

SYM_TOL = 1e-10
STATIONARY_TOL = 1e-8
UNIQUE_TOL = 1e-12
COND_MAX = 1e10


def _antisym(M, name, tol=SYM_TOL):
    M = np.asarray(M)
    if np.max(np.abs(M.imag), initial=0.0) > tol:
        raise ValueError(f"{name} must be real")
    M = M.real
    if np.max(np.abs(M + M.T), initial=0.0) > tol * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise ValueError(f"{name} must be antisymmetric")
    return (M - M.T) / 2


@dataclass(frozen=True)
class MajoranaQuadratic:
    """Real antisymmetric ``2L x 2L`` matrix ``M`` of ``Gamma(M)``."""

    M: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ValueError(f"Majorana matrix must be 2L x 2L, got {M.shape}")
        object.__setattr__(self, "M", _antisym(M, "Majorana matrix", 1e-12))

    @property
    def L(self):
        return self.M.shape[0] // 2


def _matrix(A):
    return A.M if isinstance(A, MajoranaQuadratic) else MajoranaQuadratic(A).M


@dataclass(frozen=True)
class QuasiFreeGenerator:
    """Quadratic Hamiltonian ``H`` plus linear Lindblad vectors.

    ``X = H - S`` and ``Y`` are derived on construction.
    """

    H: np.ndarray
    lvecs: tuple = ()

    def __post_init__(self):
        H = _matrix(self.H)
        n = H.shape[0]
        lv = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in self.lvecs)
        for v in lv:
            if v.size != n:
                raise ValueError(f"Lindblad vector of length {v.size}, expected {n}")
        S = np.zeros((n, n))
        Y = np.zeros((n, n))
        for v in lv:
            P = np.outer(v, v.conj())
            # |l><l| + |l*><l*| = 2 Re P,  2i(|l><l| - |l*><l*|) = -4 Im P
            S += 2 * P.real
            Y += -4 * P.imag
        if np.max(np.abs(S - S.T), initial=0.0) > SYM_TOL:
            raise ValueError("S is not symmetric")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "lvecs", lv)
        object.__setattr__(self, "S", (S + S.T) / 2)
        object.__setattr__(self, "Y", _antisym(Y, "Y"))
        object.__setattr__(self, "X", H - self.S)

    @property
    def L(self):
        return self.H.shape[0] // 2

    def eigenvalues(self):
        return np.linalg.eigvals(self.X)


def build_xys(H, lvecs=()):
    return QuasiFreeGenerator(H, tuple(lvecs))


def check_covariance(C, tol=1e-9):
    """Validate antisymmetry and the bound ``|eig(iC)| <= 1``."""
    C = _antisym(C, "covariance matrix", SYM_TOL)
    ev = np.linalg.eigvalsh(1j * C)
    if np.max(np.abs(ev), initial=0.0) > 1 + tol:
        raise ValueError("covariance matrix is not physical: |eig(iC)| > 1")
    return C


def expect_quadratic(C, A):
    """``<Gamma(A)> = Tr(A^T C) / 4``."""
    return 0.25 * float(np.sum(_matrix(A) * np.asarray(C)))


def liouvillian_gap(gen):
    """``2 min_k (-Re lambda_k)`` over the eigenvalues of ``X``."""
    return float(2 * np.min(-gen.eigenvalues().real))


# --------------------------------------------------------------------------
# covariance dynamics


def _step_operators(X, Y, h):
    """``(exp(hX), int_0^h exp(sX) Y exp(sX^T) ds)`` by a block exponential.

    The block contains ``-X^T``, which grows like ``exp(+h |Re lambda|)``, so
    long steps are built from a short one by repeated doubling.
    """
    n = X.shape[0]
    scale = h * max(float(np.max(np.abs(np.linalg.eigvals(X).real), initial=0.0)), 1e-300)
    k = max(0, int(np.ceil(np.log2(scale))) + 1) if scale > 1 else 0
    hs = h / 2 ** k
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = X
    blk[:n, n:] = Y
    blk[n:, n:] = -X.T
    E = sla.expm(hs * blk)
    phi = E[:n, :n]
    W = E[:n, n:] @ phi.T
    for _ in range(k):
        # C(2s) = phi (phi C phi^T - W) phi^T - W
        W = phi @ W @ phi.T + W
        phi = phi @ phi
    return phi, (W - W.T) / 2


def covariance_flow(gen, C0, t_grid):
    """Covariance matrices at each time of ``t_grid`` (starting from ``C0`` at
    ``t_grid[0]``)."""
    C = check_covariance(C0)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-d grid")
    out = [C.copy()]
    dt = np.diff(t)
    cache = {}
    for h in dt:
        key = round(h, 14)
        if key not in cache:
            cache[key] = _step_operators(gen.X, gen.Y, h)
        phi, W = cache[key]
        C = phi @ C @ phi.T - W
        C = (C - C.T) / 2
        out.append(C)
    return out


def ness_covariance(gen):
    """Unique stationary covariance, solving ``X C + C X^T = Y``."""
    lam = gen.eigenvalues()
    if np.max(lam.real) >= -UNIQUE_TOL:
        raise ValueError("X has an eigenvalue on the imaginary axis; the stationary "
                         "state is not unique")
    C = sla.solve_continuous_lyapunov(gen.X, gen.Y)
    C = (C - C.T) / 2
    resid = np.max(np.abs(gen.X @ C + C @ gen.X.T - gen.Y))
    if resid > 1e-10 * max(1.0, np.max(np.abs(gen.Y))):
        raise np.linalg.LinAlgError(f"Lyapunov residual {resid:.2e} too large")
    return C


def stationarity_residual(gen, C):
    return float(np.max(np.abs(gen.X @ C + C @ gen.X.T - gen.Y)))


def source_term(gen0, gen1, C0, check=True):
    """``C1 = X1 C0 + C0 X1^T - Y1`` after checking that ``C0`` is stationary."""
    C0 = np.asarray(C0, dtype=float)
    if gen0.H.shape != gen1.H.shape or C0.shape != gen0.H.shape:
        raise ValueError("dimension mismatch between generators and covariance")
    if check:
        r = stationarity_residual(gen0, C0)
        if r > STATIONARY_TOL:
            raise NotSteadyError(f"C0 is not stationary for gen0 (residual {r:.2e})")
    return gen1.X @ C0 + C0 @ gen1.X.T - gen1.Y


# --------------------------------------------------------------------------
# response


def chi_quasifree_time(gen0, gen1, C0, A, t_grid, check=True):
    """``chi(t) = Tr(A^T exp(t X0) C1 exp(t X0^T)) / 4``."""
    A = _matrix(A)
    C1 = source_term(gen0, gen1, C0, check)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be a non-empty increasing grid of t >= 0")
    X = gen0.X
    vals = np.empty(t.size)
    dt = np.diff(t)
    uniform = t.size > 1 and np.allclose(dt, dt[0], rtol=1e-12, atol=0)
    step = sla.expm(dt[0] * X) if uniform else None
    phi = sla.expm(t[0] * X)
    for k in range(t.size):
        if k > 0:
            phi = step @ phi if uniform else sla.expm(t[k] * X)
        vals[k] = 0.25 * np.sum(A * (phi @ C1 @ phi.T))
    return ResponseSeries(t, vals, "Gamma(A)", "quasi-free")


class _SchurResolvent:
    """Applies ``(omega - i Xhat + i eps)^{-1}`` through a complex Schur form."""

    def __init__(self, X):
        T, Q = sla.schur(np.asarray(X, dtype=complex), output="complex")
        self.T, self.Q = T, Q
        self.Tc = T.conj()

    def __call__(self, omega, eps, C1):
        # (omega + i eps) R - i (X R + R X^T) = C1  <=>  (X + cI) R + R X^T = i C1
        c = 1j * omega - eps
        n = self.T.shape[0]
        rhs = self.Q.conj().T @ (1j * C1) @ self.Q.conj()
        Rt, scale, info = lapack.ztrsyl(self.T + c * np.eye(n), self.Tc, rhs,
                                        trana="N", tranb="C")
        if info < 0:
            raise ValueError(f"ztrsyl argument error {info}")
        if info == 1:
            raise ValueError(f"resolvent is singular at omega = {omega:g}; use epsilon > 0")
        return self.Q @ (Rt / scale) @ self.Q.T


def _omega(omega_grid):
    w = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    if w.size == 0:
        raise ValueError("omega grid is empty")
    return w


def chi_quasifree_freq(gen0, gen1, C0, A, omega_grid, epsilon=0.0, method="linear",
                       check=True):
    """``chi(omega) = (i/4) Tr(A^T (omega - i Xhat0 + i eps)^{-1} C1)``.

    ``method="spectral"`` uses the eigendecomposition of ``X0`` and falls back
    to the Schur solve with a warning when ``X0`` is close to defective.
    """
    A = _matrix(A)
    C1 = source_term(gen0, gen1, C0, check)
    w = _omega(omega_grid)
    if method == "spectral":
        lam, V = np.linalg.eig(gen0.X)
        if np.linalg.cond(V) < COND_MAX:
            Ahat = V.T @ A.T @ V
            Vinv = np.linalg.inv(V)
            Ccheck = Vinv @ C1 @ Vinv.T
            num = Ahat * Ccheck.T  # [Ahat]_kq [Ccheck]_qk
            poles = lam[:, None] + lam[None, :]
            vals = np.array([0.25j * np.sum(num / (om - 1j * poles + 1j * epsilon))
                             for om in w])
            return FrequencyResponse(w, vals, epsilon, "Gamma(A)", "quasi-free",
                                     {"method": "spectral"})
        warnings.warn("X0 is numerically defective; using the Schur solve instead",
                      RuntimeWarning, stacklevel=2)
    elif method != "linear":
        raise ValueError("method must be 'linear' or 'spectral'")
    res = _SchurResolvent(gen0.X)
    vals = np.array([0.25j * np.sum(A * res(om, epsilon, C1)) for om in w])
    return FrequencyResponse(w, vals, epsilon, "Gamma(A)", "quasi-free",
                             {"method": "linear"})


def single_particle_mhr(gen0, gen1, C0, Omega, epsilon=0.0, check=True):
    """``||(Omega - i Xhat0 + i eps)^{-1} C1||_1 / 4``; scalar or array ``Omega``."""
    C1 = source_term(gen0, gen1, C0, check)
    res = _SchurResolvent(gen0.X)
    w = np.asarray(Omega, dtype=float)
    vals = np.array([0.25 * np.sum(np.linalg.svd(res(om, epsilon, C1), compute_uv=False))
                     for om in np.atleast_1d(w)])
    return float(vals[0]) if w.ndim == 0 else vals


def hamiltonian_perturbation(B):
    """Quasi-free data of ``-i[Gamma(B), .]``."""
    return QuasiFreeGenerator(_matrix(B), ())


def dissipative_part(gen):
    """``L0 + i[H, .]``, i.e. the generator with its Hamiltonian removed."""
    return QuasiFreeGenerator(np.zeros_like(gen.H), gen.lvecs)
