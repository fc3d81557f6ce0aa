"""Operator algebra on a finite-dimensional Hilbert space.

Operators are dense complex ``numpy`` arrays. Superoperators act on
column-stacked vectorisations: ``vec(X) = X.reshape(-1, order="F")``, so
that ``L @ X`` maps to ``kron(I, L) @ vec(X)`` and ``X @ R`` maps to
``kron(R.T, I) @ vec(X)``. Every module in the package uses this
convention.
"""

import numpy as np

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-10
TOL_RANK = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# (sx + i sy)/2 = |0><1| and (sx - i sy)/2 = |1><0|
SIGMA_PLUS = (SIGMA_X + 1j * SIGMA_Y) / 2
SIGMA_MINUS = (SIGMA_X - 1j * SIGMA_Y) / 2

PAULI = {
    "id": IDENTITY2,
    "sx": SIGMA_X,
    "sy": SIGMA_Y,
    "sz": SIGMA_Z,
    "sp": SIGMA_PLUS,
    "sm": SIGMA_MINUS,
}


def as_operator(X):
    """Return ``X`` as a square complex array, raising on bad shape."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {X.shape}")
    return X


def _check_same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch between operators: {sorted(dims)}")


def is_hermitian(X, tol=TOL_HERM):
    X = as_operator(X)
    return bool(np.max(np.abs(X - X.conj().T), initial=0.0) <= tol)


def dag(X):
    return np.conj(np.transpose(X))


def commutator(A, B):
    """Return ``A @ B - B @ A``."""
    A, B = as_operator(A), as_operator(B)
    _check_same_dim(A, B)
    return A @ B - B @ A


def anticommutator(A, B):
    A, B = as_operator(A), as_operator(B)
    _check_same_dim(A, B)
    return A @ B + B @ A


def trace_norm(X):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(X), compute_uv=False)))


def random_hermitian(d, rng, scale=1.0):
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (G + G.conj().T) / 2


def random_density_matrix(d, rng, rank=None):
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


# --------------------------------------------------------------------------
# density matrices


def check_density_matrix(rho, tol_trace=TOL_TRACE, tol_herm=TOL_HERM, tol_psd=TOL_PSD):
    """Validate a density matrix and return it as an array.

    Raises ``ValueError`` naming the first violated property.
    """
    rho = as_operator(rho)
    if not is_hermitian(rho, tol_herm):
        raise ValueError("density matrix is not hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > tol_trace:
        raise ValueError(f"density matrix has trace {tr.real:.3e}, expected 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol_psd:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def is_full_rank(rho, tol=TOL_RANK):
    rho = as_operator(rho)
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() > tol)


def weighted_inner(rho, A, B):
    """State-weighted product ``<A, B>_rho = Tr(rho A^dag B)``."""
    rho, A, B = as_operator(rho), as_operator(A), as_operator(B)
    _check_same_dim(rho, A, B)
    return complex(np.trace(rho @ dag(A) @ B))


# --------------------------------------------------------------------------
# vectorisation


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorised square matrix")
    return v.reshape((d, d), order="F")


def superop_dim(M):
    """Hilbert-space dimension ``d`` of a ``d^2 x d^2`` superoperator."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"superoperator must be square, got shape {M.shape}")
    d = int(round(np.sqrt(M.shape[0])))
    if d * d != M.shape[0]:
        raise ValueError(f"superoperator size {M.shape[0]} is not a perfect square")
    return d


def left_mul(L):
    """Superoperator of ``X -> L @ X``."""
    L = as_operator(L)
    return np.kron(np.eye(L.shape[0]), L)


def right_mul(R):
    """Superoperator of ``X -> X @ R``."""
    R = as_operator(R)
    return np.kron(R.T, np.eye(R.shape[0]))


def sandwich(A, B):
    """Superoperator of ``X -> A @ X @ B``."""
    return np.kron(as_operator(B).T, as_operator(A))


def commutator_superop(H):
    """Superoperator of ``X -> [H, X]``."""
    return left_mul(H) - right_mul(H)


def apply(M, X):
    """Apply superoperator ``M`` to operator ``X``."""
    X = as_operator(X)
    return unvec(np.asarray(M) @ vec(X), X.shape[0])


def hs_dual(M):
    """Hilbert-Schmidt dual: ``<X, M(Y)> = <M*(X), Y>``."""
    return np.conj(np.transpose(M))


def sharp_conjugate(M, rho):
    """Adjoint of ``M`` with respect to ``<.,.>_rho``.

    Computed as ``R_rho^{-1} M* R_rho`` with ``R_rho`` right multiplication
    by ``rho``; requires ``rho`` to be invertible.
    """
    rho = as_operator(rho)
    if not is_full_rank(rho):
        raise ValueError("sharp conjugation needs a full-rank rho (R_rho is not invertible)")
    R = right_mul(rho)
    Rinv = right_mul(np.linalg.inv(rho))
    return Rinv @ hs_dual(M) @ R


def is_detailed_balance(M, rho, tol=1e-10):
    """``True`` iff ``M* R_rho == R_rho M`` entrywise to ``tol``.

    This is the ``rho``-hermiticity condition written so that it also
    makes sense for a rank-deficient ``rho``.
    """
    M = np.asarray(M)
    R = right_mul(rho)
    return bool(np.max(np.abs(hs_dual(M) @ R - R @ M)) <= tol)
