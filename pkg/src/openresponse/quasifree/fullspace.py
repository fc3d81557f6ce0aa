"""Full Hilbert-space (2^N dimensional) versions of quasi-free objects.

Used to cross-check the covariance engine on small chains. Site 0 is the
leftmost tensor factor.
"""

from functools import reduce

import numpy as np

from ..lindblad import LindbladGenerator
from ..opcore import IDENTITY2, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, sandwich


def site_operator(op, site, N):
    factors = [IDENTITY2] * N
    factors[site] = op
    return reduce(np.kron, factors)


def jordan_wigner_majoranas(N):
    """Majoranas ``[a_0, b_0, a_1, b_1, ...]`` with ``f_j = prod_{k<j}(-sz_k) s^-_j``."""
    out = []
    for j in range(N):
        string = reduce(np.kron, [-SIGMA_Z] * j + [IDENTITY2] * (N - j))
        f = string @ site_operator(SIGMA_MINUS, j, N)
        fd = f.conj().T
        out.append(f + fd)
        out.append(1j * (f - fd))
    return out


def quadratic_operator(M, majoranas):
    """``Gamma(M) = (i/4) sum_ij M_ij m_i m_j``."""
    d = majoranas[0].shape[0]
    out = np.zeros((d, d), dtype=complex)
    for i, mi in enumerate(majoranas):
        for j, mj in enumerate(majoranas):
            if M[i, j] != 0:
                out += M[i, j] * (mi @ mj)
    return 0.25j * out


def covariance_from_density_matrix(rho, majoranas):
    """``C_ij = (i/2) Tr(rho [m_i, m_j])``."""
    n = len(majoranas)
    C = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            c = 0.5j * np.trace(rho @ (majoranas[i] @ majoranas[j]
                                       - majoranas[j] @ majoranas[i]))
            C[i, j], C[j, i] = c.real, -c.real
    return C


def full_xy_generator(N, gamma, h, rates):
    """Spin-space Lindblad generator of the boundary-driven XY chain."""
    H = 0
    for j in range(N - 1):
        H = H + 0.5 * (1 + gamma) * site_operator(SIGMA_X, j, N) @ site_operator(SIGMA_X, j + 1, N)
        H = H + 0.5 * (1 - gamma) * site_operator(SIGMA_Y, j, N) @ site_operator(SIGMA_Y, j + 1, N)
    for j in range(N):
        H = H + h * site_operator(SIGMA_Z, j, N)
    g1l, g2l, g1r, g2r = rates
    jumps = (np.sqrt(g1l) * site_operator(SIGMA_MINUS, 0, N),
             np.sqrt(g2l) * site_operator(SIGMA_PLUS, 0, N),
             np.sqrt(g1r) * site_operator(SIGMA_MINUS, N - 1, N),
             np.sqrt(g2r) * site_operator(SIGMA_PLUS, N - 1, N))
    return LindbladGenerator(H, jumps)


def product_state(sz):
    """Diagonal product density matrix with ``<sz_j> = sz[j]``."""
    return reduce(np.kron, [np.diag([(1 + s) / 2, (1 - s) / 2]).astype(complex) for s in sz])


def even_sector(M, N):
    """Restriction of superoperator ``M`` to parity-even operators.

    The covariance engine only sees this sector; parity-odd operators are
    affected by the string that linear Lindblad vectors drop.
    """
    P = reduce(np.kron, [SIGMA_Z] * N)
    w, V = np.linalg.eigh(sandwich(P, P).real)
    E = V[:, w > 0]
    return E.conj().T @ np.asarray(M) @ E
