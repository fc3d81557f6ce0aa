"""Boundary-driven dissipative XY chain.

Majorana ordering is interleaved: ``a_j = m_{1,j}`` sits at index ``2j`` and
``b_j = m_{2,j}`` at ``2j + 1`` (sites ``j = 0..N-1``). With
``sz_j = -i a_j b_j`` one has ``sz_j = 2 n_j - 1``.
"""

import numpy as np

from .core import QuasiFreeGenerator, ness_covariance


def _a(j):
    return 2 * j


def _b(j):
    return 2 * j + 1


def _add(M, k, l, c):
    # c * i m_k m_l  ->  M[k, l] += 2c, M[l, k] -= 2c
    M[k, l] += 2 * c
    M[l, k] -= 2 * c


def critical_field(gamma):
    return 1.0 - gamma ** 2


def xy_hamiltonian(N, gamma, h):
    """Majorana matrix of ``sum (1+g)/2 sx sx + (1-g)/2 sy sy + h sum sz``."""
    if N < 2:
        raise ValueError("the chain needs N >= 2 sites")
    H = np.zeros((2 * N, 2 * N))
    for j in range(N):
        _add(H, _a(j), _b(j), -h)
    for j in range(N - 1):
        _add(H, _b(j), _a(j + 1), (1 + gamma) / 2)
        _add(H, _a(j), _b(j + 1), -(1 - gamma) / 2)
    return H


def lowering_vector(N, site):
    """Majorana vector of ``f_site = (a - i b)/2``."""
    v = np.zeros(2 * N, dtype=complex)
    v[_a(site)], v[_b(site)] = 0.5, -0.5j
    return v


def build_xy_chain(N, gamma, h, rates):
    """Quasi-free generator of the chain with baths on sites 1 and N.

    ``rates = (G1L, G2L, G1R, G2R)``: ``G1`` multiplies ``s^-`` and ``G2``
    multiplies ``s^+`` on the corresponding boundary spin. The parity string
    of ``s^-_N`` is dropped (linear Lindblad vectors).
    """
    rates = tuple(float(r) for r in rates)
    if len(rates) != 4 or min(rates) < 0:
        raise ValueError("rates must be four non-negative numbers")
    H = xy_hamiltonian(N, gamma, h)
    g1l, g2l, g1r, g2r = rates
    lvecs = []
    for site, gm, gp in ((0, g1l, g2l), (N - 1, g1r, g2r)):
        f = lowering_vector(N, site)
        lvecs.append(np.sqrt(gm) * f)
        lvecs.append(np.sqrt(gp) * f.conj())
    return QuasiFreeGenerator(H, tuple(lvecs))


def rates_from_temperatures(TL, TR, h, G1L=1.0, G1R=1.0):
    """``(G1L, G2L, G1R, G2R)`` with ``G2/G1 = exp(-2h/T)`` at each end."""
    if TL <= 0 or TR <= 0:
        raise ValueError("temperatures must be positive")
    return (G1L, G1L * np.exp(-2 * h / TL), G1R, G1R * np.exp(-2 * h / TR))


def correlation_length(gamma, h):
    """``1 / (4 arccosh(h / h_c))`` with ``h_c = 1 - gamma^2``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    hc = critical_field(gamma)
    if h < hc:
        raise ValueError(f"correlation length formula needs h >= h_c = {hc:g}")
    if h == hc:
        return np.inf
    return float(1.0 / (4 * np.arccosh(h / hc)))


def sz_matrix(N, site):
    """Majorana matrix of ``sz_site``."""
    M = np.zeros((2 * N, 2 * N))
    M[_a(site), _b(site)] = -2.0
    M[_b(site), _a(site)] = 2.0
    return M


def total_sz_matrix(N):
    return sum(sz_matrix(N, j) for j in range(N))


def sz_expectations(C):
    """``<sz_j> = -C[a_j, b_j]`` for every site."""
    C = np.asarray(C)
    N = C.shape[0] // 2
    return np.array([-C[_a(j), _b(j)] for j in range(N)])


def zz_connected(C, n, m):
    """Connected ``<sz_n sz_m>`` of a Gaussian state (Wick, ``n != m``)."""
    C = np.asarray(C)
    an, bn, am, bm = _a(n), _b(n), _a(m), _b(m)
    return float(-C[an, am] * C[bn, bm] + C[an, bm] * C[bn, am])


def ness_zz_correlations(gen, n, r_max, C=None):
    """Connected correlators ``<sz_n sz_{n+r}>_c`` for ``r = 1..r_max``."""
    N = gen.L
    if not 0 <= n < N:
        raise ValueError(f"site {n} outside the chain")
    if r_max < 1 or n + r_max >= N:
        raise ValueError(f"n + r_max = {n + r_max} is beyond the chain of {N} sites")
    C = ness_covariance(gen) if C is None else np.asarray(C)
    return np.array([zz_connected(C, n, n + r) for r in range(1, r_max + 1)])


def product_covariance(sz):
    """Covariance of a product state with given ``<sz_j>``."""
    sz = np.asarray(sz, dtype=float)
    N = sz.size
    C = np.zeros((2 * N, 2 * N))
    for j, s in enumerate(sz):
        C[_a(j), _b(j)] = -s
        C[_b(j), _a(j)] = s
    return C
