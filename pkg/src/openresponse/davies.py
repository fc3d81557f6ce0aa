"""Single-qubit Davies maps and their closed-form response functions.

Basis: ``|0>`` and ``|1>`` are the eigenvectors of ``sz`` with eigenvalues
+1 and -1, the Hamiltonian is ``Delta sz / 2`` and the fixed point is
``diag(p, 1 - p)`` with ``p = exp(Delta/2T) / (2 cosh(Delta/2T))``.
"""

from dataclasses import dataclass

import numpy as np

from . import opcore
from .lindblad import LindbladGenerator, build_superoperator
from .opcore import SIGMA_X, SIGMA_Y, SIGMA_Z, as_operator
from .response import ResponseSeries, FrequencyResponse

KET0BRA1 = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
KET1BRA0 = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


@dataclass(frozen=True)
class DaviesQubit:
    """Level splitting ``Delta``, temperature ``T``, relaxation rate ``b``
    and coherence decay rate ``Gamma``."""

    Delta: float
    T: float
    b: float
    Gamma: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("temperature T must be positive")
        if self.b < 0:
            raise ValueError("relaxation rate b must be non-negative")
        if self.Gamma < self.b / 2 - 1e-12:
            raise ValueError(
                f"complete positivity needs Gamma >= b/2 (got Gamma={self.Gamma}, b={self.b})")

    @property
    def p(self):
        # e^{x}/(2 cosh x) = 1/(1 + e^{-2x}), written to avoid overflow
        x = self.Delta / (2 * self.T)
        return float(0.5 * (1 + np.tanh(x)))

    @property
    def polarization(self):
        """``tanh(Delta / 2T) = 2p - 1``."""
        return float(np.tanh(self.Delta / (2 * self.T)))

    @property
    def fixed_point(self):
        return np.diag([self.p, 1 - self.p]).astype(complex)


def davies_map(q, t, ordering="column"):
    """4x4 matrix of the Davies map at time ``t``.

    ``ordering="column"`` uses the package-wide column-stacking
    (rho00, rho10, rho01, rho11); ``ordering="row"`` gives the row-stacked
    layout (rho00, rho01, rho10, rho11).
    """
    if t < 0:
        raise ValueError("Davies map only defined for t >= 0")
    p = q.p
    a = (1 - p) * (1 - np.exp(-q.b * t))
    a_ratio = p * (1 - np.exp(-q.b * t))  # a p / (1 - p)
    c = np.exp(-q.Gamma * t)
    m01 = c * np.exp(-1j * t * q.Delta)  # coefficient of rho01
    m10 = c * np.exp(1j * t * q.Delta)
    if ordering == "row":
        diag = (m01, m10)
    elif ordering == "column":
        diag = (m10, m01)
    else:
        raise ValueError("ordering must be 'column' or 'row'")
    phi = np.zeros((4, 4), dtype=complex)
    phi[0, 0], phi[0, 3] = 1 - a, a_ratio
    phi[1, 1], phi[2, 2] = diag
    phi[3, 0], phi[3, 3] = a, 1 - a_ratio
    return phi


def davies_generator(q, hamiltonian=True):
    """Lindblad form of the Davies map's generator.

    Jumps ``sqrt(b p)|0><1|``, ``sqrt(b (1-p))|1><0|`` and
    ``sqrt((Gamma - b/2)/2) sz``; Hamiltonian ``Delta sz / 2``.
    """
    p = q.p
    gamma_phi = max(q.Gamma - q.b / 2, 0.0)
    jumps = [np.sqrt(q.b * p) * KET0BRA1, np.sqrt(q.b * (1 - p)) * KET1BRA0]
    if gamma_phi > 0:
        jumps.append(np.sqrt(gamma_phi / 2) * SIGMA_Z)
    H = 0.5 * q.Delta * SIGMA_Z if hamiltonian else np.zeros((2, 2), dtype=complex)
    return LindbladGenerator(H, tuple(jumps))


def davies_parts(q):
    """``(K, D)`` superoperators with ``K = -i[H, .]`` and ``D`` dissipative."""
    full = build_superoperator(davies_generator(q))
    D = build_superoperator(davies_generator(q, hamiltonian=False))
    return full - D, D


def thermal_qubit_generator(Delta, gammas):
    """``H = Delta sz / 2`` with jumps ``sqrt(g-)|0><1|`` and ``sqrt(g+)|1><0|``.

    ``gammas = (g+, g-)``; the steady population of ``|0>`` is
    ``g- / (g+ + g-)``.
    """
    gp, gm = gammas
    if gp < 0 or gm < 0:
        raise ValueError("rates must be non-negative")
    return LindbladGenerator(0.5 * Delta * SIGMA_Z,
                             (np.sqrt(gm) * KET0BRA1, np.sqrt(gp) * KET1BRA0))


def _offdiag_product(A, B):
    A, B = as_operator(A), as_operator(B)
    if A.shape != (2, 2) or B.shape != (2, 2):
        raise ValueError("qubit observables must be 2x2")
    if not (opcore.is_hermitian(A) and opcore.is_hermitian(B)):
        raise ValueError("A and B must be hermitian")
    return A[0, 1] * B[1, 0]


def chi_qubit_time(q, A, B, t_grid):
    """``2 exp(-Gamma t) sin(Delta t + phi) tanh(Delta/2T) |A01 B10|``."""
    z = _offdiag_product(A, B)
    t = np.asarray(t_grid, dtype=float)
    phi = np.angle(z) if abs(z) > 0 else 0.0
    vals = 2 * np.exp(-q.Gamma * t) * np.sin(t * q.Delta + phi) * q.polarization * abs(z)
    vals = np.where(t >= 0, vals, 0.0)
    return ResponseSeries(t, vals, "A", "-i[B,.]", {"closed_form": "davies"})


def chi_qubit_freq(q, A, B, omega_grid):
    z = _offdiag_product(A, B)
    w = np.asarray(omega_grid, dtype=float)
    phi = np.angle(z) if abs(z) > 0 else 0.0
    vals = q.polarization * abs(z) * (
        np.exp(1j * phi) / (w + q.Delta + 1j * q.Gamma)
        - np.exp(-1j * phi) / (w - q.Delta + 1j * q.Gamma))
    return FrequencyResponse(w, vals, 0.0, "A", "-i[B,.]", {"closed_form": "davies"})


def mhr_qubit(Delta, beta, gammas, B, Omega, rtol=1e-9):
    """Closed-form MHR of the thermal qubit under ``-i[B, .]``.

    ``gammas = (g+, g-)`` must satisfy ``g+/g- = exp(-beta Delta)``.
    """
    gp, gm = gammas
    if gm <= 0 or abs(gp / gm - np.exp(-beta * Delta)) > rtol * max(1.0, np.exp(-beta * Delta)):
        raise ValueError("rates are not thermal: need gamma_+/gamma_- = exp(-beta Delta)")
    B = as_operator(B)
    gbar = (gp + gm) / 2
    Om = np.asarray(Omega, dtype=float)
    amp = abs(B[0, 1]) * np.tanh(beta * Delta / 2)
    out = sum(amp / np.abs(Om + s * Delta + 1j * gbar) for s in (1, -1))
    return float(out) if Om.ndim == 0 else out


# --------------------------------------------------------------------------
# rotated Davies perturbations


@dataclass(frozen=True)
class RotationAxisAngle:
    axis: tuple
    alpha: float

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ValueError("rotation axis must be a real unit 3-vector")
        object.__setattr__(self, "axis", tuple(float(x) for x in n))

    @property
    def unitary(self):
        """``exp(i alpha n.sigma / 2)``."""
        nx, ny, nz = self.axis
        ns = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
        return np.cos(self.alpha / 2) * np.eye(2) + 1j * np.sin(self.alpha / 2) * ns


def rotated_superoperator(M, U):
    """``X -> U^dag M(U X U^dag) U`` as a column-stacked matrix."""
    U = as_operator(U)
    return np.kron(U.T, U.conj().T) @ np.asarray(M) @ np.kron(U.conj(), U)


def rotated_davies_perturbation(q1, rot, hamiltonian=False):
    """Generator of ``q1`` rotated by ``rot`` (Hamiltonian part dropped by default)."""
    M = build_superoperator(davies_generator(q1, hamiltonian=hamiltonian))
    return rotated_superoperator(M, rot.unitary)


def chi_rotated_davies(q0, q1, rot, A, t_grid):
    """Closed-form response to a purely dissipative Davies perturbation rotated
    about the x axis.

    Only ``q1.Delta / q1.T`` enters, through ``tanh(Delta1 / 2 T1)``.
    """
    if not np.allclose(rot.axis, (1.0, 0.0, 0.0), atol=1e-12):
        raise NotImplementedError(
            "closed form only available for rotations about x; use "
            "rotated_davies_perturbation with response.chi_time for other axes")
    A = as_operator(A)
    if A.shape != (2, 2) or not opcore.is_hermitian(A):
        raise ValueError("A must be a hermitian 2x2 matrix")
    t = np.asarray(t_grid, dtype=float)
    al = rot.alpha
    th0, th1 = q0.polarization, q1.polarization
    b1, g1 = q1.b, q1.Gamma
    pop = np.exp(-q0.b * t) * (A[1, 1] - A[0, 0]).real * (
        (b1 + g1 + (b1 - g1) * np.cos(2 * al)) * th0 - 2 * b1 * np.cos(al) * th1)
    phi = np.angle(A[0, 1]) if abs(A[0, 1]) > 0 else 0.0
    coh = 2 * np.exp(-q0.Gamma * t) * abs(A[0, 1]) * np.sin(t * q0.Delta + phi) * (
        (b1 - g1) * np.sin(2 * al) * th0 - 2 * b1 * np.sin(al) * th1)
    vals = np.where(t >= 0, (pop - coh) / 4, 0.0)
    return ResponseSeries(t, vals, "A", "rotated Davies", {"closed_form": "rotated_x"})
