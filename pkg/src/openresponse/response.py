"""Linear dynamical susceptibilities of Lindblad generators.

All functions take the unperturbed generator as a superoperator matrix
``L0``, a :class:`Perturbation`, a steady state ``rho`` of ``L0`` and a
hermitian observable ``A``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import trapezoid

from . import opcore
from .lindblad import (KERNEL_TOL, LindbladGenerator, build_superoperator, evolve_on_grid,
                       hamiltonian_superoperator, propagate_time_dependent,
                       reduced_resolvent, spectral_projector_P0, trace_functional)
from .opcore import as_operator, vec, unvec

STEADY_TOL = 1e-8
TRACE_ANNIHILATION_TOL = 1e-10


class NotSteadyError(ValueError):
    """The reference state is not annihilated by the unperturbed generator."""


@dataclass(frozen=True)
class Perturbation:
    """Perturbing superoperator ``L1``; ``B`` is set for Hamiltonian kind."""

    superop: np.ndarray
    kind: str = "raw"
    label: str = ""
    B: np.ndarray = None

    def __post_init__(self):
        M = np.asarray(self.superop, dtype=complex)
        d = opcore.superop_dim(M)
        resid = np.max(np.abs(trace_functional(d) @ M), initial=0.0)
        if resid > TRACE_ANNIHILATION_TOL * max(1.0, np.max(np.abs(M), initial=0.0)):
            raise ValueError(
                f"perturbation does not annihilate the trace (residual {resid:.2e})")
        object.__setattr__(self, "superop", M)

    @classmethod
    def hamiltonian(cls, B, label="B"):
        B = as_operator(B)
        if not opcore.is_hermitian(B):
            raise ValueError("Hamiltonian perturbation B must be hermitian")
        return cls(hamiltonian_superoperator(B), "hamiltonian", label, B)

    @classmethod
    def generator(cls, gen, label="L1"):
        return cls(build_superoperator(gen), "generator", label)

    @classmethod
    def raw(cls, M, label="L1"):
        return cls(M, "raw", label)

    @property
    def dim(self):
        return opcore.superop_dim(self.superop)


def as_perturbation(pert):
    if isinstance(pert, Perturbation):
        return pert
    if isinstance(pert, LindbladGenerator):
        return Perturbation.generator(pert)
    return Perturbation.raw(pert)


@dataclass
class ResponseSeries:
    t: np.ndarray
    values: np.ndarray
    observable: str = ""
    perturbation: str = ""
    meta: dict = field(default_factory=dict)


@dataclass
class FrequencyResponse:
    omega: np.ndarray
    values: np.ndarray
    epsilon: float = 0.0
    observable: str = ""
    perturbation: str = ""
    meta: dict = field(default_factory=dict)


def _validate(L0, pert, rho, A, check=True):
    L0 = np.asarray(L0)
    pert = as_perturbation(pert)
    rho, A = as_operator(rho), as_operator(A)
    d = opcore.superop_dim(L0)
    if pert.dim != d or rho.shape[0] != d or A.shape[0] != d:
        raise ValueError("dimension mismatch between generator, perturbation, state "
                         "and observable")
    if check:
        resid = np.max(np.abs(L0 @ vec(rho)))
        if resid > STEADY_TOL:
            raise NotSteadyError(
                f"rho is not a steady state of L0: |L0(rho)| = {resid:.2e} > {STEADY_TOL}")
        if not opcore.is_hermitian(A):
            raise ValueError("observable A must be hermitian")
    return L0, pert, rho, A


def _trace_with(A):
    # Tr(X A) = vec(A^T) . vec(X)
    return vec(as_operator(A).T)


def chi_time(L0, pert, rho, A, t_grid, check=True):
    """``chi(t) = Tr(exp(t L0) L1(rho) A)`` on a grid of ``t >= 0``."""
    L0, pert, rho, A = _validate(L0, pert, rho, A, check)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be a non-empty increasing grid of t >= 0")
    v = pert.superop @ vec(rho)
    vals = evolve_on_grid(L0, v, t) @ _trace_with(A)
    resid = float(np.max(np.abs(vals.imag), initial=0.0))
    return ResponseSeries(t, vals.real.copy(), meta={"imag_residual": resid},
                          perturbation=pert.label)


def default_epsilon(L0, tol=1e-9):
    """``1e-8`` times the spectral span if ``L0`` has non-zero purely
    imaginary eigenvalues, else 0."""
    lam = np.linalg.eigvals(np.asarray(L0))
    span = float(np.max(np.abs(lam), initial=0.0))
    if np.any((np.abs(lam.real) <= tol) & (np.abs(lam.imag) > tol)):
        return 1e-8 * (span if span > 0 else 1.0)
    return 0.0


def _hits_kernel(z, L0):
    # frequencies this close to zero cannot be told apart from the kernel pole
    return abs(z) <= 1e-13 * max(1.0, float(np.max(np.abs(L0), initial=0.0)))


class _Resolvent:
    """Applies ``(omega - i L0 + i eps)^{-1}`` by a linear solve per frequency."""

    def __init__(self, L0, eps):
        self.L0 = np.asarray(L0)
        self.eps = float(eps)
        self.n = self.L0.shape[0]
        self._P0 = None

    def _p0(self):
        if self._P0 is None:
            self._P0 = spectral_projector_P0(self.L0)
        return self._P0

    def __call__(self, omega, v):
        z = omega + 1j * self.eps
        K = z * np.eye(self.n) - 1j * self.L0
        if _hits_kernel(z, self.L0):
            z = 0.0
            K = -1j * self.L0
            # the kernel of L0 is hit exactly; only the range part is finite
            P0 = self._p0()
            vk = P0 @ v
            if np.max(np.abs(vk), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(v))):
                raise ValueError("resolvent is singular at omega = 0 with epsilon = 0 and "
                                 "L1(rho) has a kernel component; use epsilon > 0")
            K = K + 1j * P0
            v = v - vk
        with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
            warnings.simplefilter("error", sla.LinAlgWarning)
            try:
                return sla.solve(K, v)
            except (np.linalg.LinAlgError, sla.LinAlgWarning) as exc:
                raise ValueError(
                    f"resolvent is singular at omega = {omega:g} (an eigenvalue of L0 is "
                    f"purely imaginary); use epsilon > 0") from exc


def chi_freq(L0, pert, rho, A, omega_grid, epsilon=None, check=True):
    """``chi(omega) = i Tr((omega - i L0 + i eps)^{-1} L1(rho) A)``."""
    L0, pert, rho, A = _validate(L0, pert, rho, A, check)
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    if omega.size == 0:
        raise ValueError("omega grid is empty")
    eps = default_epsilon(L0) if epsilon is None else float(epsilon)
    res = _Resolvent(L0, eps)
    v = pert.superop @ vec(rho)
    w = _trace_with(A)
    vals = np.array([1j * (w @ res(om, v)) for om in omega])
    return FrequencyResponse(omega, vals, eps, perturbation=pert.label)


def chi_freq_spectral(L0, pert, rho, A, omega_grid, epsilon=0.0):
    """Eigendecomposition version of :func:`chi_freq`, used as a cross-check."""
    L0, pert, rho, A = _validate(L0, pert, rho, A)
    lam, V = np.linalg.eig(L0)
    if np.linalg.cond(V) > 1e10:
        raise np.linalg.LinAlgError("L0 is numerically defective")
    coef = np.linalg.solve(V, pert.superop @ vec(rho))
    proj = _trace_with(A) @ V
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    kernel = np.abs(lam) <= KERNEL_TOL
    scale = max(1.0, float(np.max(np.abs(coef), initial=0.0)))
    at_zero = [_hits_kernel(om + 1j * epsilon, L0) for om in omega]
    if np.any(np.abs(coef[kernel]) > 1e-12 * scale) and any(at_zero):
        raise ValueError("resolvent is singular at omega = 0 with epsilon = 0 and L1(rho) "
                         "has a kernel component; use epsilon > 0")
    vals = []
    for om, zero in zip(omega, at_zero):
        # kernel modes carry only roundoff at z = 0, mirroring the linear-solve path
        keep = ~kernel if zero else np.ones(lam.size, dtype=bool)
        vals.append(1j * np.sum(proj[keep] * coef[keep] / (om + 1j * epsilon - 1j * lam[keep])))
    vals = np.array(vals)
    return FrequencyResponse(omega, vals, epsilon, perturbation=pert.label)


def mhr(L0, pert, rho, Omega, epsilon=None, check=True):
    """Maximal harmonic response ``||(Omega - i L0 + i eps)^{-1} L1(rho)||_1``.

    ``Omega`` may be a scalar or an array; the return type follows.
    """
    L0, pert, rho, _ = _validate(L0, pert, rho, np.eye(opcore.superop_dim(L0)), check)
    eps = default_epsilon(L0) if epsilon is None else float(epsilon)
    res = _Resolvent(L0, eps)
    v = pert.superop @ vec(rho)
    d = rho.shape[0]
    Om = np.asarray(Omega, dtype=float)
    out = np.array([opcore.trace_norm(unvec(res(om, v), d)) for om in np.atleast_1d(Om)])
    return float(out[0]) if Om.ndim == 0 else out


def mhr_operator(L0, pert, rho, Omega, epsilon=0.0):
    """The operator whose trace norm is the MHR (for bound checks)."""
    L0, pert, rho, _ = _validate(L0, pert, rho, np.eye(opcore.superop_dim(L0)))
    res = _Resolvent(L0, epsilon)
    return unvec(res(float(Omega), pert.superop @ vec(rho)), rho.shape[0])


def thermal_susceptibility(L0, pert, rho, A, check=True):
    """Static steady-state shift ``-Tr(S L1(rho) A)``, ``S`` the reduced resolvent."""
    L0, pert, rho, A = _validate(L0, pert, rho, A, check)
    S = reduced_resolvent(L0)
    val = -(_trace_with(A) @ (S @ (pert.superop @ vec(rho))))
    return float(val.real)


def dissipated_power(L0, B, rho, Omega, amplitude, epsilon=None):
    """Period-averaged power absorbed from the drive ``amplitude cos(Omega t) B``.

    Equals ``-(amplitude^2 / 2) Omega Im chi_BB(Omega)`` with ``chi_BB`` the
    response of ``B`` to ``-i[B, .]``; positive when the drive does work on
    the system.
    """
    if Omega == 0:
        return 0.0
    pert = Perturbation.hamiltonian(B)
    chi = chi_freq(L0, pert, rho, B, [Omega], epsilon).values[0]
    return float(-0.5 * amplitude ** 2 * Omega * chi.imag)


def energy_flows(gen0, B, xi, xi_dot, t_grid):
    """Split ``dE/dt`` under ``H(t) = H0 + xi(t) B`` into drive and bath parts.

    Starts from the unique steady state of ``gen0``. Returns a dict with the
    time grid, the dynamical rate ``xi_dot(t) Tr(B rho(t))``, the
    dissipative rate ``Tr(H(t) L_d(rho(t)))`` and the response ``delta_b``.
    """
    from .lindblad import steady_states

    if not isinstance(gen0, LindbladGenerator):
        raise TypeError("gen0 must be a LindbladGenerator")
    B = as_operator(B)
    L0 = build_superoperator(gen0)
    ss = steady_states(L0)
    if not ss.unique:
        raise ValueError("energy_flows needs a unique steady state")
    rho0 = ss.states[0]
    L1 = hamiltonian_superoperator(B)
    t = np.asarray(t_grid, dtype=float)
    states = propagate_time_dependent(L0, L1, xi, rho0, t)
    dissipator = LindbladGenerator(np.zeros_like(gen0.H), gen0.jumps)
    b0 = np.trace(rho0 @ B).real
    b = np.array([np.trace(r @ B).real for r in states])
    dyn = np.array([xi_dot(s) for s in t]) * b
    diss = np.array([np.trace((gen0.H + xi(s) * B) @ dissipator.apply(r)).real
                     for s, r in zip(t, states)])
    return {"t": t, "dynamical": dyn, "dissipative": diss, "delta_b": b - b0}


def linear_response(chi, drive):
    """Convolution ``int_0^t xi(tau) chi(t - tau) dtau`` by the trapezoid rule.

    ``chi`` is a :class:`ResponseSeries` on a uniform grid starting at 0 and
    ``drive`` holds ``xi`` sampled on the same grid.
    """
    t = np.asarray(chi.t, dtype=float)
    f = np.asarray(drive, dtype=float)
    if f.shape != t.shape:
        raise ValueError("drive must be sampled on the response time grid")
    h = t[1] - t[0]
    if t[0] != 0 or not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise ValueError("linear_response needs a uniform grid starting at 0")
    c = np.asarray(chi.values)
    full = np.convolve(f, c)[: t.size]
    # trapezoid end corrections: half weight on tau = 0 and tau = t
    out = h * (full - 0.5 * f[0] * c - 0.5 * f * c[0])
    out[0] = 0.0
    return out


# --------------------------------------------------------------------------
# Kramers-Kronig


def kramers_kronig(fr, edge_ratio=1e-3):
    """Rebuild ``Re chi`` from ``Im chi`` by a principal-value Hilbert transform.

    ``Re chi(w) = (1/pi) P int Im chi(w') / (w' - w) dw'``. The singular
    point is handled by subtracting ``Im chi(w)``; the subtracted piece
    integrates to a log in closed form. Returns a :class:`FrequencyResponse`
    whose real part is the reconstruction and imaginary part the input.
    """
    w = np.asarray(fr.omega, dtype=float)
    f = np.asarray(fr.values).imag
    vals = np.asarray(fr.values)
    if w.size < 3 or np.any(np.diff(w) <= 0):
        raise ValueError("Kramers-Kronig needs an increasing grid of >= 3 points")
    peak = np.max(np.abs(vals))
    if peak > 0:
        edge = max(abs(vals[0]), abs(vals[-1]))
        if edge > edge_ratio * peak:
            # assume the slowest (1/omega^2) decay of Im chi to size the span
            wmax = max(abs(w[0]), abs(w[-1]))
            need = wmax * np.sqrt(edge / (edge_ratio * peak))
            raise ValueError(
                f"frequency grid too narrow: |chi| at the edges is {edge / peak:.1e} of the "
                f"peak (need < {edge_ratio:g}); extend to roughly |omega| <= {need:.3g}")
    dfdw = np.gradient(f, w)
    a, b = w[0], w[-1]
    out = np.empty_like(f)
    for i, wi in enumerate(w):
        dw = w - wi
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (f - f[i]) / dw
        g[i] = dfdw[i]
        integral = trapezoid(g, w)
        if 0 < i < w.size - 1:
            integral += f[i] * np.log((b - wi) / (wi - a))
        out[i] = integral / np.pi
    return FrequencyResponse(w, out + 1j * f, fr.epsilon, fr.observable, fr.perturbation,
                             {"kramers_kronig": True})
