"""Entanglement produced by a controlled-phase gate on pure two-qubit states."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .objectives import TWO_PI, extract_phase

TWO_ROUTE_TOL = 1e-12


@dataclass(frozen=True)
class TwoQubitState:
    """Pure state sum a_mn |m, n> stored as the 2x2 matrix ``amplitudes[m, n]``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError("amplitudes must be a 2x2 matrix")
        norm = float(np.sum(np.abs(a) ** 2))
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-10):
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_vector(cls, vec) -> "TwoQubitState":
        """Build from amplitudes ordered |00>, |01>, |10>, |11>."""
        return cls(np.asarray(vec, dtype=complex).reshape(2, 2))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "TwoQubitState":
        """Haar-random pure state."""
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        return cls.from_vector(v / np.linalg.norm(v))

    @property
    def product_phase(self) -> float:
        """Phase of a00 a11 conj(a10) conj(a01)."""
        a = self.amplitudes
        return cmath.phase(a[0, 0] * a[1, 1] * a[1, 0].conjugate() * a[0, 1].conjugate())


def apply_cp(state: TwoQubitState, phi: float) -> TwoQubitState:
    """Multiply a_11 by exp(i phi)."""
    a = state.amplitudes.copy()
    a[1, 1] *= cmath.exp(1j * phi)
    return TwoQubitState(a)


def _gram_det(a: np.ndarray) -> float:
    return float(np.linalg.det(a @ a.conj().T).real)


def entanglement_delta(state: TwoQubitState, phi: float) -> float:
    """det(A' A'^dagger) - det(A A^dagger) for A' = CP(phi) A.

    Evaluated both as a determinant difference and in the closed form
    2 Re(a00 a11 conj(a10) conj(a01) (1 - exp(i phi))); the two must agree.
    """
    a = state.amplitudes
    by_det = _gram_det(apply_cp(state, phi).amplitudes) - _gram_det(a)
    prod = a[0, 0] * a[1, 1] * a[1, 0].conjugate() * a[0, 1].conjugate()
    closed = 2.0 * (prod * (1 - cmath.exp(1j * phi))).real
    if abs(by_det - closed) > TWO_ROUTE_TOL:
        raise ArithmeticError(f"determinant and closed forms disagree: {by_det} vs {closed}")
    return closed


def entangling_power(phi: float) -> float:
    """Largest entanglement change CP(phi) can produce: sin(phi/2)/4, phi taken mod 2 pi."""
    return 0.25 * math.sin((phi % TWO_PI) / 2)


def max_delta_sampled(phi: float, n_states: int = 100_000, seed: int = 0) -> float:
    """Brute-force maximum of the entanglement change over random pure states."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n_states, 4)) + 1j * rng.normal(size=(n_states, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    prod = v[:, 0] * v[:, 3] * v[:, 2].conj() * v[:, 1].conj()
    return float(np.max(2.0 * (prod * (1 - cmath.exp(1j * phi))).real))


def max_delta_uniform(phi: float, n_phases: int = 4001) -> float:
    """Maximum over states with |a_mn| = 1/2, scanning the product phase.

    Only the phase of the amplitude product enters, so a one-dimensional scan
    followed by a parabolic refinement suffices.
    """
    g = np.linspace(-math.pi, math.pi, n_phases)
    vals = 2.0 * ((np.exp(1j * g) / 16) * (1 - cmath.exp(1j * phi))).real
    i = int(np.argmax(vals))
    if 0 < i < n_phases - 1:
        y0, y1, y2 = vals[i - 1 : i + 2]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            return float(y1 - (y2 - y0) ** 2 / (8 * denom))
    return float(vals[i])


@dataclass(frozen=True)
class ReducedMeasures:
    purity_measure: float
    entropy: float
    det_rho: float
    p: float


def _xlog2x(p: float) -> float:
    return 0.0 if p <= 0.0 else p * math.log2(p)


def reduced_measures(state: TwoQubitState, trace_over: int = 2) -> ReducedMeasures:
    """Purity measure -Tr rho^2, entropy -Tr rho log2 rho and det rho of one qubit.

    ``trace_over`` selects the qubit that is traced out (default qubit 2).
    ``p`` is the larger eigenvalue of the reduced density matrix.
    """
    a = state.amplitudes
    if trace_over == 2:
        rho = a @ a.conj().T
    elif trace_over == 1:
        rho = a.T @ a.conj()
    else:
        raise ValueError("trace_over must be 1 or 2")
    evals = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    p = float(evals[1])
    q = 1.0 - p
    return ReducedMeasures(
        purity_measure=-(p * p + q * q),
        entropy=-(_xlog2x(p) + _xlog2x(q)),
        det_rho=p * q,
        p=p,
    )


@dataclass
class GateClassification:
    is_phase_gate: bool
    phi: float | None
    alpha: tuple[float, float] | None
    beta: tuple[float, float] | None
    global_phase: float | None
    max_offdiag: float
    residuals: dict


def classify_gate(c_restricted, tolerance: float = 1e-6) -> GateClassification:
    """Decide whether a 4x4 block is a P(phi) gate and find its single-qubit shifts.

    Diagonal phases theta_mn satisfy theta_mn + alpha_m + beta_n = m n phi
    (mod 2 pi) up to a common global phase. The convention alpha_0 = beta_0 = 0
    leaves the global phase theta_00 and alpha_1 = theta_00 - theta_10,
    beta_1 = theta_00 - theta_01.
    """
    c = np.asarray(c_restricted, dtype=complex)
    off = c - np.diag(np.diag(c))
    max_off = float(np.max(np.abs(off)))
    diag = np.diag(c)
    mags = np.abs(diag)
    residuals = {"max_offdiag": max_off, "max_modulus_defect": float(np.max(np.abs(1 - mags)))}
    if max_off > tolerance or residuals["max_modulus_defect"] > tolerance:
        return GateClassification(False, None, None, None, None, max_off, residuals)
    theta = np.angle(diag)
    phi = extract_phase(diag)
    g = theta[0]
    alpha = (0.0, float((g - theta[2]) % TWO_PI))
    beta = (0.0, float((g - theta[1]) % TWO_PI))
    return GateClassification(True, phi, alpha, beta, float(g), max_off, residuals)


def synthesize(cls: GateClassification) -> np.ndarray:
    """Diagonal of exp(i g) exp(-i(alpha_m + beta_n)) exp(i m n phi) in |00>,|01>,|10>,|11> order."""
    if not cls.is_phase_gate:
        raise ValueError("not a phase gate")
    out = []
    for m in (0, 1):
        for n in (0, 1):
            out.append(cmath.exp(1j * (cls.global_phase - cls.alpha[m] - cls.beta[n] + m * n * cls.phi)))
    return np.array(out)
