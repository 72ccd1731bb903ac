"""Two-body matrices in the product basis of displaced oscillator states.

Well 1 sits at +l/2 and well 2 at -l/2. The contact matrix element

    U[(m,n),(k,l)] = gamma * int Phi1_m(x - l/2) Phi1_k(x - l/2) Phi2_n(x + l/2) Phi2_l(x + l/2) dx

is a polynomial of degree m+k+n+l times one Gaussian, so a Gauss-Hermite rule
with enough nodes integrates it exactly. No interpolation tables are needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .basis import BasisTruncation, PhysicalParams, hermite_functions, momentum_matrix


@dataclass(frozen=True)
class CouplingMatrices:
    u_matrix: np.ndarray | None
    m_matrix: np.ndarray | None
    separation: float | None = None


@dataclass
class OmegaCurve:
    """Sampled controlled-phase rate and its located extrema.

    ``extrema`` holds dicts with keys ``l``, ``omega`` and ``kind`` ("max"/"min").
    """

    l: np.ndarray
    omega: np.ndarray
    extrema: list[dict] = field(default_factory=list)

    @property
    def maximum(self) -> dict | None:
        maxima = [e for e in self.extrema if e["kind"] == "max"]
        return max(maxima, key=lambda e: e["omega"]) if maxima else None


class OverlapRule:
    """Exact quadrature for products of two well-1 and two well-2 functions."""

    def __init__(self, params: PhysicalParams, n1_max: int, n2_max: int):
        self.params = params
        self.n1_max = n1_max
        self.n2_max = n2_max
        lam1 = params.well1.length_scale
        lam2 = params.well2.length_scale
        self._b1 = 1.0 / lam1 ** 2
        self._b2 = 1.0 / lam2 ** 2
        self._beta = self._b1 + self._b2
        n_nodes = n1_max + n2_max + 2
        y, w = np.polynomial.hermite.hermgauss(n_nodes)
        self._y = y
        self._w = w * np.exp(y * y) / math.sqrt(self._beta)

    def product_functions(self, l) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Well-1 and well-2 functions at the nodes, and the node weights.

        For an array of separations the function arrays gain a middle axis:
        shape (n_max + 1, len(l), n_nodes).
        """
        half = 0.5 * np.asarray(l, dtype=float)[..., None]
        x0 = half * (self._b1 - self._b2) / self._beta
        x = x0 + self._y / math.sqrt(self._beta)
        lam1 = self.params.well1.length_scale
        lam2 = self.params.well2.length_scale
        f1 = hermite_functions(self.n1_max, (x - half) / lam1) / math.sqrt(lam1)
        f2 = hermite_functions(self.n2_max, (x + half) / lam2) / math.sqrt(lam2)
        return f1, f2, self._w

    def matrix(self, l: float) -> np.ndarray:
        return self.matrices(np.array([l]))[0]

    def matrices(self, ls) -> np.ndarray:
        """U(l) for every separation in ``ls``; shape (len(ls), N, N)."""
        f1, f2, w = self.product_functions(np.asarray(ls, dtype=float))
        g = f1[:, None] * f2[None, :]
        g = g.reshape(-1, *g.shape[2:]).transpose(1, 0, 2)
        return self.params.gamma * np.matmul(g * w, g.transpose(0, 2, 1))

    def diagonal_energies(self, l: float) -> np.ndarray:
        """u_mn(l) = U[(m,n),(m,n)] as an (n1+1, n2+1) array."""
        f1, f2, w = self.product_functions(l)
        return self.params.gamma * np.einsum("mj,nj,j->mn", f1 * f1, f2 * f2, w)


def _check_separation(l: float) -> None:
    if l <= 0:
        raise ValueError("separation must be positive")
    if l <= 1.0:
        warnings.warn(
            f"separation l={l:g} <= 1 length unit: first-order interaction energies "
            "are unreliable at this overlap",
            stacklevel=3,
        )


def interaction_matrix(l: float, params: PhysicalParams, trunc: BasisTruncation) -> CouplingMatrices:
    """U(l) over the truncated product basis (flat index m * (n2_max+1) + n)."""
    _check_separation(l)
    rule = OverlapRule(params, trunc.n1_max, trunc.n2_max)
    return CouplingMatrices(rule.matrix(l), None, l)


def kinetic_matrix(params: PhysicalParams, trunc: BasisTruncation) -> CouplingMatrices:
    """M = <Psi_mn| p2 - p1 |Psi_kl>, independent of the separation."""
    p1 = momentum_matrix(trunc.n1_max, params.well1)
    p2 = momentum_matrix(trunc.n2_max, params.well2)
    eye1 = np.eye(trunc.n1_max + 1)
    eye2 = np.eye(trunc.n2_max + 1)
    m = np.kron(eye1, p2) - np.kron(p1, eye2)
    return CouplingMatrices(None, m, None)


def interaction_energy(m: int, n: int, l: float, params: PhysicalParams) -> float:
    """First-order interaction energy u_mn(l) = U[(m,n),(m,n)]."""
    if l < 0:
        raise ValueError("separation must be non-negative")
    rule = OverlapRule(params, max(m, 1), max(n, 1))
    return float(rule.diagonal_energies(l)[m, n])


def omega_of_l(l, params: PhysicalParams) -> np.ndarray | float:
    """Controlled phase per unit time -(u00 + u11 - u01 - u10) at separation(s) ``l``."""
    rule = OverlapRule(params, 1, 1)
    ls = np.atleast_1d(np.asarray(l, dtype=float))
    out = np.empty(ls.shape)
    for i, li in enumerate(ls):
        u = rule.diagonal_energies(li)
        out[i] = -(u[0, 0] + u[1, 1] - u[0, 1] - u[1, 0])
    return out if np.ndim(l) else float(out[0])


def _omega_slope(l: float, rule: OverlapRule, h: float = 1e-5) -> float:
    def om(x):
        u = rule.diagonal_energies(x)
        return -(u[0, 0] + u[1, 1] - u[0, 1] - u[1, 0])

    return (om(l + h) - om(l - h)) / (2 * h)


def find_omega_extrema(
    params: PhysicalParams,
    l_range: tuple[float, float] = (1.0, 6.0),
    n_samples: int = 1001,
    xtol: float = 1e-9,
) -> OmegaCurve:
    """Sample Omega(l) and locate every interior extremum.

    Extrema are bracketed by sign changes of the sampled slope and refined by
    root finding on the central-difference derivative.
    """
    lo, hi = l_range
    if not 0 < lo < hi:
        raise ValueError("l_range must satisfy 0 < lo < hi")
    ls = np.linspace(lo, hi, n_samples)
    om = np.asarray(omega_of_l(ls, params))
    curve = OmegaCurve(ls, om)
    if params.gamma == 0:
        return curve
    rule = OverlapRule(params, 1, 1)
    slopes = np.array([_omega_slope(x, rule) for x in ls])
    scale = np.max(np.abs(slopes))
    for i in range(n_samples - 1):
        s0, s1 = slopes[i], slopes[i + 1]
        if s0 == 0 or np.sign(s0) == np.sign(s1) or max(abs(s0), abs(s1)) < 1e-12 * scale:
            continue
        x = brentq(_omega_slope, ls[i], ls[i + 1], args=(rule,), xtol=xtol)
        kind = "max" if s0 > 0 else "min"
        curve.extrema.append({"l": x, "omega": float(omega_of_l(x, params)), "kind": kind})
    return curve


class TwoWellModel:
    """Everything the propagator needs for one (params, truncation) pair.

    The moving-basis Hamiltonian is

        H(l, ldot) = diag(e_m + e_n) + U(l) + (ldot / 2) M,

    where the factor 1/2 arises because each well moves by l/2.
    """

    def __init__(self, params: PhysicalParams, trunc: BasisTruncation):
        self.params = params
        self.trunc = trunc
        self.rule = OverlapRule(params, trunc.n1_max, trunc.n2_max)
        e1 = params.well1.frequency * (np.arange(trunc.n1_max + 1) + 0.5)
        e2 = params.well2.frequency * (np.arange(trunc.n2_max + 1) + 0.5)
        self.energies = (e1[:, None] + e2[None, :]).ravel()
        self.m_matrix = kinetic_matrix(params, trunc).m_matrix
        self.comp = trunc.computational_indices()

    @property
    def size(self) -> int:
        return self.trunc.size

    def u_matrix(self, l: float) -> np.ndarray:
        return self.rule.matrix(l)

    def u_matrices(self, ls) -> np.ndarray:
        return self.rule.matrices(ls)

    def hamiltonian(self, l: float, ldot: float) -> np.ndarray:
        h = self.u_matrix(l).astype(complex)
        h[np.diag_indices_from(h)] += self.energies
        if ldot:
            h += (0.5 * ldot) * self.m_matrix
        return h
