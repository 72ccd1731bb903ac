"""Gate phase, objective functionals and fidelity measures."""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

TWO_PI = 2 * math.pi


class UndefinedPhaseError(ValueError):
    pass


@dataclass
class GateReport:
    phi: float
    j_phi: float
    fidelity_f: float
    fidelity_d: float
    c_diag: list
    theta: list
    target_phi: float = math.pi

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_diag"] = [[z.real, z.imag] for z in self.c_diag]
        d["phase_error"] = circular_distance(self.phi, self.target_phi)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GateReport":
        d = dict(d)
        d.pop("phase_error", None)
        d["c_diag"] = [complex(re, im) for re, im in d["c_diag"]]
        return cls(**d)


def circular_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    return abs((a - b + math.pi) % TWO_PI - math.pi)


def diagonal_product(c_diag) -> complex:
    c00, c01, c10, c11 = (complex(z) for z in c_diag)
    return c00 * c01.conjugate() * c10.conjugate() * c11


def extract_phase(c_diag) -> float:
    """theta_00 + theta_11 - theta_01 - theta_10 reduced to [0, 2 pi)."""
    if any(z == 0 for z in c_diag):
        raise UndefinedPhaseError("a diagonal amplitude is zero; the gate phase is undefined")
    return cmath.phase(diagonal_product(c_diag)) % TWO_PI


def j_phi(c_diag, target_phi: float) -> float:
    """|c00 conj(c01) conj(c10) c11 - exp(i target_phi)|."""
    return abs(diagonal_product(c_diag) - cmath.exp(1j * target_phi))


def fidelity_f(c_full: np.ndarray, comp=None) -> float:
    """Mean probability that a computational state stays inside the computational subspace.

    ``c_full`` has one row per computational initial state; ``comp`` lists the
    columns of the computational states (defaults to the first four columns
    when ``c_full`` is already 4x4).
    """
    c = np.asarray(c_full)
    block = c if comp is None else c[:, comp]
    return float(np.sum(np.abs(block) ** 2) / 4.0)


def fidelity_d(c_diag) -> float:
    """Mean self-return probability of the four computational states."""
    return float(np.sum(np.abs(np.asarray(c_diag)) ** 2) / 4.0)


def j_gate(c_restricted: np.ndarray, target: np.ndarray) -> float:
    """-|Tr(c G^dagger)|, minimal (-4) when c equals G up to a global phase.

    ``c_restricted[i, j]`` is the amplitude of final state j for initial state
    i, so the operator on the subspace is its transpose.
    """
    op = np.asarray(c_restricted).T
    return -abs(np.trace(op @ np.asarray(target).conj().T))


def cp_gate(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, cmath.exp(1j * phi)])


def composite_objective(kind: str, c_restricted: np.ndarray, target_phi: float, target_gate=None) -> float:
    """Objective by name: ``j_phi``, ``j_phi/f``, ``j_phi/d`` or ``j_gate``."""
    diag = np.diag(c_restricted)
    if kind == "j_phi":
        return j_phi(diag, target_phi)
    if kind == "j_phi/f":
        return j_phi(diag, target_phi) / fidelity_f(c_restricted)
    if kind == "j_phi/d":
        return j_phi(diag, target_phi) / fidelity_d(diag)
    if kind == "j_gate":
        return j_gate(c_restricted, cp_gate(target_phi) if target_gate is None else target_gate)
    raise ValueError(f"unknown objective kind {kind!r}")


def gate_report(c_full: np.ndarray, comp, target_phi: float = math.pi) -> GateReport:
    c = np.asarray(c_full)
    block = c[:, comp]
    diag = np.diag(block).copy()
    return GateReport(
        phi=extract_phase(diag),
        j_phi=j_phi(diag, target_phi),
        fidelity_f=fidelity_f(block),
        fidelity_d=fidelity_d(diag),
        c_diag=list(diag),
        theta=[cmath.phase(z) for z in diag],
        target_phi=target_phi,
    )
