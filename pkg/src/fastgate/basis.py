"""Single-well harmonic oscillator states and the two-well physical parameters.

Units: hbar = 1, energies in units of the well-1 quantum (omega_1 = 1), times in
1/omega_1. Lengths are in an arbitrary but common unit; both wells hold the same
atomic species, so ``frequency * length_scale**2`` (= hbar/m) is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PI_QUARTER = math.pi ** -0.25


@dataclass(frozen=True)
class OscillatorSpec:
    """One harmonic well.

    Attributes
    ----------
    frequency : float
        Angular frequency in units of omega_1.
    length_scale : float
        Oscillator length sqrt(hbar / (m * frequency)) in the model length unit.
    """

    frequency: float
    length_scale: float

    def __post_init__(self):
        if not (self.frequency > 0 and self.length_scale > 0):
            raise ValueError("frequency and length_scale must be positive")

    @classmethod
    def natural(cls, frequency: float) -> "OscillatorSpec":
        """Well in units where hbar = m = 1, so length_scale = frequency**-0.5."""
        return cls(frequency, frequency ** -0.5)

    @property
    def hbar_over_m(self) -> float:
        return self.frequency * self.length_scale ** 2


@dataclass(frozen=True)
class BasisTruncation:
    """Highest retained level in each well (computational levels are 0 and 1)."""

    n1_max: int = 8
    n2_max: int = 8

    def __post_init__(self):
        if self.n1_max < 2 or self.n2_max < 2:
            raise ValueError("truncation must keep at least levels 0..2 in each well")

    @property
    def shape(self) -> tuple[int, int]:
        return self.n1_max + 1, self.n2_max + 1

    @property
    def size(self) -> int:
        return (self.n1_max + 1) * (self.n2_max + 1)

    def index(self, m: int, n: int) -> int:
        """Flat index of the product state |m, n>."""
        return m * (self.n2_max + 1) + n

    def computational_indices(self) -> list[int]:
        """Flat indices of |00>, |01>, |10>, |11> in that order."""
        return [self.index(m, n) for m in (0, 1) for n in (0, 1)]


@dataclass(frozen=True)
class PhysicalParams:
    """Two harmonic wells coupled by a 1D contact interaction.

    ``gamma = 2 pi omega_tr a_s`` multiplies delta(x1 - x2);
    ``epsilon = 2 sqrt(pi) a_s omega_tr / lambda_tot`` equals the ground-state
    interaction energy at zero separation, with lambda_tot**2 = lambda_1**2 + lambda_2**2.
    Both are derived from (a_s, omega_tr) and cannot be set independently.
    """

    well1: OscillatorSpec
    well2: OscillatorSpec
    transverse_frequency: float
    scattering_length: float
    gamma: float = field(init=False)
    epsilon: float = field(init=False)

    def __post_init__(self):
        if self.transverse_frequency <= 0:
            raise ValueError("transverse_frequency must be positive")
        if self.scattering_length < 0:
            raise ValueError("scattering_length must be non-negative")
        if math.isclose(self.well1.frequency, self.well2.frequency, rel_tol=1e-12):
            raise ValueError("wells must have different frequencies (degenerate qubits)")
        if not math.isclose(self.well1.hbar_over_m, self.well2.hbar_over_m, rel_tol=1e-9):
            raise ValueError("wells must share hbar/m: frequency * length_scale**2 differs")
        gamma = 2 * math.pi * self.transverse_frequency * self.scattering_length
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "epsilon", gamma / (math.sqrt(math.pi) * self.lambda_tot))

    @property
    def lambda_tot(self) -> float:
        return math.hypot(self.well1.length_scale, self.well2.length_scale)

    @classmethod
    def from_ratio(
        cls,
        length_ratio: float = 1.2,
        *,
        epsilon: float | None = None,
        scattering_length: float | None = None,
        transverse_frequency: float = 10.0,
        length_unit: str = "well2",
    ) -> "PhysicalParams":
        """Build wells with lambda_2 = length_ratio * lambda_1 and omega_1 = 1.

        ``length_unit`` fixes what "1" means for lengths: ``"well2"`` sets
        lambda_2 = 1, ``"well1"`` sets lambda_1 = 1, ``"total"`` sets
        lambda_1**2 + lambda_2**2 = 1. Exactly one of ``epsilon`` and
        ``scattering_length`` must be given.
        """
        if (epsilon is None) == (scattering_length is None):
            raise ValueError("give exactly one of epsilon or scattering_length")
        if length_ratio <= 0:
            raise ValueError("length_ratio must be positive")
        if length_unit == "well2":
            lam1 = 1.0 / length_ratio
        elif length_unit == "well1":
            lam1 = 1.0
        elif length_unit == "total":
            lam1 = 1.0 / math.sqrt(1.0 + length_ratio ** 2)
        else:
            raise ValueError(f"unknown length_unit {length_unit!r}")
        lam2 = length_ratio * lam1
        well1 = OscillatorSpec(1.0, lam1)
        well2 = OscillatorSpec(1.0 / length_ratio ** 2, lam2)
        if epsilon is not None:
            lam_tot = math.hypot(lam1, lam2)
            scattering_length = epsilon * lam_tot / (2 * math.sqrt(math.pi) * transverse_frequency)
        return cls(well1, well2, transverse_frequency, scattering_length)

    def with_scattering_length(self, a_s: float) -> "PhysicalParams":
        return PhysicalParams(self.well1, self.well2, self.transverse_frequency, a_s)

    def scaled(self, factor: float) -> "PhysicalParams":
        """Same wells with the interaction multiplied by ``factor``."""
        return self.with_scattering_length(self.scattering_length * factor)


def level_energy(n: int, spec: OscillatorSpec) -> float:
    """Energy omega * (n + 1/2) of level ``n``."""
    if n < 0:
        raise ValueError("level index must be non-negative")
    return spec.frequency * (n + 0.5)


def hermite_functions(n_max: int, xi: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions psi_0..psi_n_max at dimensionless ``xi``.

    Returns an array of shape (n_max + 1, *xi.shape). Uses the upward recurrence
    on the normalized functions, which stays finite for large n.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max + 1,) + xi.shape)
    out[0] = PI_QUARTER * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def wavefunction(n: int, spec: OscillatorSpec, x) -> np.ndarray | float:
    """Real, normalized eigenfunction Phi_n of the well centred at the origin."""
    if n < 0:
        raise ValueError("level index must be non-negative")
    lam = spec.length_scale
    vals = hermite_functions(n, np.asarray(x, dtype=float) / lam)[n] / math.sqrt(lam)
    return vals if vals.ndim else float(vals)


def momentum_element(m: int, k: int, spec: OscillatorSpec) -> complex:
    """<Phi_m| -i d/dx |Phi_k> for real Hermite functions (hbar = 1).

    Nonzero only for |m - k| = 1: -i sqrt(k/2)/lambda for m = k - 1 and
    +i sqrt((k+1)/2)/lambda for m = k + 1.
    """
    if m < 0 or k < 0:
        raise ValueError("level indices must be non-negative")
    lam = spec.length_scale
    if m == k - 1:
        return -1j * math.sqrt(k / 2.0) / lam
    if m == k + 1:
        return 1j * math.sqrt((k + 1) / 2.0) / lam
    return 0j


def momentum_matrix(n_max: int, spec: OscillatorSpec) -> np.ndarray:
    """Dense (n_max+1)^2 matrix of momentum elements."""
    p = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for k in range(1, n_max + 1):
        p[k - 1, k] = momentum_element(k - 1, k, spec)
        p[k, k - 1] = momentum_element(k, k - 1, spec)
    return p
