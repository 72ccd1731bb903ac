import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from conftest import oracle_wavefunction
from fastgate.basis import (
    BasisTruncation,
    OscillatorSpec,
    PhysicalParams,
    hermite_functions,
    level_energy,
    momentum_element,
    momentum_matrix,
    wavefunction,
)

UNIT = OscillatorSpec(1.0, 1.0)


def test_level_energy_examples():
    assert level_energy(0, UNIT) == 0.5
    assert level_energy(1, UNIT) == 1.5
    well2 = OscillatorSpec.natural(1 / 1.44)
    assert level_energy(0, well2) == pytest.approx(0.5 / 1.44, rel=1e-15)


def test_level_energy_rejects_negative():
    with pytest.raises(ValueError):
        level_energy(-1, UNIT)


@given(st.integers(0, 40), st.floats(0.1, 10.0))
def test_energy_spacing_is_frequency(n, w):
    spec = OscillatorSpec.natural(w)
    assert level_energy(n + 1, spec) - level_energy(n, spec) == pytest.approx(w, rel=1e-12)


def test_wavefunction_examples():
    assert wavefunction(0, UNIT, 0.0) == pytest.approx(math.pi ** -0.25, rel=1e-15)
    assert wavefunction(1, OscillatorSpec.natural(0.7), 0.0) == 0.0
    assert wavefunction(2, UNIT, 0.0) == pytest.approx(-math.pi ** -0.25 / math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("lam", [0.8, 1.0, 1.3])
def test_wavefunction_matches_scipy_hermite(lam):
    spec = OscillatorSpec(1 / lam ** 2, lam)
    x = np.linspace(-6 * lam, 6 * lam, 101)
    for n in range(12):
        np.testing.assert_allclose(wavefunction(n, spec, x), oracle_wavefunction(n, lam, x), atol=1e-13)


def test_orthonormality_by_quadrature():
    spec = OscillatorSpec(1 / 1.44, 1.2)
    n_max = 10
    for m in range(n_max + 1):
        for k in range(m, n_max + 1):
            val, _ = quad(lambda x: wavefunction(m, spec, x) * wavefunction(k, spec, x), -np.inf, np.inf,
                          epsabs=1e-13, epsrel=1e-13, limit=200)
            assert val == pytest.approx(float(m == k), abs=1e-10)


def test_hermite_recurrence_stays_finite_at_high_order():
    vals = hermite_functions(200, np.linspace(-25, 25, 11))
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(vals)) < 1.0


def test_momentum_examples():
    assert momentum_element(0, 2, UNIT) == 0
    assert abs(momentum_element(0, 1, UNIT)) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert momentum_element(0, 1, UNIT).real == 0
    assert momentum_element(3, 2, UNIT) == momentum_element(2, 3, UNIT).conjugate()


@pytest.mark.parametrize("m,k", [(0, 1), (1, 0), (1, 2), (4, 3), (5, 6), (2, 2), (0, 3)])
def test_momentum_matches_quadrature_of_derivative(m, k):
    lam = 1.2
    spec = OscillatorSpec(1 / lam ** 2, lam)

    def dphi(x):
        # d/dx of the oracle, using H_n' = 2 n H_{n-1}
        xi = x / lam
        base = -xi * oracle_wavefunction(k, lam, x)
        if k:
            base += math.sqrt(2 * k) * oracle_wavefunction(k - 1, lam, x)
        return base / lam

    integral, _ = quad(lambda x: oracle_wavefunction(m, lam, x) * dphi(x), -np.inf, np.inf, epsabs=1e-13)
    assert momentum_element(m, k, spec) == pytest.approx(-1j * integral, abs=1e-10)


def test_momentum_matrix_is_hermitian():
    p = momentum_matrix(9, OscillatorSpec.natural(0.6))
    np.testing.assert_array_equal(p, p.conj().T)
    assert np.all(p.real == 0)


def test_momentum_rejects_negative():
    with pytest.raises(ValueError):
        momentum_element(-1, 0, UNIT)


def test_oscillator_spec_validation():
    with pytest.raises(ValueError):
        OscillatorSpec(0.0, 1.0)
    with pytest.raises(ValueError):
        OscillatorSpec(1.0, -1.0)


def test_truncation_indices():
    t = BasisTruncation(3, 2)
    assert t.size == 12
    assert t.computational_indices() == [0, 1, 3, 4]
    with pytest.raises(ValueError):
        BasisTruncation(1, 4)


def test_params_derive_gamma_and_epsilon():
    p = PhysicalParams.from_ratio(1.2, epsilon=0.05, length_unit="total")
    assert p.lambda_tot == pytest.approx(1.0, rel=1e-15)
    assert p.epsilon == pytest.approx(0.05, rel=1e-13)
    assert p.gamma == pytest.approx(2 * math.pi * p.transverse_frequency * p.scattering_length, rel=1e-15)
    assert p.well2.frequency == pytest.approx(1 / 1.44, rel=1e-15)
    q = p.with_scattering_length(2 * p.scattering_length)
    assert q.epsilon == pytest.approx(0.1, rel=1e-13)


def test_params_reject_degenerate_and_inconsistent_wells():
    w = OscillatorSpec.natural(1.0)
    with pytest.raises(ValueError):
        PhysicalParams(w, OscillatorSpec.natural(1.0), 10.0, 0.01)
    with pytest.raises(ValueError):
        PhysicalParams(w, OscillatorSpec(0.5, 1.0), 10.0, 0.01)
    with pytest.raises(ValueError):
        PhysicalParams.from_ratio(1.2)
    with pytest.raises(ValueError):
        PhysicalParams.from_ratio(1.2, epsilon=0.05, scattering_length=0.01)
