import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastgate.entangle import (
    TwoQubitState,
    apply_cp,
    classify_gate,
    entanglement_delta,
    entangling_power,
    max_delta_sampled,
    max_delta_uniform,
    reduced_measures,
    synthesize,
)
from fastgate.objectives import cp_gate

BELL = TwoQubitState.from_vector([1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
PRODUCT = TwoQubitState.from_vector([1, 0, 0, 0])


def test_apply_cp_examples():
    plus = TwoQubitState.from_vector([0.5, 0.5, 0.5, 0.5])
    np.testing.assert_array_equal(apply_cp(plus, 0.0).amplitudes, plus.amplitudes)
    one_one = TwoQubitState.from_vector([0, 0, 0, 1])
    assert apply_cp(one_one, math.pi).amplitudes[1, 1] == pytest.approx(-1)
    out = apply_cp(plus, math.pi)
    assert reduced_measures(out).entropy == pytest.approx(1.0, abs=1e-12)


def test_delta_examples():
    assert entanglement_delta(PRODUCT, 1.3) == pytest.approx(0.0, abs=1e-15)
    phi = math.pi
    gamma = (math.pi - phi) / 2
    a = 0.5 * np.array([np.exp(1j * gamma), 1, 1, 1])
    assert entanglement_delta(TwoQubitState.from_vector(a), phi) == pytest.approx(0.25, abs=1e-14)


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-7, 7))
def test_delta_routes_agree_and_bounded(seed, phi):
    state = TwoQubitState.random(np.random.default_rng(seed))
    d = entanglement_delta(state, phi)
    assert abs(d) <= entangling_power(phi) + 1e-12
    assert entanglement_delta(state, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_entangling_power_examples():
    assert entangling_power(math.pi) == 0.25
    assert entangling_power(0.0) == 0.0
    assert max_delta_uniform(math.pi / 2) == pytest.approx(0.25 * math.sin(math.pi / 4), abs=1e-9)


def test_sampled_maximum_is_a_lower_bound_that_converges():
    phis = np.linspace(0.0, 2 * math.pi, 20, endpoint=False)
    gaps = [entangling_power(p) - max_delta_sampled(p, 1_000_000, seed=0) for p in phis]
    assert min(gaps) >= -1e-15
    assert max(gaps) <= 1e-3


def test_uniform_family_maximum():
    for phi in np.linspace(0.0, 2 * math.pi, 20, endpoint=False):
        assert max_delta_uniform(phi) == pytest.approx(entangling_power(phi), abs=1e-6)


def test_reduced_measures_examples():
    m = reduced_measures(PRODUCT)
    assert (m.purity_measure, m.entropy, m.det_rho) == pytest.approx((-1.0, 0.0, 0.0), abs=1e-15)
    m = reduced_measures(BELL)
    assert (m.purity_measure, m.entropy, m.det_rho) == pytest.approx((-0.5, 1.0, 0.25), abs=1e-12)
    # Schmidt weights 3/4 and 1/4
    s = TwoQubitState.from_vector([math.sqrt(0.75), 0, 0, math.sqrt(0.25)])
    m = reduced_measures(s)
    assert m.purity_measure == pytest.approx(-5 / 8, abs=1e-12)
    assert m.entropy == pytest.approx(0.8112781244591328, abs=1e-12)
    assert m.det_rho == pytest.approx(3 / 16, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_reduced_measures_symmetric_in_qubits(seed):
    s = TwoQubitState.random(np.random.default_rng(seed))
    a, b = reduced_measures(s, 1), reduced_measures(s, 2)
    assert a.entropy == pytest.approx(b.entropy, abs=1e-10)
    assert a.det_rho == pytest.approx(abs(np.linalg.det(s.amplitudes)) ** 2, abs=1e-12)


def test_state_validation():
    with pytest.raises(ValueError):
        TwoQubitState.from_vector([1, 1, 0, 0])
    with pytest.raises(ValueError):
        TwoQubitState(np.ones(3))
    with pytest.raises(ValueError):
        reduced_measures(BELL, 3)


def test_classify_examples():
    c = classify_gate(cp_gate(math.pi))
    assert c.is_phase_gate and c.phi == pytest.approx(math.pi)
    assert c.alpha == (0.0, 0.0) and c.beta == (0.0, 0.0)
    shifted = np.diag(np.exp(1j * np.array([0.3, 0.3, 0.3, 0.3 + math.pi])))
    c = classify_gate(shifted)
    assert c.is_phase_gate and c.phi == pytest.approx(math.pi)
    assert c.global_phase == pytest.approx(0.3)
    np.testing.assert_allclose(synthesize(c), np.diag(shifted), atol=1e-14)


@given(st.tuples(*[st.floats(-6, 6)] * 4))
def test_synthesize_reproduces_diagonal(thetas):
    d = np.exp(1j * np.array(thetas))
    c = classify_gate(np.diag(d))
    np.testing.assert_allclose(synthesize(c), d, atol=1e-12)


def test_classify_rejects_leaky_or_mixing():
    mix = np.eye(4, dtype=complex)
    mix[0, 1] = 0.1
    c = classify_gate(mix)
    assert not c.is_phase_gate and c.max_offdiag == pytest.approx(0.1)
    with pytest.raises(ValueError):
        synthesize(c)
    assert not classify_gate(0.9 * np.eye(4)).is_phase_gate


def test_measures_order_states_identically():
    rng = np.random.default_rng(7)
    ms = [reduced_measures(TwoQubitState.random(rng)) for _ in range(500)]
    keys = [np.array([getattr(m, k) for m in ms]) for k in ("purity_measure", "entropy", "det_rho")]
    ranks = [np.argsort(np.argsort(k)) for k in keys]
    np.testing.assert_array_equal(ranks[0], ranks[1])
    np.testing.assert_array_equal(ranks[0], ranks[2])
