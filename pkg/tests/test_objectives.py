import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastgate.objectives import (
    GateReport,
    UndefinedPhaseError,
    circular_distance,
    composite_objective,
    cp_gate,
    extract_phase,
    fidelity_d,
    fidelity_f,
    gate_report,
    j_gate,
    j_phi,
)
from fastgate.path import PathSpec
from fastgate.propagator import propagate

angle = st.floats(-10.0, 10.0, allow_nan=False)
modulus = st.floats(0.05, 1.0)


def diag_from(mods, thetas):
    return np.array([r * cmath.exp(1j * t) for r, t in zip(mods, thetas)])


@settings(max_examples=300)
@given(st.tuples(*[modulus] * 4), st.tuples(*[angle] * 4), angle, angle, angle)
def test_rabi_shift_invariance(mods, thetas, a1, b1, g):
    d = diag_from(mods, thetas)
    # theta_mn -> theta_mn + g + a_m + b_n leaves the controlled phase unchanged
    shift = np.exp(1j * (g + np.array([0.0, b1, a1, a1 + b1])))
    phi0, phi1 = extract_phase(d), extract_phase(d * shift)
    # a few ulps of the rounded phase factors
    eps = np.finfo(float).eps
    assert circular_distance(phi0, phi1) <= 64 * eps
    assert abs(j_phi(d, 1.0) - j_phi(d * shift, 1.0)) <= 16 * eps


def test_phase_examples():
    assert extract_phase(np.diag(cp_gate(math.pi))) == pytest.approx(math.pi, abs=1e-15)
    assert extract_phase([1, 1, 1, 1]) == 0.0
    assert extract_phase(np.exp(1j * np.array([0.3, 0.3, 0.3, 0.3 + math.pi]))) == pytest.approx(math.pi, abs=1e-12)
    with pytest.raises(UndefinedPhaseError):
        extract_phase([1, 0, 1, 1])


def test_j_phi_examples():
    assert j_phi(np.diag(cp_gate(math.pi)), math.pi) == pytest.approx(0.0, abs=1e-15)
    assert j_phi([1, 1, 1, 1], math.pi) == pytest.approx(2.0)
    # small-error form: J ~ sqrt((1 - |prod|)^2 + dphi^2)
    d = np.array([0.999, 1, 1, -1]) * cmath.exp(0.001j)
    expected = abs(0.999 * cmath.exp(0.001j * 0) - 1)
    assert j_phi(d, math.pi) == pytest.approx(expected, rel=1e-9)


@given(st.lists(st.floats(-1, 1), min_size=32, max_size=32))
def test_d_below_f_below_one_on_random_rows(vals):
    c = np.array(vals[:16]).reshape(4, 4) + 1j * np.array(vals[16:]).reshape(4, 4)
    c = np.hstack([c, 0.3 * c[:, :2]])
    c /= max(1.0, np.max(np.linalg.norm(c, axis=1)))
    f = fidelity_f(c, [0, 1, 2, 3])
    assert fidelity_d(np.diag(c[:, :4])) <= f + 1e-15
    assert f <= 1.0 + 1e-12


@pytest.mark.parametrize("spec", [
    PathSpec(5.95, 1.3, 11.0, 40.0, 51.0),
    PathSpec(5.95, 1.25, 6.0, 20.0, 26.0, (2.0, -1.0, 0.0, 0.5), (0.0, 1.0, 0.0, 0.0)),
    PathSpec(4.0, 1.5, 3.0, 10.0, 12.0),
])
def test_d_below_f_below_one_on_propagations(params, trunc, spec):
    res = propagate(spec, params, trunc, 1e-10)
    rep = gate_report(res.c_full, res.comp)
    assert rep.fidelity_d <= rep.fidelity_f <= 1.0 + 1e-10


def test_j_gate_minimum_up_to_global_phase():
    g = cp_gate(math.pi)
    assert j_gate(g * cmath.exp(0.7j), g) == pytest.approx(-4.0, abs=1e-14)
    assert j_gate(np.eye(4), g) == pytest.approx(-2.0, abs=1e-14)


def test_composite_kinds():
    c = np.diag([1, 1, 1, -1]).astype(complex) * 0.99
    d = np.diag(c)
    assert composite_objective("j_phi", c, math.pi) == pytest.approx(j_phi(d, math.pi))
    assert composite_objective("j_phi/f", c, math.pi) == pytest.approx(j_phi(d, math.pi) / fidelity_f(c))
    assert composite_objective("j_phi/d", c, math.pi) == pytest.approx(j_phi(d, math.pi) / fidelity_d(d))
    assert composite_objective("j_gate", c, math.pi) == pytest.approx(-3.96)
    with pytest.raises(ValueError):
        composite_objective("nope", c, math.pi)


def test_circular_distance():
    assert circular_distance(0.01, 2 * math.pi - 0.01) == pytest.approx(0.02)
    assert circular_distance(math.pi, -math.pi) == pytest.approx(0.0, abs=1e-15)


def test_report_round_trip():
    c = np.eye(4, dtype=complex)
    c[3, 3] = -1
    rep = gate_report(c, [0, 1, 2, 3])
    again = GateReport.from_dict(rep.to_dict())
    assert again == rep
    assert rep.to_dict()["phase_error"] == pytest.approx(0.0, abs=1e-15)
