import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastgate.transport import (
    TransportOptions,
    TransportProblem,
    duhamel_displacement,
    escape_probability,
    evolve_displacement,
    final_offset,
    optimize_coefficients,
    rest_to_rest_coefficients,
    residual_amplitude,
    small_offset_escape,
    smoothstep_baseline_tau,
    transport_objective,
)


class ConstantAcceleration:
    """Duck-typed problem with l(t) = a t^2 / 2."""

    def __init__(self, a, frequency, tau):
        self.a, self.frequency, self.tau = a, frequency, tau

    def lddot(self, t):
        return np.full(np.shape(t), self.a)


class Reversed:
    def __init__(self, problem):
        self.p = problem
        self.frequency, self.tau = problem.frequency, problem.tau

    def lddot(self, t):
        return self.p.lddot(self.tau - np.asarray(t))


def test_constant_path_gives_no_displacement():
    prob = TransportProblem(distance=0.0)
    hist = evolve_displacement(prob, n_samples=11)
    assert np.max(np.abs(hist.y)) == 0.0


def test_constant_acceleration_closed_form():
    a, w = 0.3, 1.7
    prob = ConstantAcceleration(a, w, 5.0)
    t = np.linspace(0, 5, 9)
    y, yd = duhamel_displacement(prob, t)
    np.testing.assert_allclose(y, -(a / w ** 2) * (1 - np.cos(w * t)), atol=1e-13)
    np.testing.assert_allclose(yd, -(a / w) * np.sin(w * t), atol=1e-13)
    full = ConstantAcceleration(a, w, 2 * math.pi / w)
    y, yd = duhamel_displacement(full, full.tau)
    assert abs(y[0]) < 1e-14 and abs(yd[0]) < 1e-14


def test_escape_examples():
    assert escape_probability(0.0, 1.0) == 0.0
    assert escape_probability(2.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    y = 1e-6
    assert escape_probability(y, 1.0) == pytest.approx(small_offset_escape(y, 1.0), rel=1e-12)
    with pytest.raises(ValueError):
        escape_probability(0.1, 0.0)


coeffs = st.tuples(*[st.floats(-3, 3)] * 4)


@settings(max_examples=25, deadline=None)
@given(coeffs, st.floats(0.5, 3.0), st.floats(1.0, 12.0))
def test_ode_matches_convolution(q, w, tau):
    hist = evolve_displacement(TransportProblem(w, 1.0, 1.5, tau, q), n_samples=41)
    assert hist.duhamel_error <= 1e-9


@given(coeffs, st.floats(0.1, 10.0))
def test_linearity_in_displacement(q, s):
    base = TransportProblem(1.3, 1.0, 1.0, 5.0, q)
    scaled = TransportProblem(1.3, 1.0, s, 5.0, tuple(s * c for c in q))
    t = np.linspace(0, 5, 7)
    y1, _ = duhamel_displacement(base, t)
    y2, _ = duhamel_displacement(scaled, t)
    np.testing.assert_allclose(y2, s * y1, atol=1e-13 * s)


def test_time_reversal_of_rest_to_rest_path():
    q = rest_to_rest_coefficients([1.0], 7.0, 0.0, 1.5)
    prob = TransportProblem(1.0, 1.0, 1.5, 7.0, q)
    assert residual_amplitude(prob) < 1e-12
    t = np.linspace(0, 7, 15)
    y, _ = duhamel_displacement(prob, t)
    yr, _ = duhamel_displacement(Reversed(prob), t)
    np.testing.assert_allclose(yr, y[::-1], atol=1e-12)


def test_rest_to_rest_two_frequencies():
    q = rest_to_rest_coefficients([1.0, 1 / 1.44], 11.0, 5.95, 1.25)
    for w in (1.0, 1 / 1.44):
        prob = TransportProblem(w, 1.0, 1.25 - 5.95, 11.0, q, 5.95)
        assert residual_amplitude(prob) < 1e-10


def test_objective_matches_history_end():
    prob = TransportProblem(tau=4.0)
    hist = evolve_displacement(prob)
    assert transport_objective(hist) == pytest.approx(residual_amplitude(prob), abs=1e-10)
    y, yd = final_offset(prob)
    assert hist.y[-1] == pytest.approx(y, abs=1e-10)


def test_naive_smoothstep_loses_percent():
    esc = escape_probability(residual_amplitude(TransportProblem()), 1.0)
    assert 0.01 < esc < 0.1


def test_optimized_ramp_at_one_period():
    best, res = optimize_coefficients(TransportProblem())
    amp = residual_amplitude(best)
    assert amp < 1e-6
    assert escape_probability(amp, 1.0) < 1e-12
    assert best.within_bounds()


def test_baseline_is_first_budget_crossing():
    prob = TransportProblem()
    tau = smoothstep_baseline_tau(prob, 1e-10)
    y_max = 2 * math.sqrt(-math.log1p(-1e-10))
    assert residual_amplitude(prob.replace(tau=tau)) == pytest.approx(y_max, abs=1e-9)
    grid = np.arange(0.5, tau - 0.01, 0.01)
    assert min(residual_amplitude(prob.replace(tau=t)) for t in grid) > y_max


def test_bounds_check():
    assert TransportProblem(q=(0.0, 0.0, 0.0, 0.0)).within_bounds()
    assert not TransportProblem(q=(40.0, 0.0, 0.0, 0.0)).within_bounds()
    with pytest.raises(ValueError):
        TransportProblem(tau=0.0)
    assert TransportOptions().budget == 1e-10
