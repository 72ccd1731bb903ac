import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastgate.path import PathSpec, eval_l, eval_ldot, eval_lddot, ramp_polynomial, validate

coeff = st.floats(-5.0, 5.0, allow_nan=False)
qs = st.tuples(coeff, coeff, coeff, coeff)


@st.composite
def paths(draw):
    l0 = draw(st.floats(3.0, 8.0))
    l_p = draw(st.floats(1.1, 2.5))
    t1 = draw(st.floats(1.0, 150.0))
    plateau = draw(st.floats(0.5, 200.0))
    width = draw(st.floats(1.0, 150.0))
    return PathSpec(l0, l_p, t1, t1 + plateau, t1 + plateau + width, draw(qs), draw(qs))


@settings(max_examples=200)
@given(paths())
def test_closure_is_exact(spec):
    assert eval_l(spec, 0.0) == spec.l0
    assert eval_l(spec, spec.tau) == spec.l0
    assert eval_ldot(spec, 0.0) == 0.0
    assert eval_ldot(spec, spec.tau) == 0.0


@settings(max_examples=200)
@given(paths())
def test_c1_continuity_at_junctions(spec):
    for t in (spec.t1, spec.t2):
        left = np.nextafter(t, 0.0)
        right = np.nextafter(t, np.inf)
        scale = spec.l0
        assert abs(eval_l(spec, left) - eval_l(spec, right)) <= 1e-13 * scale
        assert eval_l(spec, t) == pytest.approx(spec.l_p, abs=1e-13 * scale)
        rate = abs(spec.l0 - spec.l_p) / min(spec.t1, spec.tau - spec.t2)
        assert abs(eval_ldot(spec, left)) <= 1e-12 * rate
        assert abs(eval_ldot(spec, right)) <= 1e-12 * rate


@given(st.floats(-3, 3), st.floats(-3, 3), qs)
def test_ramp_endpoints(a, b, q):
    poly = ramp_polynomial(a, b, q)
    d = poly.deriv()
    assert poly(0.0) == pytest.approx(a, abs=1e-12)
    assert poly(1.0) == pytest.approx(b, abs=1e-12)
    assert d(0.0) == pytest.approx(0.0, abs=1e-12)
    assert d(1.0) == pytest.approx(0.0, abs=1e-12)


def test_derivatives_match_finite_differences():
    spec = PathSpec(5.95, 1.3, 10.0, 140.0, 152.0, (1.0, -2.0, 0.5, 0.3), (0.2, 0.1, -0.4, 0.0))
    h = 1e-6
    for t in (2.0, 7.5, 145.0, 150.0):
        fd = (eval_l(spec, t + h) - eval_l(spec, t - h)) / (2 * h)
        assert eval_ldot(spec, t) == pytest.approx(fd, rel=1e-7, abs=1e-9)
        fd2 = (eval_ldot(spec, t + h) - eval_ldot(spec, t - h)) / (2 * h)
        assert eval_lddot(spec, t) == pytest.approx(fd2, rel=1e-6, abs=1e-8)
    assert eval_ldot(spec, 100.0) == 0.0


def test_departure_mirrors_approach():
    q = (0.3, -0.1, 0.2, 0.05)
    spec = PathSpec(5.0, 1.4, 12.0, 100.0, 112.0, q, q)
    t = np.linspace(0.0, 12.0, 13)
    np.testing.assert_allclose(eval_l(spec, t), eval_l(spec, spec.tau - t), atol=1e-13)


def test_vectorised_evaluation_and_time_guard():
    spec = PathSpec(5.95, 1.25, 100.0, 200.0, 300.0)
    t = np.linspace(0, 300, 7)
    assert eval_l(spec, t).shape == (7,)
    with pytest.raises(ValueError):
        eval_l(spec, -1.0)
    with pytest.raises(ValueError):
        eval_ldot(spec, 301.0)


def test_validate_seed_speeds():
    slow = validate(PathSpec(5.95, 1.25, 100.0, 200.0, 300.0))
    fast = validate(PathSpec(5.95, 1.25, 11.0, 139.0, 150.0))
    assert slow["ok"] and fast["ok"]
    assert slow["max_abs_ldot"] == pytest.approx(0.0705, abs=1e-3)
    assert fast["max_abs_ldot"] == pytest.approx(0.6409, abs=1e-3)


@pytest.mark.parametrize("spec,fragment", [
    (PathSpec(5.0, 1.3, 10.0, 5.0, 20.0), "t2"),
    (PathSpec(5.0, 1.3, 10.0, 20.0, 20.0), "tau"),
    (PathSpec(5.0, 1.3, 0.0, 20.0, 30.0), "t1"),
    (PathSpec(1.2, 1.3, 10.0, 20.0, 30.0), "l0"),
    (PathSpec(5.0, 0.9, 10.0, 20.0, 30.0), "l_p"),
    (PathSpec(5.0, 1.3, 10.0, 20.0, 30.0, (-300.0, 0.0, 0.0, 0.0)), "dips"),
])
def test_validate_reports_violations(spec, fragment):
    v = validate(spec)
    assert not v["ok"]
    assert any(fragment in msg for msg in v["violations"])


def test_dict_round_trip():
    spec = PathSpec(5.95, 1.3, 10.0, 140.0, 150.0, (1, 2, 3), (4, 5, 6, 7, 8))
    assert PathSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(KeyError):
        PathSpec.from_dict({"l0": 1.0})
    with pytest.raises(KeyError):
        PathSpec.from_dict({**spec.to_dict(), "extra": 1})
