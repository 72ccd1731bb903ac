"""Closed separation path l(t): polynomial approach, constant plateau, mirrored departure."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

#: lengths below this (one model length unit) are flagged by ``validate``
MIN_SEPARATION = 1.0


def ramp_polynomial(l_from: float, l_to: float, q=()) -> Polynomial:
    """Q(x) = l_from + (l_from - l_to) x^2 (2x - 3) + x^2 (x - 1)^2 q(x).

    Q(0) = l_from, Q(1) = l_to and Q'(0) = Q'(1) = 0 for any coefficients ``q``
    (ascending powers of x).
    """
    base = Polynomial([l_from, 0.0, -3.0 * (l_from - l_to), 2.0 * (l_from - l_to)])
    if len(q) and np.any(np.asarray(q) != 0):
        base = base + Polynomial([0.0, 0.0, 1.0, -2.0, 1.0]) * Polynomial(list(q))
    return base


@dataclass(frozen=True)
class PathSpec:
    """Three-segment separation path.

    ``l(t) = Q(q1; t/t1)`` on [0, t1], ``l_p`` on [t1, t2] and
    ``Q(q2; (tau - t)/(tau - t2))`` on [t2, tau]. Lengths are in the model
    length unit, times in 1/omega_1.
    """

    l0: float
    l_p: float
    t1: float
    t2: float
    tau: float
    q1: tuple = (0.0, 0.0, 0.0, 0.0)
    q2: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "q1", tuple(float(c) for c in self.q1))
        object.__setattr__(self, "q2", tuple(float(c) for c in self.q2))

    def replace(self, **changes) -> "PathSpec":
        return replace(self, **changes)

    @property
    def plateau(self) -> float:
        return self.t2 - self.t1

    @cached_property
    def approach(self) -> Polynomial:
        return ramp_polynomial(self.l0, self.l_p, self.q1)

    @cached_property
    def departure(self) -> Polynomial:
        return ramp_polynomial(self.l0, self.l_p, self.q2)

    @cached_property
    def _derivs(self) -> tuple:
        a, d = self.approach, self.departure
        return a.deriv(), d.deriv(), a.deriv(2), d.deriv(2)

    def to_dict(self) -> dict:
        return {
            "l0": self.l0, "l_p": self.l_p, "t1": self.t1, "t2": self.t2, "tau": self.tau,
            "q1": list(self.q1), "q2": list(self.q2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PathSpec":
        known = {"l0", "l_p", "t1", "t2", "tau", "q1", "q2"}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown path keys: {sorted(unknown)}")
        missing = {"l0", "l_p", "t1", "t2", "tau"} - set(d)
        if missing:
            raise KeyError(f"missing path keys: {sorted(missing)}")
        return cls(
            float(d["l0"]), float(d["l_p"]), float(d["t1"]), float(d["t2"]), float(d["tau"]),
            tuple(d.get("q1", (0.0,) * 4)), tuple(d.get("q2", (0.0,) * 4)),
        )


def _check_time(spec: PathSpec, t: np.ndarray) -> None:
    if np.any(t < 0) or np.any(t > spec.tau):
        raise ValueError(f"time outside [0, tau={spec.tau}]")


def _segments(spec: PathSpec, t: np.ndarray):
    first = t <= spec.t1
    last = (t >= spec.t2) & ~first
    return first, last


def eval_l(spec: PathSpec, t):
    """Separation l(t)."""
    tt = np.asarray(t, dtype=float)
    _check_time(spec, tt)
    first, last = _segments(spec, tt)
    out = np.full(tt.shape, spec.l_p)
    out[first] = spec.approach(tt[first] / spec.t1)
    out[last] = spec.departure((spec.tau - tt[last]) / (spec.tau - spec.t2))
    return out if out.ndim else float(out)


def eval_ldot(spec: PathSpec, t):
    """Rate dl/dt (chain-rule factors 1/t1 and -1/(tau - t2))."""
    tt = np.asarray(t, dtype=float)
    _check_time(spec, tt)
    first, last = _segments(spec, tt)
    da, dd, _, _ = spec._derivs
    out = np.zeros(tt.shape)
    out[first] = da(tt[first] / spec.t1) / spec.t1
    width = spec.tau - spec.t2
    out[last] = -dd((spec.tau - tt[last]) / width) / width
    return out if out.ndim else float(out)


def eval_lddot(spec: PathSpec, t):
    """Second derivative; discontinuous at the segment junctions."""
    tt = np.asarray(t, dtype=float)
    _check_time(spec, tt)
    first, last = _segments(spec, tt)
    _, _, dda, ddd = spec._derivs
    out = np.zeros(tt.shape)
    out[first] = dda(tt[first] / spec.t1) / spec.t1 ** 2
    width = spec.tau - spec.t2
    out[last] = ddd((spec.tau - tt[last]) / width) / width ** 2
    return out if out.ndim else float(out)


def _min_on_unit_interval(poly: Polynomial) -> float:
    crit = poly.deriv().roots()
    xs = [0.0, 1.0] + [r.real for r in crit if abs(r.imag) < 1e-12 and 0 < r.real < 1]
    return float(min(poly(x) for x in xs))


def validate(spec: PathSpec, min_separation: float = MIN_SEPARATION, n_samples: int = 4001) -> dict:
    """Structured diagnostics; never raises for an inadmissible path.

    Returns ``{"ok": bool, "violations": [...], "max_abs_ldot": float, "min_l": float}``.
    """
    problems = []
    if not 0 < spec.t1:
        problems.append(f"t1={spec.t1} must be positive")
    if not spec.t1 < spec.t2:
        problems.append(f"t2={spec.t2} must exceed t1={spec.t1}")
    if not spec.t2 < spec.tau:
        problems.append(f"tau={spec.tau} must exceed t2={spec.t2}")
    if not spec.l0 > spec.l_p:
        problems.append(f"l0={spec.l0} must exceed l_p={spec.l_p}")
    if not spec.l_p > min_separation:
        problems.append(f"l_p={spec.l_p} must exceed {min_separation}")
    if problems:
        return {"ok": False, "violations": problems, "max_abs_ldot": float("nan"), "min_l": float("nan")}

    min_l = min(_min_on_unit_interval(spec.approach), _min_on_unit_interval(spec.departure), spec.l_p)
    if min_l <= min_separation:
        problems.append(f"path dips to l={min_l:.6g} <= {min_separation}")
    t = np.concatenate([
        np.linspace(0.0, spec.t1, n_samples),
        np.linspace(spec.t2, spec.tau, n_samples),
    ])
    max_ldot = float(np.max(np.abs(eval_ldot(spec, t))))
    return {"ok": not problems, "violations": problems, "max_abs_ldot": max_ldot, "min_l": min_l}
