"""Bichromatic optical-lattice double well, its equalizing tilt and k-scaling.

V(k, x) = v0 [cos^2(k x + delta) + alpha cos^2(2 k x)] depends on x only
through u = k x. A linear bias -A x equalizes the two minima of one double
well; because the tilted potential is again a function of k x, A(k)/k is a
constant v0 * C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    v0: float = 1.0
    alpha: float = 1.0
    delta: float = 0.2
    k: float = 1.0
    tilt_c: float | None = None
    period_offset: int = 0

    def __post_init__(self):
        if not (self.v0 > 0 and self.alpha > 0 and self.k > 0):
            raise ValueError("v0, alpha and k must be positive")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")

    def with_k(self, k: float) -> "LatticeSpec":
        return replace(self, k=k)

    @property
    def tilt_a(self) -> float | None:
        """Slope A(k) = v0 C k of the bias -A x."""
        return None if self.tilt_c is None else self.v0 * self.tilt_c * self.k


# dimensionless profile f(u) - c u and its derivatives

def _f(u, alpha, delta, c=0.0):
    return np.cos(u + delta) ** 2 + alpha * np.cos(2 * u) ** 2 - c * u


def _df(u, alpha, delta, c=0.0):
    return -np.sin(2 * (u + delta)) - 2 * alpha * np.sin(4 * u) - c


def _d2f(u, alpha, delta):
    return -2 * np.cos(2 * (u + delta)) - 8 * alpha * np.cos(4 * u)


def potential(spec: LatticeSpec, x, tilted: bool = False):
    """V(k, x), or V_eff = V - A x when ``tilted``."""
    c = 0.0
    if tilted:
        if spec.tilt_c is None:
            raise LatticeError("tilted potential requested but tilt_c is not set; call tilt_coefficient first")
        c = spec.tilt_c
    u = spec.k * np.asarray(x, dtype=float)
    out = spec.v0 * _f(u, spec.alpha, spec.delta, c)
    return out if np.ndim(out) else float(out)


def second_derivative(spec: LatticeSpec, x):
    """d^2V/dx^2 (the linear tilt does not contribute)."""
    u = spec.k * np.asarray(x, dtype=float)
    out = spec.v0 * spec.k ** 2 * _d2f(u, spec.alpha, spec.delta)
    return out if np.ndim(out) else float(out)


def _reference_minimum(alpha: float, delta: float, n_grid: int = 4096) -> float:
    """Global minimum of the untilted profile f(u), located on a grid in [0, pi)."""
    u = np.linspace(0.0, math.pi, n_grid, endpoint=False)
    return float(u[int(np.argmin(_f(u, alpha, delta)))])


def _minima_x(spec: LatticeSpec, c: float, n_grid: int = 4096) -> tuple[float, float]:
    """Minima x1 < x2 of v0 [f(k x) - c k x] within one double-well cell.

    The cell starts a quarter period left of the untilted global minimum and
    spans one period pi/k; ``period_offset`` shifts it by whole periods. Roots
    of dV/dx are bracketed on a grid and refined to 1e-10/k.
    """
    k, a, dl = spec.k, spec.alpha, spec.delta

    def slope(x):
        return _df(k * x, a, dl, c)

    u_ref = _reference_minimum(a, dl) + spec.period_offset * math.pi
    lo = (u_ref - 0.25 * math.pi) / k
    x = np.linspace(lo, lo + math.pi / k, n_grid + 1)
    d = slope(x)
    mins = [
        brentq(slope, x[i], x[i + 1], xtol=1e-10 / k, rtol=4 * np.finfo(float).eps)
        for i in range(n_grid)
        if d[i] < 0 <= d[i + 1]
    ]
    if len(mins) != 2:
        raise LatticeError(
            f"expected two minima per period, found {len(mins)} "
            f"(alpha={a}, delta={dl}, tilt C={c}); single-well regime"
        )
    return mins[0], mins[1]


def find_minima(spec: LatticeSpec, tilted: bool = False) -> tuple[float, float]:
    """Positions x1 < x2 of the two minima of one double well."""
    if tilted and spec.tilt_c is None:
        raise LatticeError("tilt_c is not set")
    return _minima_x(spec, spec.tilt_c if tilted else 0.0)


def tilt_coefficient(spec: LatticeSpec, tol: float = 1e-10, max_iter: int = 100) -> LatticeSpec:
    """Return ``spec`` with the tilt constant C that equalizes the two minima.

    The difference quotient (V(x2) - V(x1)) / (x2 - x1) at the untilted minima
    is the first iterate; minima are then re-solved under the tilt and C is
    updated by secant steps until |V_eff(x2) - V_eff(x1)| < tol * v0.
    """

    def residual(c):
        s = replace(spec, tilt_c=c)
        x1, x2 = _minima_x(s, c)
        return (potential(s, x2, tilted=True) - potential(s, x1, tilted=True)) / spec.v0

    c_prev, r_prev = 0.0, residual(0.0)
    c = tilt_a_first_iterate(spec) / (spec.v0 * spec.k)
    r = r_prev
    for _ in range(max_iter):
        r = residual(c)
        if abs(r) < tol:
            return replace(spec, tilt_c=float(c))
        if r == r_prev:
            break
        c, c_prev, r_prev = c - r * (c - c_prev) / (r - r_prev), c, r
    raise LatticeError(f"tilt iteration did not converge (residual {r:.3e})")


def tilt_a_first_iterate(spec: LatticeSpec) -> float:
    """Difference quotient (V(x2) - V(x1)) / (x2 - x1) at the untilted minima."""
    x1, x2 = find_minima(spec)
    return (potential(spec, x2) - potential(spec, x1)) / (x2 - x1)


def scaling_report(spec: LatticeSpec, k_values, v_curvature: float | None = None) -> dict:
    """Check the k-scaling identities across ``k_values``.

    For each k: minima, separation, tilt A(k), depths and curvatures of V_eff at
    its minima. With ``v_curvature`` set, v0 is replaced by v_curvature / k^2,
    which should make the curvatures k-independent.
    """
    rows = []
    for k in k_values:
        s = spec.with_k(k)
        if v_curvature is not None:
            s = replace(s, v0=v_curvature / k ** 2)
        s = tilt_coefficient(s)
        x1, x2 = find_minima(s, tilted=True)
        rows.append({
            "k": float(k),
            "v0": s.v0,
            "x1": x1,
            "x2": x2,
            "separation": x2 - x1,
            "tilt_a": s.tilt_a,
            "a_over_k": s.tilt_a / k,
            "a_over_k_v0": s.tilt_a / (k * s.v0),
            "veff1": potential(s, x1, tilted=True),
            "veff2": potential(s, x2, tilted=True),
            "depth_residual": abs(potential(s, x2, tilted=True) - potential(s, x1, tilted=True)) / s.v0,
            "curv1": second_derivative(s, x1),
            "curv2": second_derivative(s, x2),
        })
    ref = rows[0]

    def rel(a, b):
        return abs(a - b) / max(abs(b), 1e-300)

    checks = {
        "k_x1": max(rel(r["k"] * r["x1"], ref["k"] * ref["x1"]) for r in rows),
        "k_x2": max(rel(r["k"] * r["x2"], ref["k"] * ref["x2"]) for r in rows),
        "k_separation": max(rel(r["k"] * r["separation"], ref["k"] * ref["separation"]) for r in rows),
        "a_over_k_v0": max(rel(r["a_over_k_v0"], ref["a_over_k_v0"]) for r in rows),
        "depth_residual": max(r["depth_residual"] for r in rows),
        "curvature_ratio": max(rel(r["curv2"] / r["curv1"], ref["curv2"] / ref["curv1"]) for r in rows),
    }
    if v_curvature is not None:
        checks["curvature"] = max(
            max(rel(r["curv1"], ref["curv1"]), rel(r["curv2"], ref["curv2"])) for r in rows
        )
    return {"rows": rows, "checks": checks}
