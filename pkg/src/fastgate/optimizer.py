"""Gradient search over path parameters.

Parameters are scaled before differencing (times by the seed tau, l_p by the
model length unit, ramp coefficients by l0 - l_p of the seed) so one relative
step serves all of them. Gradients are central finite differences; directions
come from a BFGS inverse-Hessian estimate with a steepest-descent fallback,
and steps are accepted by Armijo backtracking. Infeasible trial paths (wrong
time ordering, dips below the minimum separation) are rejected by shortening
the step.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import BasisTruncation, PhysicalParams
from .coupling import TwoWellModel, omega_of_l
from .objectives import (
    GateReport,
    composite_objective,
    extract_phase,
    fidelity_d,
    gate_report,
    j_phi,
)
from .path import MIN_SEPARATION, PathSpec, validate
from .propagator import propagate, propagate_half

OBJECTIVE_KINDS = ("j_phi", "j_phi/f", "j_phi/d", "j_gate", "half_diag")
PHASE_KINDS = ("j_phi", "j_phi/f", "j_phi/d")
TIME_NAMES = ("t1", "t2", "tau")
SCALAR_PARAMETERS = ("t1", "t2", "l_p", "tau")


class OptimizationError(RuntimeError):
    pass


def expand_free_parameters(names, n_q1: int = 4, n_q2: int = 4) -> list[str]:
    """Expand group names ``q1``/``q2``/``q`` into coefficient names ``q1_0``... and check the rest.

    ``q`` ties the two ramps: each ``q_i`` sets both ``q1[i]`` and ``q2[i]``,
    so the departure stays the time mirror of the approach.
    """
    sizes = {"q1": n_q1, "q2": n_q2}
    if n_q1 == n_q2:
        sizes["q"] = n_q1
    out = []
    for name in names:
        prefix, _, index = name.partition("_")
        if name in sizes:
            out.extend(f"{name}_{i}" for i in range(sizes[name]))
        elif name in SCALAR_PARAMETERS or (prefix in sizes and index.isdigit() and int(index) < sizes[prefix]):
            out.append(name)
        elif name == "q" or prefix == "q":
            raise ValueError("tied ramp coefficients 'q' need q1 and q2 of equal length")
        else:
            raise ValueError(f"unknown free parameter {name!r}")
    if len(set(out)) != len(out):
        raise ValueError("free parameters listed twice")
    tied = {n[2:] for n in out if n.startswith("q_")}
    if any(n[:2] in ("q1", "q2") and n[3:] in tied for n in out):
        raise ValueError("a tied coefficient q_i cannot also be free as q1_i or q2_i")
    return out


@dataclass
class OptimizerOptions:
    j_threshold: float = 1e-5
    gtol: float = 1e-7
    max_iter: int = 500
    rel_step: float = 1e-4
    max_step_norm: float = 0.05
    armijo: float = 1e-4
    min_alpha: float = 1e-6
    tol: float = 1e-10
    method: str = "magnus"
    max_step: float = 0.1
    min_separation: float = MIN_SEPARATION
    workers: int = 1
    verbose: bool = False
    squared: bool = True
    phase_lock: bool = False
    phase_tol: float = 1e-10


@dataclass
class HistoryEntry:
    iteration: int
    parameters: dict
    objective: float
    j_phi: float
    fidelity_f: float
    fidelity_d: float
    phi: float
    grad_norm: float
    n_evaluations: int
    elapsed: float


@dataclass
class OptimizationRun:
    """One optimization: seed, free parameters, objective and outcome."""

    seed: PathSpec
    free_parameters: list
    objective_kind: str = "j_phi"
    target_phi: float = math.pi
    history: list = field(default_factory=list)
    best_path: PathSpec | None = None
    best_report: GateReport | None = None
    best_objective: float = math.inf
    status: str = "pending"
    message: str = ""
    n_evaluations: int = 0
    stages: list = field(default_factory=list)

    def __post_init__(self):
        if self.objective_kind not in OBJECTIVE_KINDS:
            raise ValueError(f"objective_kind must be one of {OBJECTIVE_KINDS}")
        self.free_parameters = expand_free_parameters(self.free_parameters, len(self.seed.q1), len(self.seed.q2))

    def summary(self) -> dict:
        return {
            "status": self.status,
            "message": self.message,
            "objective_kind": self.objective_kind,
            "free_parameters": list(self.free_parameters),
            "target_phi": self.target_phi,
            "iterations": len(self.history) - 1 if self.history else 0,
            "n_evaluations": self.n_evaluations,
            "best_objective": self.best_objective,
            "seed": self.seed.to_dict(),
            "best_path": self.best_path.to_dict() if self.best_path else None,
            "best_report": self.best_report.to_dict() if self.best_report else None,
            "stages": self.stages,
        }


class ParameterMap:
    """Maps between a PathSpec and the scaled vector of free parameters."""

    def __init__(self, seed: PathSpec, names):
        self.seed = seed
        self.names = list(names)
        q_scale = seed.l0 - seed.l_p
        self.scales = np.array([
            seed.tau if n in TIME_NAMES else 1.0 if n == "l_p" else q_scale
            for n in self.names
        ])

    def to_vector(self, spec: PathSpec) -> np.ndarray:
        raw = []
        for n in self.names:
            if n.startswith("q_"):
                raw.append(spec.q1[int(n[2:])])
            elif n.startswith("q"):
                raw.append(getattr(spec, n[:2])[int(n[3:])])
            else:
                raw.append(getattr(spec, n))
        return np.asarray(raw) / self.scales

    def to_spec(self, x: np.ndarray, base: PathSpec | None = None) -> PathSpec:
        base = base or self.seed
        raw = np.asarray(x) * self.scales
        changes: dict = {}
        q1, q2 = list(base.q1), list(base.q2)
        for n, v in zip(self.names, raw):
            if n.startswith("q_"):
                q1[int(n[2:])] = q2[int(n[2:])] = v
            elif n.startswith("q1"):
                q1[int(n[3:])] = v
            elif n.startswith("q2"):
                q2[int(n[3:])] = v
            else:
                changes[n] = float(v)
        return base.replace(q1=tuple(q1), q2=tuple(q2), **changes)


class Evaluator:
    """Objective evaluation with caching of the last gate report."""

    def __init__(self, kind: str, params: PhysicalParams, trunc: BasisTruncation, options: OptimizerOptions,
                 target_phi: float = math.pi, model: TwoWellModel | None = None):
        self.kind = kind
        self.params = params
        self.trunc = trunc
        self.options = options
        self.target_phi = target_phi
        self.model = model or TwoWellModel(params, trunc)
        self.count = 0

    def feasible(self, spec: PathSpec) -> bool:
        return validate(spec, self.options.min_separation, n_samples=2)["ok"]

    def __call__(self, spec: PathSpec) -> tuple[float, GateReport | None]:
        value, report, _ = self.evaluate(spec)
        return value, report

    def evaluate(self, spec: PathSpec) -> tuple[float, GateReport | None, PathSpec]:
        """Objective, report and the path actually evaluated.

        With ``phase_lock`` the plateau end t2 (tau fixed) is first adjusted
        until the gate phase equals the target, so the returned path differs
        from ``spec`` in t2.
        """
        if not self.feasible(spec):
            return math.inf, None, spec
        if self.options.phase_lock:
            return self._locked(spec)
        value, report = self._single(spec)
        return value, report, spec

    def _single(self, spec: PathSpec) -> tuple[float, GateReport]:
        self.count += 1
        o = self.options
        if self.kind == "half_diag":
            res = propagate_half(spec, self.params, self.trunc, o.tol, spec.t1,
                                 method=o.method, max_step=o.max_step, model=self.model)
            diag = res.c_diag
            report = _partial_report(diag, res.c_restricted, self.target_phi)
            return 1.0 - report.fidelity_d, report
        res = propagate(spec, self.params, self.trunc, o.tol, method=o.method, max_step=o.max_step, model=self.model)
        report = gate_report(res.c_full, res.comp, self.target_phi)
        value = composite_objective(self.kind, res.c_restricted, self.target_phi)
        return float(value), report

    def _locked(self, spec: PathSpec, max_iter: int = 12):
        """Newton/secant on t2 for phi = target; slope Omega(l_p) for the first step."""
        if self.kind not in PHASE_KINDS:
            raise OptimizationError(f"phase_lock needs a phase objective, not {self.kind!r}")
        slope = float(omega_of_l(spec.l_p, self.params))
        if slope <= 0:
            return math.inf, None, spec
        prev = None
        for _ in range(max_iter):
            value, report = self._single(spec)
            miss = (self.target_phi - report.phi + math.pi) % (2 * math.pi) - math.pi
            if abs(miss) <= self.options.phase_tol:
                return value, report, spec
            if prev is not None and spec.t2 != prev[0] and miss != prev[1]:
                secant = (prev[1] - miss) / (spec.t2 - prev[0])
                if secant > 0:
                    slope = secant
            prev = (spec.t2, miss)
            spec = spec.replace(t2=spec.t2 + miss / slope)
            if not self.feasible(spec):
                return math.inf, None, spec
        return math.inf, None, spec


def _partial_report(diag, block, target_phi) -> GateReport:
    try:
        phi = extract_phase(diag)
    except ValueError:
        phi = float("nan")
    return GateReport(
        phi=phi,
        j_phi=j_phi(diag, target_phi),
        fidelity_f=float(np.sum(np.abs(block) ** 2) / 4),
        fidelity_d=fidelity_d(diag),
        c_diag=list(diag),
        theta=list(np.angle(diag)),
        target_phi=target_phi,
    )


def fd_gradient(fun, x: np.ndarray, f0: float, rel_step: float, workers: int = 1) -> np.ndarray:
    """Central-difference gradient of a scalar ``fun``.

    Steps are ``rel_step * max(|x_i|, 1)``; next to an infeasible point (where
    ``fun`` is infinite) the one-sided difference is used instead.
    """
    n = x.size
    steps = rel_step * np.maximum(np.abs(x), 1.0)
    points = []
    for i in range(n):
        for sign in (1.0, -1.0):
            xp = x.copy()
            xp[i] += sign * steps[i]
            points.append(xp)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(fun, points))
    else:
        vals = [fun(p) for p in points]
    g = np.empty(n)
    for i in range(n):
        fp, fm = vals[2 * i], vals[2 * i + 1]
        if math.isfinite(fp) and math.isfinite(fm):
            g[i] = (fp - fm) / (2 * steps[i])
        elif math.isfinite(fp):
            g[i] = (fp - f0) / steps[i]
        elif math.isfinite(fm):
            g[i] = (f0 - fm) / steps[i]
        else:
            g[i] = 0.0
    return g


@dataclass
class SearchResult:
    x: np.ndarray
    value: float
    aux: object
    status: str
    message: str
    iterations: int


def gradient_search(fun, x0, options: OptimizerOptions, on_accept=None) -> SearchResult:
    """Minimize ``fun(x) -> (value, aux)`` from ``x0``.

    ``value`` is ``inf`` at infeasible points. Directions come from a BFGS
    inverse-Hessian estimate, falling back to steepest descent; steps are
    accepted by Armijo backtracking, so every accepted step strictly lowers the
    value. ``on_accept(iteration, x, value, aux, grad_norm)`` is called for the
    start point (iteration 0) and every accepted point.
    """
    x = np.asarray(x0, dtype=float).copy()
    f, aux = fun(x)
    if not math.isfinite(f):
        raise OptimizationError("objective is not finite at the start point")

    def scalar(p):
        return fun(p)[0]

    if f <= options.j_threshold or x.size == 0:
        if on_accept:
            on_accept(0, x, f, aux, float("nan"))
        return SearchResult(x, f, aux, "converged", "objective below threshold at the start point", 0)

    g = fd_gradient(scalar, x, f, options.rel_step, options.workers)
    if on_accept:
        on_accept(0, x, f, aux, float(np.linalg.norm(g)))
    h_inv = None
    status, message = "max_iter", f"reached {options.max_iter} iterations"
    it = 0
    for it in range(1, options.max_iter + 1):
        if float(np.linalg.norm(g)) <= options.gtol:
            status, message = "converged", "gradient norm below gtol"
            it -= 1
            break
        accepted = None
        for use_bfgs in (True, False):
            if use_bfgs:
                if h_inv is None:
                    continue
                d = -h_inv @ g
                if g @ d >= 0:
                    continue
                cap = 10 * options.max_step_norm
            else:
                d = -g
                cap = options.max_step_norm
            dnorm = float(np.linalg.norm(d))
            alpha = min(1.0, cap / dnorm)
            while alpha * dnorm >= options.min_alpha * options.max_step_norm:
                xt = x + alpha * d
                ft, at = fun(xt)
                if math.isfinite(ft) and ft < f and ft <= f + options.armijo * alpha * float(g @ d):
                    accepted = (xt, ft, at)
                    break
                alpha *= 0.5
            if accepted:
                break
            h_inv = None
        if accepted is None:
            status, message = "stall", "no descent step found at the minimum step length"
            it -= 1
            break
        x_new, f_new, aux = accepted
        g_new = fd_gradient(scalar, x_new, f_new, options.rel_step, options.workers)
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        if sy > 0:
            if h_inv is None:
                h_inv = np.eye(x.size) * (sy / float(y @ y))
            rho = 1.0 / sy
            eye = np.eye(x.size)
            h_inv = (eye - rho * np.outer(s, y)) @ h_inv @ (eye - rho * np.outer(y, s)) + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        if on_accept:
            on_accept(it, x, f, aux, float(np.linalg.norm(g)))
        if f <= options.j_threshold:
            status, message = "converged", "objective below threshold"
            break
    return SearchResult(x, f, aux, status, message, it)


def optimize(run: OptimizationRun, params: PhysicalParams, trunc: BasisTruncation,
             options: OptimizerOptions | None = None, evaluator: Evaluator | None = None) -> OptimizationRun:
    """Run the gradient search on a path and return ``run`` (updated in place).

    Stops when the objective falls below ``j_threshold``, the scaled gradient
    norm below ``gtol``, after ``max_iter`` iterations, or on a stall; the
    best point so far is always kept.

    With ``options.squared`` the search runs on (J - J_min)^2, where J_min is
    the objective's lower bound (0, or -4 for ``j_gate``). The minimizers are
    the same, but the square stays smooth where J behaves like
    sqrt(a^2 + dphi^2) with a small a, which otherwise spoils finite
    differences near the optimum. History and results are in units of J.
    """
    options = options or OptimizerOptions()
    ev = evaluator or Evaluator(run.objective_kind, params, trunc, options, run.target_phi)
    pmap = ParameterMap(run.seed, run.free_parameters)
    if options.phase_lock and "t2" in run.free_parameters:
        raise OptimizationError("t2 is set by the phase lock and cannot also be free")
    v = validate(run.seed, options.min_separation)
    if not v["ok"]:
        raise OptimizationError(f"seed path is infeasible: {'; '.join(v['violations'])}")
    start = time.perf_counter()
    shift = 4.0 if run.objective_kind == "j_gate" else 0.0
    search_options = options
    if options.squared:
        search_options = replace(options, j_threshold=max(options.j_threshold + shift, 0.0) ** 2)

    def to_j(f):
        return math.sqrt(f) - shift if options.squared else f

    def fun(x):
        value, report, spec = ev.evaluate(pmap.to_spec(x))
        if options.squared and math.isfinite(value):
            value = (value + shift) ** 2
        return value, (report, spec)

    def on_accept(it, x, f, aux, gnorm):
        report, spec = aux
        f = to_j(f)
        run.best_path, run.best_report, run.best_objective = spec, report, f
        run.history.append(HistoryEntry(
            it, spec.to_dict(), f, report.j_phi, report.fidelity_f, report.fidelity_d,
            report.phi, gnorm, ev.count, time.perf_counter() - start,
        ))
        if options.verbose:
            print(f"[{it:4d}] J={f:.6e} F={report.fidelity_f:.6f} D={report.fidelity_d:.6f} "
                  f"phi={report.phi:.5f} |g|={gnorm:.3e} evals={ev.count}", flush=True)

    res = gradient_search(fun, pmap.to_vector(run.seed), search_options, on_accept)
    run.status, run.message = res.status, res.message
    run.n_evaluations = ev.count
    return run


def plateau_for_phase(l_p: float, params: PhysicalParams, target_phi: float) -> float:
    """Plateau duration target_phi / Omega(l_p) (first-order rate)."""
    if target_phi % (2 * math.pi) == 0:
        return 0.0
    om = float(omega_of_l(l_p, params))
    if om <= 0:
        raise OptimizationError(f"Omega(l_p={l_p}) = {om} is not positive")
    return (target_phi % (2 * math.pi)) / om


@dataclass
class FastApproachOptions:
    """Per-stage settings for the fast-approach scheme."""

    stage_a: OptimizerOptions = field(default_factory=lambda: OptimizerOptions(j_threshold=1e-6, max_iter=60))
    stage_c: OptimizerOptions = field(default_factory=lambda: OptimizerOptions(j_threshold=1e-2, max_iter=150))
    polish: OptimizerOptions = field(default_factory=lambda: OptimizerOptions(j_threshold=1e-4, max_iter=150))
    polish_kind: str = "j_phi"
    polish_parameters: tuple = ("q1", "q2", "t1", "t2", "l_p", "tau")
    stage_c_parameters: tuple = ("q2", "t2", "tau")
    mirror_departure: bool = True
    rest_to_rest_seed: bool = True


def fast_approach_stage(run: OptimizationRun, params: PhysicalParams, trunc: BasisTruncation,
                        options: FastApproachOptions | None = None) -> OptimizationRun:
    """Three-stage fast-approach optimization followed by a joint polish.

    With ``rest_to_rest_seed`` an all-zero approach polynomial is first
    replaced by the one that leaves both bare oscillators unexcited at t1.

    (a) approach coefficients against the half-path diagonality at t1;
    (b) plateau set to target_phi / Omega(l_p);
    (c) departure (seeded as the time mirror of the approach) against the
    full-path objective with the approach frozen; then all free parameters.
    """
    options = options or FastApproachOptions()
    model = TwoWellModel(params, trunc)
    seed = run.seed
    if not validate(seed, options.stage_a.min_separation)["ok"]:
        raise OptimizationError("seed path is infeasible")
    total_evals = 0
    if options.rest_to_rest_seed and not any(seed.q1):
        from .transport import rest_to_rest_coefficients

        q1 = rest_to_rest_coefficients((params.well1.frequency, params.well2.frequency), seed.t1,
                                       seed.l0, seed.l_p, len(seed.q1))
        candidate = seed.replace(q1=tuple(q1))
        if validate(candidate, options.stage_a.min_separation)["ok"]:
            seed = candidate
            run.stages.append({"stage": "seed", "q1": list(seed.q1)})

    # (a)
    stage_a = OptimizationRun(seed, ["q1"], "half_diag", run.target_phi)
    optimize(stage_a, params, trunc, options.stage_a,
             Evaluator("half_diag", params, trunc, options.stage_a, run.target_phi, model))
    total_evals += stage_a.n_evaluations
    spec = stage_a.best_path
    run.stages.append({"stage": "a", "status": stage_a.status, "objective": stage_a.best_objective,
                       "iterations": len(stage_a.history) - 1})

    # (b)
    plateau = plateau_for_phase(spec.l_p, params, run.target_phi)
    width_out = spec.t1 if options.mirror_departure else spec.tau - spec.t2
    q2 = spec.q1 if options.mirror_departure else spec.q2
    spec = spec.replace(t2=spec.t1 + plateau, tau=spec.t1 + plateau + width_out, q2=q2)
    if plateau == 0.0:
        run.best_path = spec
        run.stages.append({"stage": "b", "plateau": 0.0})
        ev = Evaluator("j_phi", params, trunc, options.stage_c, run.target_phi, model)
        run.best_objective, run.best_report = ev(spec) if spec.t2 > spec.t1 else (math.nan, None)
        run.status, run.message = "converged", "zero target phase: no plateau"
        return run
    run.stages.append({"stage": "b", "plateau": plateau})

    # (c)
    stage_c = OptimizationRun(spec, list(options.stage_c_parameters), run.objective_kind, run.target_phi)
    optimize(stage_c, params, trunc, options.stage_c,
             Evaluator(run.objective_kind, params, trunc, options.stage_c, run.target_phi, model))
    total_evals += stage_c.n_evaluations
    run.stages.append({"stage": "c", "status": stage_c.status, "objective": stage_c.best_objective,
                       "iterations": len(stage_c.history) - 1})

    # polish
    polish = OptimizationRun(stage_c.best_path, list(options.polish_parameters), options.polish_kind, run.target_phi)
    optimize(polish, params, trunc, options.polish,
             Evaluator(options.polish_kind, params, trunc, options.polish, run.target_phi, model))
    total_evals += polish.n_evaluations
    run.stages.append({"stage": "polish", "status": polish.status, "objective": polish.best_objective,
                       "iterations": len(polish.history) - 1})

    run.history = stage_a.history + stage_c.history + polish.history
    run.best_path, run.best_report = polish.best_path, polish.best_report
    run.best_objective = polish.best_objective
    run.status, run.message = polish.status, polish.message
    run.n_evaluations = total_evals
    return run


@dataclass
class SweepResult:
    durations: np.ndarray
    phi: np.ndarray
    fidelity_f: np.ndarray
    fidelity_d: np.ndarray
    slope: float
    intercept: float
    residual_std: float

    def max_fidelity_deviation(self, ref_f: float, ref_d: float) -> float:
        return float(max(np.max(np.abs(self.fidelity_f - ref_f)), np.max(np.abs(self.fidelity_d - ref_d))))


def plateau_sweep(optimized: PathSpec, params: PhysicalParams, trunc: BasisTruncation, n_points: int = 21,
                  *, tol: float = 1e-10, method: str = "magnus", max_step: float = 0.1) -> SweepResult:
    """Vary the plateau from 0 to its optimized length with both ramps fixed.

    The phase is unwrapped along the sweep and fitted linearly against the
    plateau duration.
    """
    model = TwoWellModel(params, trunc)
    width_out = optimized.tau - optimized.t2
    total = optimized.plateau
    durations = np.linspace(0.0, total, n_points)
    phis, fs, ds = [], [], []
    for dur in durations:
        spec = optimized.replace(t2=optimized.t1 + dur, tau=optimized.t1 + dur + width_out)
        res = propagate(spec, params, trunc, tol, method=method, max_step=max_step, model=model)
        rep = gate_report(res.c_full, res.comp)
        phis.append(rep.phi)
        fs.append(rep.fidelity_f)
        ds.append(rep.fidelity_d)
    phi = np.unwrap(np.array(phis))
    a = np.vstack([durations, np.ones_like(durations)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, phi, rcond=None)
    resid = phi - (slope * durations + intercept)
    return SweepResult(durations, phi, np.array(fs), np.array(ds), float(slope), float(intercept),
                       float(np.std(resid, ddof=2)) if n_points > 2 else 0.0)


def sensitivity_scan(optimized: PathSpec, params: PhysicalParams, trunc: BasisTruncation,
                     perturbation: float = 0.01, parameters=("t1", "t2", "tau", "l_p", "q1", "q2"),
                     *, tol: float = 1e-10, method: str = "magnus", max_step: float = 0.1) -> list[dict]:
    """Perturb each parameter by +-perturbation (relative) and report the changes.

    Ramp coefficients are perturbed relative to l0 - l_p when they vanish.
    For time parameters the first-order phase prediction
    delta_phi = Omega(l_p) (delta_t2 - delta_t1) is reported next to the
    measured change.
    """
    model = TwoWellModel(params, trunc)

    def run(spec):
        res = propagate(spec, params, trunc, tol, method=method, max_step=max_step, model=model)
        return gate_report(res.c_full, res.comp)

    base = run(optimized)
    om = float(omega_of_l(optimized.l_p, params))
    pmap = ParameterMap(optimized, expand_free_parameters(parameters, len(optimized.q1), len(optimized.q2)))
    x0 = pmap.to_vector(optimized)
    rows = []
    for i, name in enumerate(pmap.names):
        for sign in (1.0, -1.0):
            x = x0.copy()
            raw = x0[i] * pmap.scales[i]
            delta = sign * perturbation * (abs(raw) if raw != 0 else optimized.l0 - optimized.l_p)
            x[i] += delta / pmap.scales[i]
            spec = pmap.to_spec(x, optimized)
            row = {"parameter": name, "sign": int(sign), "delta": delta}
            if not validate(spec)["ok"]:
                row.update(feasible=False)
                rows.append(row)
                continue
            rep = run(spec) if delta else base
            dphi = (rep.phi - base.phi + math.pi) % (2 * math.pi) - math.pi
            predicted = None
            if name == "t2":
                predicted = om * delta
            elif name == "t1":
                predicted = -om * delta
            row.update(
                feasible=True,
                d_phi=dphi,
                d_f=rep.fidelity_f - base.fidelity_f,
                d_d=rep.fidelity_d - base.fidelity_d,
                predicted_d_phi=predicted,
            )
            rows.append(row)
    return rows
