"""Command-line front end: one subcommand per analysis, CSV plus JSON output.

Every output file starts with the package version and the fully resolved
configuration (``#`` lines in CSV, a ``meta`` member in JSON). Floats are
written with 17 significant digits and JSON keys are sorted, so the same
configuration reproduces byte-identical files.

Exit codes: 0 success, 2 usage, 3 config, 4 input file, 5 numerical or
optimization failure, 6 output file error, 70 unexpected error. Failures also
print one JSON line ``{"error": {"category": ..., "message": ...}}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .coupling import TwoWellModel, find_omega_extrema, omega_of_l
from .entangle import classify_gate, entangling_power, max_delta_sampled
from .io import header_lines, read_json, write_csv, write_json
from .lattice import LatticeError, LatticeSpec, find_minima, potential, scaling_report, tilt_coefficient
from .objectives import gate_report
from .optimizer import (
    FastApproachOptions,
    OptimizationError,
    OptimizationRun,
    OptimizerOptions,
    fast_approach_stage,
    optimize,
    plateau_sweep,
    sensitivity_scan,
)
from .path import PathSpec, eval_l, eval_ldot, validate
from .propagator import COMPUTATIONAL_LABELS, PropagationError, propagate
from .transport import TransportOptions, TransportProblem, evolve_displacement, optimize_transport

OUT_ENV = "FASTGATE_OUT"

EXIT_CODES = {"usage": 2, "config": 3, "input": 4, "numerical": 5, "output": 6, "internal": 70}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


class Context:
    """Resolved config, output directory and provenance for one invocation."""

    def __init__(self, command: str, cfg: RunConfig, out_dir: Path, seed: int, threads: int):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.seed = seed
        self.threads = threads
        lines = cfg.resolved_lines() + [f"cli.seed = {seed}", f"cli.threads = {threads}"]
        self.header = header_lines(command, lines)
        self.meta = {"version": __version__, "command": command, "config": cfg.to_dict(),
                     "seed": seed, "threads": threads}
        self.written: list[str] = []

    def csv(self, name: str, columns, rows) -> None:
        self._record(write_csv, self.out_dir / name, list(columns), rows, self.header)

    def json(self, name: str, payload: dict) -> None:
        self._record(write_json, self.out_dir / name, payload, self.meta)

    def _record(self, writer, path, *args):
        try:
            writer(path, *args)
        except OSError as exc:
            raise CliError("output", f"cannot write {path}: {exc}") from exc
        self.written.append(str(path))

    # typed views
    def params(self):
        return self.cfg.physical_params()

    def trunc(self):
        return self.cfg.truncation()

    def propagation(self) -> dict:
        p = self.cfg["propagation"]
        return {"tol": p["tol"], "method": p["method"], "max_step": p["max_step"]}

    def optimizer_options(self, **changes) -> OptimizerOptions:
        o = self.cfg["optimizer"]
        p = self.cfg["propagation"]
        opts = OptimizerOptions(
            j_threshold=o["j_threshold"], gtol=o["gtol"], max_iter=o["max_iter"], rel_step=o["rel_step"],
            max_step_norm=o["max_step_norm"], tol=p["tol"], method=p["method"], max_step=p["max_step"],
            workers=self.threads,
        )
        return replace(opts, **changes)


# ---------------------------------------------------------------------------
# shared helpers


def _load_path(ctx: Context, path_file: str | None) -> PathSpec:
    """Path from a JSON file (a path dict, or a result holding ``best_path``) or from [path]."""
    if path_file is None:
        try:
            return ctx.cfg.path()
        except ConfigError as exc:
            raise CliError("config", f"{exc}; give --path or a [path] section") from exc
    try:
        data = read_json(Path(path_file))
    except OSError as exc:
        raise CliError("input", f"cannot read path file {path_file}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError("input", f"{path_file}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and "best_path" in data:
        data = data["best_path"]
    elif isinstance(data, dict) and "path" in data:
        data = data["path"]
    try:
        spec = PathSpec.from_dict(data)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CliError("input", f"{path_file}: invalid path: {exc}") from exc
    v = validate(spec)
    if not v["ok"]:
        raise CliError("input", f"{path_file}: infeasible path: {'; '.join(v['violations'])}")
    return spec


def _path_rows(spec: PathSpec, n: int):
    t = np.linspace(0.0, spec.tau, n)
    return zip(t, eval_l(spec, t), eval_ldot(spec, t))


def _report_dict(result) -> dict:
    rep = gate_report(result.c_full, result.comp)
    d = rep.to_dict()
    d["c_restricted"] = [[[z.real, z.imag] for z in row] for row in result.c_restricted]
    d["row_norms"] = result.row_norms.tolist()
    return d


# ---------------------------------------------------------------------------
# subcommands


def cmd_omega_scan(ctx: Context, args) -> dict:
    s = ctx.cfg["scan"]
    curve = find_omega_extrema(ctx.params(), (s["l_min"], s["l_max"]), s["n_samples"])
    ctx.csv("omega.csv", ["l", "omega"], zip(curve.l, curve.omega))
    m = curve.maximum
    summary = {
        "extrema": curve.extrema,
        "maximum": m,
        "pi_over_omega_max": math.pi / m["omega"] if m else None,
        "length_unit_over_lambda_tot": 1.0 / ctx.params().lambda_tot,
    }
    ctx.json("omega_summary.json", summary)
    return summary


def cmd_propagate(ctx: Context, args) -> dict:
    spec = _load_path(ctx, args.path)
    n_hist = ctx.cfg["output"]["n_history"]
    trunc = ctx.trunc()
    res = propagate(spec, ctx.params(), trunc, n_history=n_hist, **ctx.propagation())
    ctx.csv("path.csv", ["t", "l", "ldot"], _path_rows(spec, n_hist))
    labels = [f"abs_f_{m}_{n}" for m in range(trunc.n1_max + 1) for n in range(trunc.n2_max + 1)]
    ls = eval_l(spec, res.times)
    for i, lab in enumerate(COMPUTATIONAL_LABELS):
        rows = (
            [t, lv, *h] for t, lv, h in zip(res.times, ls, res.histories[:, i, :])
        )
        ctx.csv(f"coefficients_{lab}.csv", ["t", "l", *labels], rows)
    report = _report_dict(res)
    report["path"] = spec.to_dict()
    report["solver_stats"] = res.solver_stats
    ctx.json("gate_report.json", report)
    return report


def _history_rows(run: OptimizationRun):
    for h in run.history:
        p = h.parameters
        yield [h.iteration, h.objective, h.j_phi, h.fidelity_f, h.fidelity_d, h.phi, h.grad_norm,
               h.n_evaluations, p["l0"], p["l_p"], p["t1"], p["t2"], p["tau"], *p["q1"], *p["q2"]]


def cmd_optimize_gate(ctx: Context, args) -> dict:
    seed_path = _load_path(ctx, args.path)
    o = ctx.cfg["optimizer"]
    params, trunc = ctx.params(), ctx.trunc()
    if o["mode"] == "plain":
        run = OptimizationRun(seed_path, list(o["free_parameters"]), o["objective"], o["target_phi"])
        optimize(run, params, trunc, ctx.optimizer_options(phase_lock=o["phase_lock"]))
    else:
        fa = FastApproachOptions(
            stage_a=ctx.optimizer_options(j_threshold=1e-6, max_iter=min(60, o["max_iter"])),
            stage_c=ctx.optimizer_options(j_threshold=1e-2, max_iter=min(150, o["max_iter"])),
            polish=ctx.optimizer_options(j_threshold=o["polish_threshold"]),
            polish_parameters=tuple(o["free_parameters"]),
            rest_to_rest_seed=o["rest_to_rest_seed"],
        )
        run = OptimizationRun(seed_path, list(o["free_parameters"]), o["objective"], o["target_phi"])
        fast_approach_stage(run, params, trunc, fa)
    if run.best_path is None:
        raise CliError("numerical", f"optimization produced no feasible point: {run.message}")
    nq1, nq2 = len(run.best_path.q1), len(run.best_path.q2)
    columns = ["iteration", "objective", "j_phi", "fidelity_f", "fidelity_d", "phi", "grad_norm",
               "n_evaluations", "l0", "l_p", "t1", "t2", "tau",
               *[f"q1_{i}" for i in range(nq1)], *[f"q2_{i}" for i in range(nq2)]]
    ctx.csv("history.csv", columns, _history_rows(run))
    ctx.csv("path.csv", ["t", "l", "ldot"], _path_rows(run.best_path, ctx.cfg["output"]["n_history"]))
    summary = run.summary()
    ctx.json("optimization.json", summary)
    ctx.json("best_path.json", run.best_path.to_dict())
    return summary


def cmd_sweep_plateau(ctx: Context, args) -> dict:
    spec = _load_path(ctx, args.path)
    params = ctx.params()
    sw = plateau_sweep(spec, params, ctx.trunc(), ctx.cfg["sweep"]["n_points"], **ctx.propagation())
    ctx.csv("sweep.csv", ["plateau", "phi", "fidelity_f", "fidelity_d"],
            zip(sw.durations, sw.phi, sw.fidelity_f, sw.fidelity_d))
    summary = {
        "slope": sw.slope,
        "intercept": sw.intercept,
        "residual_std": sw.residual_std,
        "omega_at_l_p": float(omega_of_l(spec.l_p, params)),
        "fidelity_f_range": float(np.ptp(sw.fidelity_f)),
        "fidelity_d_range": float(np.ptp(sw.fidelity_d)),
        "max_fidelity_deviation": sw.max_fidelity_deviation(sw.fidelity_f[-1], sw.fidelity_d[-1]),
        "path": spec.to_dict(),
    }
    ctx.json("sweep.json", summary)
    return summary


def cmd_sensitivity(ctx: Context, args) -> dict:
    spec = _load_path(ctx, args.path)
    s = ctx.cfg["sensitivity"]
    rows = sensitivity_scan(spec, ctx.params(), ctx.trunc(), s["perturbation"], tuple(s["parameters"]),
                            **ctx.propagation())
    cols = ["parameter", "sign", "delta", "feasible", "d_phi", "d_f", "d_d", "predicted_d_phi"]
    ctx.csv("sensitivity.csv", cols, ([r.get(c) for c in cols] for r in rows))
    feasible = [r for r in rows if r["feasible"]]
    summary = {
        "rows": rows,
        "max_abs_d_phi": max((abs(r["d_phi"]) for r in feasible), default=None),
        "max_abs_d_f": max((abs(r["d_f"]) for r in feasible), default=None),
        "max_abs_d_d": max((abs(r["d_d"]) for r in feasible), default=None),
        "path": spec.to_dict(),
    }
    ctx.json("sensitivity.json", summary)
    return summary


def cmd_optimize_transport(ctx: Context, args) -> dict:
    t = ctx.cfg["transport"]
    problem = TransportProblem(frequency=t["frequency"], length_scale=t["length_scale"],
                               distance=t["distance"], tau=t["tau"])
    report = optimize_transport(problem, TransportOptions(amplitude_tol=t["amplitude_tol"], budget=t["budget"]))
    cols = ["t", "l", "y", "P"]
    hist = evolve_displacement(report.problem, t["n_samples"])
    ctx.csv("transport.csv", cols, zip(hist.t, hist.l, hist.y, hist.escape))
    if report.shortest_problem is not None:
        short = evolve_displacement(report.shortest_problem, t["n_samples"])
        ctx.csv("transport_shortest.csv", cols, zip(short.t, short.l, short.y, short.escape))
    summary = report.to_dict()
    summary["bisection"] = report.bisection
    ctx.json("transport.json", summary)
    return summary


def cmd_lattice_design(ctx: Context, args) -> dict:
    c = ctx.cfg["lattice"]
    spec = LatticeSpec(v0=c["v0"], alpha=c["alpha"], delta=c["delta"], k=c["k"], period_offset=c["period_offset"])
    spec = tilt_coefficient(spec)
    x1, x2 = find_minima(spec, tilted=True)
    mid = 0.5 * (x1 + x2)
    x = np.linspace(mid - 0.5 * math.pi / spec.k, mid + 0.5 * math.pi / spec.k, c["n_profile"])
    ctx.csv("lattice_profile.csv", ["x", "V", "V_eff"], zip(x, potential(spec, x), potential(spec, x, tilted=True)))
    rep = scaling_report(spec, c["k_values"])
    cols = ["k", "v0", "x1", "x2", "separation", "tilt_a", "a_over_k", "a_over_k_v0", "veff1", "veff2",
            "depth_residual", "curv1", "curv2"]
    ctx.csv("lattice_scaling.csv", cols, ([r[k] for k in cols] for r in rep["rows"]))
    summary = {"tilt_c": spec.tilt_c, "tilt_a": spec.tilt_a, "x1": x1, "x2": x2, **rep}
    ctx.json("lattice.json", summary)
    return summary


def cmd_entangle(ctx: Context, args) -> dict:
    e = ctx.cfg["entangle"]
    phis = np.linspace(0.0, 2 * math.pi, e["n_phi"] + 1)[1:]
    rows = []
    for phi in phis:
        exact = entangling_power(phi)
        sampled = max_delta_sampled(phi, e["n_states"], ctx.seed)
        rows.append([phi, exact, sampled, abs(sampled - exact)])
    ctx.csv("entangling_power.csv", ["phi", "entangling_power", "max_delta_sampled", "abs_difference"], rows)
    summary = {"max_abs_difference": max(r[3] for r in rows), "n_states": e["n_states"], "seed": ctx.seed}
    if args.report:
        try:
            data = read_json(Path(args.report))
        except OSError as exc:
            raise CliError("input", f"cannot read report {args.report}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError("input", f"{args.report}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if "c_restricted" in data:
            block = np.array([[complex(re, im) for re, im in row] for row in data["c_restricted"]])
        elif "c_diag" in data:
            block = np.diag([complex(re, im) for re, im in data["c_diag"]])
        else:
            raise CliError("input", f"{args.report}: no c_restricted or c_diag member")
        cls = classify_gate(block, e["tolerance"])
        summary["classification"] = asdict(cls)
        if cls.is_phase_gate:
            summary["classification"]["entangling_power"] = entangling_power(cls.phi)
    ctx.json("entangle.json", summary)
    return summary


# ---------------------------------------------------------------------------
# argument parsing

COMMANDS = {
    "omega-scan": (cmd_omega_scan, "phase rate Omega(l) and its extrema",
                   "omega.csv: l, omega. omega_summary.json: extrema, maximum, pi/Omega_max."),
    "propagate": (cmd_propagate, "propagate the computational states along a path",
                  "path.csv: t, l, ldot. coefficients_<ij>.csv: t, l, abs_f_<m>_<n> for every retained "
                  "state. gate_report.json: phase, J_phi, F, D, 4x4 block, norms."),
    "optimize-gate": (cmd_optimize_gate, "optimize a gate path (plain or fast-approach mode)",
                      "history.csv: iteration, objective, j_phi, fidelity_f, fidelity_d, phi, grad_norm, "
                      "n_evaluations, l0, l_p, t1, t2, tau, q1_*, q2_*. path.csv: t, l, ldot of the best path. "
                      "optimization.json, best_path.json."),
    "sweep-plateau": (cmd_sweep_plateau, "vary the plateau duration of a path",
                      "sweep.csv: plateau, phi (unwrapped), fidelity_f, fidelity_d. sweep.json: fitted slope, "
                      "residual std, fidelity ranges."),
    "sensitivity": (cmd_sensitivity, "perturb path parameters by a relative amount",
                    "sensitivity.csv: parameter, sign, delta, feasible, d_phi, d_f, d_d, predicted_d_phi."),
    "optimize-transport": (cmd_optimize_transport, "shape a single-trap transport ramp",
                           "transport.csv and transport_shortest.csv: t, l, y, P. transport.json: report."),
    "lattice-design": (cmd_lattice_design, "tilt and k-scaling of a bichromatic lattice double well",
                       "lattice_profile.csv: x, V, V_eff. lattice_scaling.csv: k, v0, x1, x2, separation, "
                       "tilt_a, a_over_k, a_over_k_v0, veff1, veff2, depth_residual, curv1, curv2."),
    "entangle": (cmd_entangle, "entangling power and phase-gate classification",
                 "entangling_power.csv: phi, entangling_power, max_delta_sampled, abs_difference. "
                 "entangle.json: summary and, with --report, the gate classification."),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastgate", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"fastgate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, columns) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=f"Output columns: {columns}")
        p.add_argument("--config", help="INI configuration file (defaults apply when omitted)")
        p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and [output] directory)")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for gradient evaluation")
        if name in ("propagate", "optimize-gate", "sweep-plateau", "sensitivity"):
            p.add_argument("--path", help="JSON path file (a path dict or an optimization result)")
        if name == "entangle":
            p.add_argument("--report", help="gate_report.json to classify")
    return parser


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg["output"]["directory"])


def _fail(category: str, message: str) -> int:
    print(json.dumps({"error": {"category": category, "message": message}}), file=sys.stderr)
    return EXIT_CODES[category]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        return _fail("usage", "--threads must be at least 1")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail("config", str(exc))
    ctx = Context(args.command, cfg, _out_dir(args, cfg), args.seed, args.threads)
    func = COMMANDS[args.command][0]
    try:
        func(ctx, args)
    except CliError as exc:
        return _fail(exc.category, str(exc))
    except ConfigError as exc:
        return _fail("config", str(exc))
    except (OptimizationError, PropagationError, LatticeError, ArithmeticError) as exc:
        return _fail("numerical", f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        return _fail("numerical", f"{type(exc).__name__}: {exc}")
    except OSError as exc:
        return _fail("output", str(exc))
    except Exception as exc:  # noqa: BLE001
        return _fail("internal", f"{type(exc).__name__}: {exc}")
    for path in ctx.written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
