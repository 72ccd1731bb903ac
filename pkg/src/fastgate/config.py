"""Strict INI run configuration.

Every section and key is declared in ``SCHEMA``; unknown sections or keys and
values that fail to parse are errors. Sections are optional as a whole (their
defaults apply), but a section that declares required keys must then list
them.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .basis import BasisTruncation, PhysicalParams
from .path import PathSpec, validate


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.replace(",", " ").split())


def _names(text: str) -> tuple:
    return tuple(v for v in text.replace(",", " ").split() if v)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> (parser, default); default None with required=True below
SCHEMA: dict[str, dict[str, tuple]] = {
    "physics": {
        "length_ratio": (float, 1.2),
        "epsilon": (float, 0.0547),
        "scattering_length": (float, None),
        "transverse_frequency": (float, 10.0),
        "length_unit": (str, "well2"),
    },
    "truncation": {
        "n1_max": (int, 8),
        "n2_max": (int, 8),
    },
    "propagation": {
        "method": (str, "magnus"),
        "tol": (float, 1e-10),
        "max_step": (float, 0.1),
    },
    "path": {
        "l0": (float, None),
        "l_p": (float, None),
        "t1": (float, None),
        "t2": (float, None),
        "tau": (float, None),
        "q1": (_floats, (0.0, 0.0, 0.0, 0.0)),
        "q2": (_floats, (0.0, 0.0, 0.0, 0.0)),
    },
    "optimizer": {
        "mode": (str, "plain"),
        "objective": (str, "j_phi"),
        "free_parameters": (_names, ("q1", "q2", "t1", "t2", "l_p")),
        "target_phi": (float, math.pi),
        "j_threshold": (float, 1e-5),
        "gtol": (float, 1e-7),
        "max_iter": (int, 500),
        "rel_step": (float, 1e-4),
        "max_step_norm": (float, 0.05),
        "polish_threshold": (float, 1e-4),
        "rest_to_rest_seed": (_bool, True),
        "phase_lock": (_bool, False),
    },
    "scan": {
        "l_min": (float, 1.0),
        "l_max": (float, 6.0),
        "n_samples": (int, 1001),
    },
    "sweep": {
        "n_points": (int, 21),
    },
    "sensitivity": {
        "perturbation": (float, 0.01),
        "parameters": (_names, ("t1", "t2", "tau", "l_p", "q1", "q2")),
    },
    "transport": {
        "frequency": (float, 1.0),
        "length_scale": (float, 1.0),
        "distance": (float, 1.5),
        "tau": (float, 2 * math.pi),
        "budget": (float, 1e-10),
        "amplitude_tol": (float, 1e-7),
        "n_samples": (int, 401),
    },
    "lattice": {
        "v0": (float, 1.0),
        "alpha": (float, 1.0),
        "delta": (float, 0.2),
        "k": (float, 1.0),
        "k_values": (_floats, (1.0, 1.5, 2.0, 3.0, 4.0)),
        "period_offset": (int, 0),
        "n_profile": (int, 801),
    },
    "entangle": {
        "n_phi": (int, 20),
        "n_states": (int, 100000),
        "tolerance": (float, 0.05),
    },
    "output": {
        "directory": (str, "out"),
        "n_history": (int, 2000),
    },
}

REQUIRED = {"path": ("l0", "l_p", "t1", "t2", "tau")}


@dataclass
class RunConfig:
    """Resolved configuration: ``values[section][key]`` plus which sections were given."""

    values: dict
    given: set = field(default_factory=set)
    source: str = "<defaults>"
    raw_keys: dict = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    # typed views -----------------------------------------------------------

    def physical_params(self) -> PhysicalParams:
        p = self.values["physics"]
        eps, a_s = p["epsilon"], p["scattering_length"]
        if a_s is not None and "epsilon" in self.raw_keys.get("physics", ()):
            raise ConfigError("physics: give either epsilon or scattering_length, not both")
        kwargs = dict(transverse_frequency=p["transverse_frequency"], length_unit=p["length_unit"])
        if a_s is not None:
            return PhysicalParams.from_ratio(p["length_ratio"], scattering_length=a_s, **kwargs)
        return PhysicalParams.from_ratio(p["length_ratio"], epsilon=eps, **kwargs)

    def truncation(self) -> BasisTruncation:
        t = self.values["truncation"]
        return BasisTruncation(t["n1_max"], t["n2_max"])

    def path(self) -> PathSpec:
        if "path" not in self.given:
            raise ConfigError("missing section [path]")
        p = self.values["path"]
        return PathSpec(p["l0"], p["l_p"], p["t1"], p["t2"], p["tau"], p["q1"], p["q2"])

    def resolved_lines(self) -> list[str]:
        """Stable text rendering of every resolved value (for output headers)."""
        lines = []
        for section in SCHEMA:
            for key in SCHEMA[section]:
                v = self.values[section][key]
                if isinstance(v, tuple):
                    v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
                elif isinstance(v, float):
                    v = repr(v)
                lines.append(f"{section}.{key} = {v}")
        return lines

    def to_dict(self) -> dict:
        return {s: {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.values[s].items()}
                for s in SCHEMA}


def defaults() -> RunConfig:
    return RunConfig({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    cfg = defaults()
    cfg.source = source
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        cfg.given.add(section)
        cfg.raw_keys[section] = list(parser[section])
        for key, raw in parser[section].items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            conv = SCHEMA[section][key][0]
            try:
                cfg.values[section][key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: [{section}] {key} = {raw!r}: {exc}") from exc
        for key in REQUIRED.get(section, ()):
            if key not in parser[section]:
                raise ConfigError(f"{source}: missing key '{key}' in [{section}]")
    _validate(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        cfg = defaults()
        _validate(cfg)
        return cfg
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p))


def _validate(cfg: RunConfig) -> None:
    """Build the typed objects once so invalid values fail at load time."""
    try:
        cfg.physical_params()
        cfg.truncation()
        if "path" in cfg.given:
            spec = cfg.path()
            v = validate(spec)
            if not v["ok"]:
                raise ConfigError("path: " + "; ".join(v["violations"]))
            if not spec.q1 or not spec.q2:
                raise ConfigError("path: q1 and q2 need at least one coefficient each")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    o = cfg.values["optimizer"]
    if o["mode"] not in ("plain", "fast"):
        raise ConfigError("optimizer: mode must be 'plain' or 'fast'")
    if o["phase_lock"] and (o["mode"] != "plain" or "t2" in o["free_parameters"]):
        raise ConfigError("optimizer: phase_lock needs mode = plain and t2 not free (t2 is solved for the phase)")
    if cfg.values["propagation"]["method"] not in ("magnus", "rk", "implicit"):
        raise ConfigError("propagation: method must be magnus, rk or implicit")
