"""Deterministic CSV and JSON output with a provenance header."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FORMAT = "%.17g"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return FLOAT_FORMAT % (float(v) + 0.0)


def header_lines(command: str, config_lines: list[str]) -> list[str]:
    return [f"fastgate {__version__}", f"command: {command}"] + [f"config: {line}" for line in config_lines]


def write_csv(path: Path, columns: list[str], rows, header: list[str]) -> Path:
    """Write ``rows`` (iterables matching ``columns``) after ``#``-prefixed header lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    """Write ``{"meta": meta, "result": payload}`` with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable({"meta": meta, "result": payload}), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    return path


def read_json(path: Path) -> dict:
    """Load a JSON file; the ``result`` member is returned when present."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict) and "result" in data and "meta" in data:
        return data["result"]
    return data
