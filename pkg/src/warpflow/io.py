"""Plain CSV/JSON artifact writers.

All run outputs are text: CSV with documented headers plus a JSON summary,
so downstream tools (the plotting scripts in particular) consume them
without bindings. Numbers are written with repr-faithful %.17g formatting;
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .base import ScalarField

__all__ = ["write_csv", "write_json", "write_scalar_field_csv", "read_scalar_field_csv"]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    return format(xf, ".17g")


def write_csv(path, columns, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _json_safe(obj):
    """Non-finite floats become strings: bare Infinity/NaN is not valid JSON."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)  # 'inf', '-inf', 'nan'
    return obj


def write_json(path, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_scalar_field_csv(path, field: ScalarField) -> None:
    """Flattened row-major dump with a header declaring the grid shape."""
    shape = "x".join(str(s) for s in field.base.shape)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# grid_shape={shape} variant={field.base.variant}\n")
        fh.write("value\n")
        for v in field.values.ravel(order="C"):
            fh.write(_fmt(v) + "\n")


def read_scalar_field_csv(path) -> tuple[np.ndarray, tuple]:
    """Values and declared shape from a field CSV (inverse of the writer)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# grid_shape="):
            raise ValueError(f"{path}: missing grid_shape header")
        shape = tuple(int(s) for s in header.split()[1].split("=")[1].split("x"))
        fh.readline()  # column header
        values = np.array([float(line) for line in fh if line.strip()])
    return values.reshape(shape), shape
