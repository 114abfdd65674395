"""Byte-stable JSON and CSV emission of report dictionaries."""
from __future__ import annotations

import json
import math

import numpy as np

CSV_COLUMNS = ("shell_lo", "shell_hi", "d_min", "d_max", "tail_norm", "s_k1")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _dump(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _dump(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        out.append(json.dumps(obj))
    else:
        out.append(format_float(obj))


def to_json(report) -> str:
    """Sorted keys, floats at 17 significant digits, trailing newline."""
    out = []
    _dump(_plain(report), out)
    return "".join(out) + "\n"


def to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            v = row.get(col)
            cells.append("" if v is None else format_float(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_report(report, fmt="json", path=None, rows=None) -> str:
    """Render ``report`` (json) or ``rows`` (csv); write to ``path`` when given."""
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(rows if rows is not None else report.get("csv_rows", []))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
