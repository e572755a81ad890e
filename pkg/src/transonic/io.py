"""CSV / JSON writers with byte-reproducible number formatting.

Floats are written with ``repr``, i.e. the shortest decimal string that
round-trips to the same double (at most 17 significant digits).
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def format_number(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0.0"  # collapse -0.0
    return repr(x)


def write_csv(path, header, columns):
    """Write equally long 1-D columns with a header row."""
    cols = [np.asarray(c).ravel() for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("CSV columns must have equal length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(format_number(c[i]) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv` into a dict of arrays."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    data = data.reshape(len(text) - 1, len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return x
    return obj


def to_jsonable(obj):
    """Convert numpy scalars/arrays (recursively) to plain JSON types."""
    return _jsonable(obj)


def write_json(path, obj):
    # sort_keys + fixed indent keeps the byte stream stable between reruns;
    # json uses float.__repr__, so numbers round-trip exactly
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
