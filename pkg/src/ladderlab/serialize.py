"""Canonical JSON and CSV output.

Floats are always written with 17 significant digits so that repeated runs
produce byte-identical files and values round-trip exactly.
"""
from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence

import numpy as np


def format_float(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        return "null"
    if value == 0.0:
        return "0.0"  # drops the sign of -0.0
    text = format(value, ".17g")
    if "e" not in text and "." not in text and "inf" not in text:
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return _quote(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{_quote(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Sequence):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with canonical float formatting and insertion-ordered keys."""
    return _encode(obj, indent, 0) + "\n"


def table_csv(columns: Mapping[str, Sequence[float]]) -> str:
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) if math.isfinite(v) else "nan" for v in row))
    return "\n".join(lines) + "\n"
