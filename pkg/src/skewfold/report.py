"""Deterministic JSON/CSV emitters and the shipped JSON schemas."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .poly import format_number

__all__ = ["to_jsonable", "dumps", "load_schema", "validate", "rows_to_csv"]


def to_jsonable(obj):
    """Plain JSON types; complex numbers become ``[re, im]`` and non-finite floats ``null``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        text = format_number(obj)
        # keep it a JSON number with a fractional marker
        return text if any(c in text for c in ".en") else text + ".0"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float printed to 17 significant digits."""
    return _encode(to_jsonable(obj), indent, 0) + "\n"


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("skewfold").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(name: str, payload) -> None:
    """Round-trip ``payload`` through JSON text and check it against a schema."""
    data = json.loads(dumps(payload))
    jsonschema.validate(data, load_schema(name))


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for c in columns:
            v = row.get(c)
            if isinstance(v, float):
                out.append(format_number(v))
            elif v is None:
                out.append("")
            else:
                out.append(v)
        writer.writerow(out)
    return buf.getvalue()
