"""Deterministic JSON and CSV writers.

Floats use 17 significant digits so that every value round-trips exactly, and
non-finite values are written as the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
Key order is the insertion order of the producing code, so identical inputs
give byte-identical output.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__

TOOL = "superfix"


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    text = "%.17g" % x
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def to_plain(obj):
    """Reduce numpy, enum, dataclass and tuple values to JSON-ready builtins."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(to_plain(k)): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    return obj


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj) if math.isfinite(obj) else json.dumps(format_float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _emit(to_plain(obj), indent, 0) + "\n"


def header(command: str, config) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "config": to_plain(config)}


def json_document(command: str, config, result) -> str:
    doc = header(command, config)
    doc["result"] = result
    return dumps(doc)


def _cell(v) -> str:
    v = to_plain(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (list, dict)):
        return dumps(v, indent=0).replace("\n", "")
    return str(v)


def csv_document(command: str, config, rows: list[dict], columns: list[str] | None = None) -> str:
    """CSV preceded by ``#`` comment lines carrying the tool version and config."""
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    buf.write(f"# tool={TOOL} version={__version__} command={command}\n")
    buf.write("# config=" + dumps(config, indent=0).replace("\n", "") + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Rows of a :func:`csv_document`, skipping comment lines; cells stay strings."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
