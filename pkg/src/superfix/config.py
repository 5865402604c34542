"""Strict config loading and construction of spaces, maps and F from config data."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import yaml

from . import ffunctions as ff
from .contraction import (
    FIRST,
    MAX,
    MEAN,
    MIN,
    SECOND,
    AuxiliaryMap,
    ContractionKind,
    collapse_aux,
    constant_aux,
    shift_aux,
)
from .fixtures import bianchini_unit_map, build_example, unit_interval_map
from .spaces import (
    IntervalDomain,
    SuperMetricSpace,
    euclidean,
    finite_space,
    intro_supermetric,
    unit_interval_supermetric,
)
from .terrain import TerrainConfig


class ConfigError(ValueError):
    """Config file unreadable, rejected by its schema, or inconsistent."""


def load_schema(name: str) -> dict:
    text = resources.files("superfix").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def read_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def validate(data: dict, schema_name: str) -> dict:
    try:
        jsonschema.validate(data, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    return data


def load(path: str | Path, schema_name: str) -> dict:
    return validate(read_file(path), schema_name)


# ---------------------------------------------------------------------------
# Problems: space + T + S + F + kind
# ---------------------------------------------------------------------------

_METRICS = {"euclidean": euclidean, "intro": intro_supermetric, "unit-interval": unit_interval_supermetric}
_AUX = {"first": FIRST, "second": SECOND, "min": MIN, "max": MAX, "mean": MEAN}


@dataclass
class Problem:
    space: SuperMetricSpace
    T: Callable | None
    S: AuxiliaryMap | None
    F: ff.FFunction | None
    kind: ContractionKind | None
    truncation: dict


def _label_lookup(space: SuperMetricSpace) -> dict:
    return {str(x): x for x in space.sample()}


def build_space(entry: dict):
    """Space plus the fixture it came from (``None`` for explicit spaces)."""
    if "fixture" in entry:
        fx = build_example(entry["fixture"], entry.get("horizon"), entry.get("step"))
        return fx.space, fx
    if "finite" in entry:
        f = entry["finite"]
        try:
            space = finite_space(f["labels"], f["table"], f.get("s", 1.0), f.get("name", "finite"))
        except ValueError as exc:
            raise ConfigError(f"finite space: {exc}") from exc
        return space, None
    iv = entry["interval"]
    try:
        dom = IntervalDomain(iv["lo"], iv["hi"], iv["step"], tuple(iv.get("breakpoints", ())))
        space = SuperMetricSpace(
            dom, _METRICS[iv.get("metric", "euclidean")], iv.get("s", 1.0), iv.get("name", "interval")
        )
    except ValueError as exc:
        raise ConfigError(f"interval space: {exc}") from exc
    return space, None


def build_map(entry: dict, space: SuperMetricSpace) -> Callable:
    name = entry["name"]
    if name == "identity":
        return lambda x: x
    if name in ("scale", "constant"):
        if "c" not in entry:
            raise ConfigError(f"map {name!r} needs c")
        c = entry["c"]
        return (lambda x: c * x) if name == "scale" else (lambda x: c)
    if name == "unit-interval":
        return unit_interval_map
    if name == "bianchini-unit":
        return bianchini_unit_map
    labels = _label_lookup(space)
    if name == "shift-down":
        pts = sorted(space.sample())
        prev = {p: pts[max(i - 1, 0)] for i, p in enumerate(pts)}
        return prev.__getitem__
    if "table" not in entry:
        raise ConfigError("map 'table' needs a table")
    try:
        table = {labels[str(k)]: labels[str(v)] for k, v in entry["table"].items()}
    except KeyError as exc:
        raise ConfigError(f"map table refers to unknown point {exc.args[0]}") from exc
    missing = [x for x in space.sample() if x not in table]
    if missing:
        raise ConfigError(f"map table has no image for {missing}")
    return table.__getitem__


def build_aux(entry: dict, space: SuperMetricSpace) -> AuxiliaryMap:
    name = entry["name"]
    if name in _AUX:
        return _AUX[name]
    if name == "shift":
        if "a" not in entry:
            raise ConfigError("aux 'shift' needs a")
        return shift_aux(entry["a"])
    if "c" not in entry:
        raise ConfigError(f"aux {name!r} needs c")
    c = entry["c"]
    c = _label_lookup(space).get(str(c), c)
    return constant_aux(c) if name == "const" else collapse_aux(c)


def build_f(entry) -> ff.FFunction:
    try:
        return ff.resolve(entry)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_problem(cfg: dict) -> Problem:
    """Explicit entries win; a fixture space fills in whatever is left out."""
    space, fx = build_space(cfg["space"])
    T = build_map(cfg["map"], space) if "map" in cfg else (fx.map_T if fx else None)
    S = build_aux(cfg["aux"], space) if "aux" in cfg else (fx.aux_S if fx else None)
    F = build_f(cfg["F"]) if "F" in cfg else (fx.f if fx else None)
    kind = ContractionKind(cfg["kind"]) if "kind" in cfg else (fx.kind if fx else None)
    return Problem(space, T, S, F, kind, dict(fx.truncation) if fx else {})


# ---------------------------------------------------------------------------
# Terrain
# ---------------------------------------------------------------------------


def terrain_config(data: dict) -> TerrainConfig:
    known = {f.name for f in fields(TerrainConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown terrain keys {sorted(unknown)}")
    try:
        return TerrainConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"terrain config: {exc}") from exc
