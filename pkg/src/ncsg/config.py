"""Run configuration: JSON text -> validated :class:`RunConfig` with defaults."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import jsonschema

from .errors import ConfigError
from .group import GroupDescriptor, TORUS, exact_level_for, make_group
from .spectral import COMPACT_TOL, GOHBERG_TOL, WitnessSpec, default_shells
from .symbol import FAMILIES, SymbolSpec

_NUM = {"type": "number"}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}
_LABEL = {"type": "array", "items": {"type": "integer"}, "minItems": 1}

SYMBOL_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["family"],
    "properties": {"family": {"enum": list(FAMILIES)}, "s": _NUM, "expr": {"type": "string"},
                   "c": {"type": "number", "exclusiveMinimum": 0}, "multiplier": {"type": "string"},
                   "path": {"type": "string"}},
}

SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["group", "symbol"],
    "properties": {
        "group": {"type": "object", "additionalProperties": False, "required": ["kind"],
                  "properties": {"kind": {"enum": ["torus", "su2"]}, "dim": {"type": "integer", "minimum": 1}}},
        "lambda": {"type": "number", "minimum": 1},
        "grid": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "symbol": SYMBOL_SCHEMA,
        "analysis": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "shells": _NUM_LIST, "k_fixed": {"type": "integer", "minimum": 0},
                "lambda_list": _NUM_LIST, "R_list": _NUM_LIST,
                "xi_sequence": {"type": "array", "items": _LABEL},
                "witness": {"type": "object", "additionalProperties": False,
                            "properties": {"radius": {"type": "number", "exclusiveMinimum": 0},
                                           "expr": {"type": "string"}}},
                "tolerances": {"type": "object", "additionalProperties": False,
                               "properties": {"gohberg": _NUM, "compactness": _NUM, "ellipticity": _NUM}},
                "rho": _NUM, "alpha_max": {"type": "integer", "minimum": 0, "maximum": 2},
                "beta_max": {"type": "integer", "minimum": 0, "maximum": 2},
                "resolvent_lambda": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "R": _NUM, "field": {"type": "string"}, "q_index": {"type": "integer", "minimum": 0},
                "x_index": {"type": "integer", "minimum": 0},
            },
        },
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"path": {"type": "string"}, "format": {"enum": ["json", "csv"]},
                                  "symbol_path": {"type": "string"}}},
    },
}


@dataclass(frozen=True)
class AnalysisConfig:
    shells: tuple | None = None
    k_fixed: int = 5
    lambda_list: tuple | None = None
    R_list: tuple | None = None
    xi_sequence: tuple | None = None
    witness: WitnessSpec = WitnessSpec()
    gohberg_tol: float = GOHBERG_TOL
    compactness_tol: float = COMPACT_TOL
    ellipticity_threshold: float = 1e6
    rho: float = 1.0
    alpha_max: int = 1
    beta_max: int = 1
    resolvent_lambda: tuple | None = None
    R: float = 1.0
    field: str | None = None
    q_index: int = 0
    x_index: int = 0


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "json"
    symbol_path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    group: GroupDescriptor
    lam: float
    symbol: SymbolSpec
    analysis: AnalysisConfig = AnalysisConfig()
    output: OutputConfig = OutputConfig()

    @property
    def exact_level(self):
        return exact_level_for(self.group)


def _pointer(path):
    return "".join(f"/{p}" for p in path)


def _schema_error(err):
    if err.validator == "additionalProperties":
        known = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - known)
        return ConfigError(f"unknown key {extra[0]!r}", _pointer(list(err.absolute_path) + extra[:1]))
    return ConfigError(err.message, _pointer(err.absolute_path))


def validate(data, schema=SCHEMA):
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data),
                    key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        raise _schema_error(errors[0])


def default_grid(kind, level):
    """Smallest grid whose exact level reaches ``level``."""
    if kind == TORUS:
        return (2 * level + 2,)
    return (level + 1, math.ceil((level + 1) / 2), 2 * level + 1)


def parse_config(text, symbol_override=None) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    if symbol_override is not None and isinstance(data, dict):
        data = dict(data, symbol=symbol_override)
    validate(data)
    g = data["group"]
    kind, dim = g["kind"], g.get("dim", 1)
    if kind != TORUS and "dim" in g:
        raise ConfigError("dim applies to the torus only", "/group/dim")
    lam = float(data.get("lambda", 8.0))
    group = make_group(kind, dim)
    try:
        dual = group.dual(lam)
    except ValueError as exc:
        raise ConfigError(str(exc), "/lambda") from exc
    top = max(ir.level for ir in dual)
    sizes = tuple(data["grid"]) if "grid" in data else default_grid(kind, 2 * top)
    if (kind == TORUS and len(sizes) not in (1, dim)) or (kind != TORUS and len(sizes) != 3):
        raise ConfigError(f"wrong number of grid sizes for {kind}", "/grid")
    try:
        desc = GroupDescriptor(kind, sizes, dim)
    except ValueError as exc:
        raise ConfigError(str(exc), "/grid") from exc
    exact = exact_level_for(desc)
    if top > exact:
        raise ConfigError(f"lambda {lam} needs level {top} but the grid is exact only to {exact}", "/lambda")
    try:
        sym = SymbolSpec.from_dict(data["symbol"])
    except ValueError as exc:
        raise ConfigError(str(exc), "/symbol") from exc
    a = data.get("analysis", {})
    tol = a.get("tolerances", {})
    analysis = AnalysisConfig(
        shells=tuple(a["shells"]) if "shells" in a else tuple(default_shells(lam)),
        k_fixed=a.get("k_fixed", 5),
        lambda_list=tuple(a["lambda_list"]) if "lambda_list" in a else None,
        R_list=tuple(a["R_list"]) if "R_list" in a else None,
        xi_sequence=tuple(tuple(x) for x in a["xi_sequence"]) if "xi_sequence" in a else None,
        witness=WitnessSpec.from_dict(a.get("witness")),
        gohberg_tol=tol.get("gohberg", GOHBERG_TOL),
        compactness_tol=tol.get("compactness", COMPACT_TOL),
        ellipticity_threshold=tol.get("ellipticity", 1e6),
        rho=a.get("rho", 1.0), alpha_max=a.get("alpha_max", 1), beta_max=a.get("beta_max", 1),
        resolvent_lambda=tuple(a["resolvent_lambda"]) if "resolvent_lambda" in a else None,
        R=a.get("R", 1.0), field=a.get("field"), q_index=a.get("q_index", 0), x_index=a.get("x_index", 0),
    )
    o = data.get("output", {})
    return RunConfig(desc, lam, sym, analysis, OutputConfig(o.get("path"), o.get("format", "json"),
                                                            o.get("symbol_path")))


def load_config(path, symbol_override=None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), symbol_override)
