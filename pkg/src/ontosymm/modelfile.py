"""Reading and writing model files.

A model file is a JSON object with an ``"experiment"`` entry and
optionally an ``"ont_model"`` entry. Tables are lists of cell records::

    {"a": "+1", "b": "-1", "x": "0", "y": "1", "p": "1/4 + -1/8*sqrt3"}

Every cell must be present; nothing defaults to zero. Output is
canonical (sorted keys, cells in label order, lowest-terms scalars) so
the same model always serializes to the same bytes.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .numerics import EXACT, Direction, NumericsError, format_scalar, parse_scalar
from .ontological import OntModel, OntologicalError, ontic_label
from .operational import Experiment, OperationalError


class ModelFileError(ValueError):
    pass


class ParseError(ModelFileError):
    """The file is not valid JSON."""


class SchemaError(ModelFileError):
    """The JSON does not describe a complete model."""


_LABELS = {"type": "array", "minItems": 1, "items": {"type": "string"}}
_ONTIC = {"anyOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}}]}
_P = {"anyOf": [{"type": "string"}, {"type": "number"}]}
_DIRS = {
    "type": "object",
    "additionalProperties": {"type": "array", "minItems": 3, "maxItems": 3, "items": _P},
}


def _record(*keys: str, ontic: str | None = None) -> dict:
    props: dict[str, Any] = {k: {"type": "string"} for k in keys}
    if ontic:
        props[ontic] = _ONTIC
    props["p"] = _P
    return {
        "type": "object",
        "required": [*keys, *([ontic] if ontic else []), "p"],
        "properties": props,
        "additionalProperties": False,
    }


EXPERIMENT_SCHEMA = {
    "type": "object",
    "required": ["name", "omega_a", "omega_b", "omega_x", "omega_y", "table"],
    "properties": {
        "name": {"type": "string"},
        "omega_a": _LABELS,
        "omega_b": _LABELS,
        "omega_x": _LABELS,
        "omega_y": _LABELS,
        "table": {"type": "array", "items": _record("a", "b", "x", "y")},
        "directions_x": _DIRS,
        "directions_y": _DIRS,
    },
    "additionalProperties": False,
}

ONT_MODEL_SCHEMA = {
    "type": "object",
    "required": ["experiment", "lambda", "prep_out", "prep_ontic", "meas"],
    "properties": {
        "experiment": {"type": "string"},
        "lambda": {"type": "array", "minItems": 1, "items": _ONTIC},
        "prep_out": {"type": "array", "items": _record("a", "x")},
        "prep_ontic": {"type": "array", "items": _record("a", "x", ontic="lambda")},
        "meas": {"type": "array", "items": _record("b", "y", ontic="lambda")},
    },
    "additionalProperties": False,
}

MODEL_FILE_SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {"experiment": EXPERIMENT_SCHEMA, "ont_model": ONT_MODEL_SCHEMA},
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ModelFile:
    experiment: Experiment
    model: OntModel | None = None


def _cells(records, keys, where: str, mode: str) -> dict:
    out = {}
    for i, rec in enumerate(records):
        key = tuple(ontic_label(rec[k]) if k == "lambda" else rec[k] for k in keys)
        if key in out:
            raise SchemaError(f"{where}[{i}]: duplicate cell {dict(zip(keys, key))}")
        try:
            out[key] = parse_scalar(rec["p"], mode)
        except NumericsError as exc:
            raise SchemaError(f"{where}[{i}].p: {exc}") from exc
    return out


def _require_total(table: dict, keys, space, where: str) -> None:
    for cell in itertools.product(*space):
        if cell not in table:
            desc = ", ".join(f"{k}={v!r}" for k, v in zip(keys, cell))
            raise SchemaError(f"{where}: missing cell ({desc})")


def _directions(raw, mode):
    if raw is None:
        return None
    try:
        return {k: Direction(*(parse_scalar(c, mode) for c in v)) for k, v in raw.items()}
    except NumericsError as exc:
        raise SchemaError(f"direction map: {exc}") from exc


def experiment_from_dict(d: dict, mode: str = EXACT) -> Experiment:
    jsonschema_validate(d, EXPERIMENT_SCHEMA, "experiment")
    keys = ("a", "b", "x", "y")
    table = _cells(d["table"], keys, "experiment.table", mode)
    space = [d["omega_a"], d["omega_b"], d["omega_x"], d["omega_y"]]
    _require_total(table, keys, space, "experiment.table")
    try:
        return Experiment(
            d["name"], *space, table,
            _directions(d.get("directions_x"), mode), _directions(d.get("directions_y"), mode),
        )
    except OperationalError as exc:
        raise SchemaError(f"experiment: {exc}") from exc


def ont_model_from_dict(d: dict, experiment: Experiment, mode: str = EXACT) -> OntModel:
    jsonschema_validate(d, ONT_MODEL_SCHEMA, "ont_model")
    if d["experiment"] != experiment.name:
        raise SchemaError(
            f"ont_model.experiment refers to {d['experiment']!r}, file defines {experiment.name!r}"
        )
    lam = [ontic_label(v) for v in d["lambda"]]
    e = experiment
    prep_out = _cells(d["prep_out"], ("a", "x"), "ont_model.prep_out", mode)
    _require_total(prep_out, ("a", "x"), [e.omega_a, e.omega_x], "ont_model.prep_out")
    prep_ontic = _cells(d["prep_ontic"], ("lambda", "a", "x"), "ont_model.prep_ontic", mode)
    _require_total(prep_ontic, ("lambda", "a", "x"), [lam, e.omega_a, e.omega_x], "ont_model.prep_ontic")
    meas = _cells(d["meas"], ("b", "lambda", "y"), "ont_model.meas", mode)
    _require_total(meas, ("b", "lambda", "y"), [e.omega_b, lam, e.omega_y], "ont_model.meas")
    try:
        return OntModel(e, tuple(lam), prep_out, prep_ontic, meas)
    except OntologicalError as exc:
        raise SchemaError(f"ont_model: {exc}") from exc


def jsonschema_validate(d: Any, schema: dict, where: str) -> None:
    try:
        jsonschema.validate(d, schema)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where}{'.' + path if path else ''}: {exc.message}") from exc


def loads(text: str, mode: str = EXACT) -> ModelFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    jsonschema_validate(data, {"type": "object", "required": ["experiment"]}, "file")
    extra = set(data) - {"experiment", "ont_model"}
    if extra:
        raise SchemaError(f"file: unknown top-level key {sorted(extra)[0]!r}")
    e = experiment_from_dict(data["experiment"], mode)
    m = ont_model_from_dict(data["ont_model"], e, mode) if "ont_model" in data else None
    return ModelFile(e, m)


def load(path: str | Path, mode: str = EXACT) -> ModelFile:
    return loads(Path(path).read_text(), mode)


def _ontic_json(lam):
    return list(lam) if isinstance(lam, tuple) else lam


def experiment_to_dict(e: Experiment) -> dict:
    d: dict[str, Any] = {
        "name": e.name,
        "omega_a": list(e.omega_a),
        "omega_b": list(e.omega_b),
        "omega_x": list(e.omega_x),
        "omega_y": list(e.omega_y),
        "table": [
            {"a": a, "b": b, "x": x, "y": y, "p": format_scalar(e.table[(a, b, x, y)])}
            for a, b, x, y in e.cells()
        ],
    }
    for attr in ("directions_x", "directions_y"):
        dirs = getattr(e, attr)
        if dirs is not None:
            d[attr] = {k: [format_scalar(c) for c in v.components()] for k, v in dirs.items()}
    return d


def ont_model_to_dict(m: OntModel) -> dict:
    e = m.experiment
    return {
        "experiment": e.name,
        "lambda": [_ontic_json(lam) for lam in m.lambda_],
        "prep_out": [
            {"a": a, "x": x, "p": format_scalar(m.prep_out[(a, x)])}
            for a, x in itertools.product(e.omega_a, e.omega_x)
        ],
        "prep_ontic": [
            {"lambda": _ontic_json(lam), "a": a, "x": x, "p": format_scalar(m.prep_ontic[(lam, a, x)])}
            for lam, a, x in itertools.product(m.lambda_, e.omega_a, e.omega_x)
        ],
        "meas": [
            {"b": b, "lambda": _ontic_json(lam), "y": y, "p": format_scalar(m.meas[(b, lam, y)])}
            for b, lam, y in itertools.product(e.omega_b, m.lambda_, e.omega_y)
        ],
    }


def canonical_json(obj: Any, sort_keys: bool = True) -> str:
    return json.dumps(obj, sort_keys=sort_keys, indent=2, ensure_ascii=False) + "\n"


def dumps(e: Experiment, m: OntModel | None = None) -> str:
    data: dict[str, Any] = {"experiment": experiment_to_dict(e)}
    if m is not None:
        if m.experiment.name != e.name:
            raise ModelFileError("model refers to a different experiment")
        data["ont_model"] = ont_model_to_dict(m)
    return canonical_json(data)
