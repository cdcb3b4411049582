"""JSON model descriptors.

Three shapes are accepted::

    {"type": "two_level", "omega": 1.0, "delta": 1.0}
    {"type": "continuum", "omegas": [1, 2], "couplings": [[3, 0], [0, 4]]}
    {"type": "generic", "matrix": [[[re, im], ...], ...], "initial_index": 0}

Complex numbers are ``[re, im]`` pairs; a bare real number is also accepted.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .models import AnyModel, ContinuumModel, GenericModel, TwoLevelModel


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where}: must be finite")
    return float(value)


def _complex(value, where: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ParseError(f"{where}: complex numbers are [re, im] pairs")
        return complex(_real(value[0], where + "[0]"), _real(value[1], where + "[1]"))
    return complex(_real(value, where))


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list")
    if not value:
        raise ParseError(f"{where}: must not be empty")
    return value


def parse_model(data) -> AnyModel:
    if not isinstance(data, dict):
        raise ParseError("model descriptor must be a JSON object")
    kind = data.get("type")
    try:
        if kind == "two_level":
            return TwoLevelModel(_real(data.get("omega"), "omega"), _real(data.get("delta"), "delta"))
        if kind == "continuum":
            omegas = [_real(w, f"omegas[{i}]") for i, w in enumerate(_list(data.get("omegas"), "omegas"))]
            couplings = [_complex(v, f"couplings[{i}]")
                         for i, v in enumerate(_list(data.get("couplings"), "couplings"))]
            return ContinuumModel(omegas, couplings)
        if kind == "generic":
            rows = _list(data.get("matrix"), "matrix")
            matrix = np.array([[_complex(x, f"matrix[{i}][{j}]") for j, x in enumerate(_list(row, f"matrix[{i}]"))]
                               for i, row in enumerate(rows)], dtype=complex)
            index = data.get("initial_index", 0)
            if isinstance(index, bool) or not isinstance(index, int):
                raise ParseError("initial_index: expected an integer")
            return GenericModel(matrix, index)
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise ParseError(f"invalid {kind} model: {exc}") from exc
    raise ParseError(f"unknown model type {kind!r}; expected two_level, continuum or generic")


def load_model(path) -> AnyModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_model(data)


def model_to_dict(model: AnyModel) -> dict:
    if isinstance(model, TwoLevelModel):
        return {"type": "two_level", "omega": model.omega, "delta": model.delta}
    if isinstance(model, ContinuumModel):
        return {"type": "continuum", "omegas": list(model.omegas),
                "couplings": [[v.real, v.imag] for v in model.couplings]}
    return {
        "type": "generic",
        "matrix": [[[x.real, x.imag] for x in row] for row in model.matrix.tolist()],
        "initial_index": model.initial_index,
    }
