"""JSON (de)serialization of matrices, channels, ensembles and reports.

Matrices are row-major nested lists of ``[re, im]`` pairs. Documents carry
``"schema": 1``.
"""
from __future__ import annotations

import json

import numpy as np

from .channels import KrausChannel
from .ensembles import Ensemble
from .validation import ValidationError

SCHEMA_VERSION = 1


class SchemaError(ValidationError):
    """Input document does not match the expected schema."""


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _entry(x, where):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise SchemaError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def matrix_from_json(data, where="matrix") -> np.ndarray:
    """A list of rows; every entry is a real number or an ``[re, im]`` pair."""
    if not isinstance(data, list) or not data or not all(isinstance(r, list) and r for r in data):
        raise SchemaError(f"{where}: expected a non-empty list of non-empty rows")
    if len({len(r) for r in data}) != 1:
        raise SchemaError(f"{where}: ragged rows")
    return np.array([[_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(data)])


def vector_from_json(data, where="vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SchemaError(f"{where}: expected a non-empty list")
    return np.array([_entry(x, f"{where}[{i}]") for i, x in enumerate(data)])


def channel_from_dict(data: dict) -> KrausChannel:
    for key in ("dim_in", "dim_out", "kraus"):
        if key not in data:
            raise SchemaError(f"channel: missing key {key!r}")
    ops = [matrix_from_json(k, f"channel.kraus[{i}]") for i, k in enumerate(data["kraus"])]
    shape = (int(data["dim_out"]), int(data["dim_in"]))
    for i, op in enumerate(ops):
        if op.shape != shape:
            raise SchemaError(f"channel.kraus[{i}]: shape {op.shape} != (dim_out, dim_in) {shape}")
    return KrausChannel(np.array(ops))


def channel_to_dict(channel: KrausChannel) -> dict:
    return {"schema": SCHEMA_VERSION, **channel.to_dict()}


def ensemble_from_dict(data: dict) -> Ensemble:
    members = data.get("members")
    if not isinstance(members, list) or not members:
        raise SchemaError("ensemble: 'members' must be a non-empty list")
    weights, states = [], []
    for i, m in enumerate(members):
        if "weight" not in m or "state" not in m:
            raise SchemaError(f"ensemble.members[{i}]: needs 'weight' and 'state'")
        weights.append(float(m["weight"]))
        st = m["state"]
        if isinstance(st, dict) and "pure" in st:
            psi = vector_from_json(st["pure"], f"ensemble.members[{i}].state.pure")
            psi = psi / np.linalg.norm(psi)
            states.append(np.outer(psi, psi.conj()))
        else:
            states.append(matrix_from_json(st, f"ensemble.members[{i}].state"))
    return Ensemble(weights, np.array(states))


def ensemble_to_dict(ensemble: Ensemble) -> dict:
    return {"schema": SCHEMA_VERSION, **ensemble.to_dict()}


def _positions(text: str) -> dict:
    """Map every JSON path in ``text`` (``a.b[0].c``) to the offset where its value starts."""
    decoder = json.JSONDecoder()
    ws = " \t\n\r"
    pos = {}

    def skip(i):
        while i < len(text) and text[i] in ws:
            i += 1
        return i

    def value(i, path):
        i = skip(i)
        pos[path] = i
        if text[i] == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = json.decoder.scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # colon
                i = skip(value(i, f"{path}.{key}" if path else key))
                if text[i] == "}":
                    return i + 1
                i += 1
        if text[i] == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = skip(value(i, f"{path}[{k}]"))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        return decoder.raw_decode(text, i)[1]

    value(0, "")
    return pos


def locate(path: str, where: str) -> str:
    """``file:line:col`` of the JSON value at ``where``, or of its nearest located ancestor.

    ``where`` may carry a leading document label (``channel.kraus[0]``);
    it is dropped when the bare path matches better.
    """
    with open(path) as fh:
        text = fh.read()
    try:
        pos = _positions(text)
    except (ValueError, IndexError):
        return path
    candidates = [where]
    if "." in where:
        candidates.append(where.split(".", 1)[1])
    if "[" in where:
        candidates.append(where[where.index("[") :])
    best = None
    for cand in candidates:
        probe = cand
        while probe and probe not in pos:
            cut = max(probe.rfind("."), probe.rfind("["))
            probe = probe[:cut] if cut > 0 else ""
        if probe and (best is None or len(probe) > len(best)):
            best = probe
    offset = pos.get(best, 0)
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return f"{path}:{line}:{col}"


def load_json(path: str) -> dict:
    """Parse a JSON file, turning syntax errors into ``SchemaError`` with line numbers."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema version {data.get('schema')!r}")
    return data


def to_jsonable(obj):
    """Recursively convert numpy and library objects to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"
