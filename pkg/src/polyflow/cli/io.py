"""Canonical JSON and CSV helpers.

Canonical form: keys sorted, no insignificant whitespace, every float
printed with 17 significant digits, trailing newline.  Parsing and
re-serializing a canonical document reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..exceptions import InputError
from ..online.instance import SapInstance
from ..ranking.algorithm import OswmInstance


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise InputError(f"cannot serialize non-finite number {x!r}")
    return format(x, ".17g")


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (set, frozenset)):
        return _encode(sorted(obj))
    raise InputError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def read_json(path) -> object:
    try:
        return loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def instance_to_dict(inst) -> dict:
    return inst.to_dict()


def instance_from_dict(doc: dict):
    """SAP documents carry ``parts``; OSWM documents carry ``agents``."""
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    if "agents" in doc:
        return OswmInstance.from_dict(doc)
    if "parts" in doc:
        return SapInstance.from_dict(doc)
    raise InputError("instance needs either 'parts' (SAP) or 'agents' (OSWM)")


def read_instance(path):
    return instance_from_dict(read_json(path))


def csv_text(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (_float(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    Path(path).write_text(csv_text(rows, columns))
