"""Deterministic CSV/JSON artifact writing with schema-stamped headers.

Reruns with identical configuration must produce byte-identical files, so
floats are rendered with shortest round-trip ``repr``, JSON keys are sorted,
no timestamps are embedded, and files are written atomically (temp file plus
rename in the same directory).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

SCHEMA_VERSION = 1


def schema_id(kind: str) -> str:
    return f"pluripot.{kind}.v{SCHEMA_VERSION}"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return repr(v)
    if v is None:
        return ""
    return repr(float(v))


def write_csv(path: Path, kind: str, header: list[str], rows) -> None:
    lines = [f"# schema={schema_id(kind)}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: Path, kind: str, payload: dict) -> None:
    doc = {"schema": schema_id(kind)}
    doc.update(_jsonable(payload))
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
