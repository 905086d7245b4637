"""Result documents: schema-versioned JSON and fixed-header CSV, written
atomically.

JSON has no infinity literal, so infinite bounds are serialized as the strings
``"+inf"`` / ``"-inf"`` (and parsed back by :func:`from_jsonable`); every
other float round-trips through the shortest-repr encoder.  Documents carry no
timestamps or environment state, so a rerun with the same seed is
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Any

import numpy as np

SCHEMA_VERSION = "groundbound-result/1"

__all__ = [
    "SCHEMA_VERSION",
    "to_jsonable",
    "from_jsonable",
    "render_json",
    "render_csv",
    "write_text_atomic",
    "envelope",
]


def to_jsonable(value: Any) -> Any:
    """Recursively convert to plain JSON types; infinities become strings."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        f = float(value)
        if math.isinf(f):
            return "+inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def from_jsonable(value: Any) -> Any:
    """Inverse of :func:`to_jsonable` for the special float strings."""
    if isinstance(value, dict):
        return {k: from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [from_jsonable(v) for v in value]
    if value == "+inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    if value == "nan":
        return math.nan
    return value


def envelope(command: str, system: dict, config: dict, result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "system": to_jsonable(system),
        "config": to_jsonable(config),
        "result": to_jsonable(result),
    }


def render_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _fmt_cell(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isinf(f):
            return "+inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return repr(f)
    return v


def render_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC-4180-style quoting and line ends
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt_cell(v) for v in row])
    return buf.getvalue()


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".groundbound-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
