"""Deterministic CSV/JSON artifact writers.

CSV floats carry 17 significant digits (lossless for doubles); JSON objects
are sorted-key with a schema tag, and repeated runs produce byte-identical
files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

SCHEMA = "ergodix/1"


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, complex):
        return f"{format(value.real, '.17g')}{'+' if value.imag >= 0 else '-'}{format(abs(value.imag), '.17g')}j"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def jsonable(obj):
    """Recursively convert complex numbers and tuples for JSON output."""
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            return jsonable(obj.item())
        except Exception:
            return str(obj)
    return obj


def write_json(path: Path, obj: dict) -> None:
    payload = {"schema": SCHEMA}
    payload.update(jsonable(obj))
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")
