"""Deterministic report serialization.

JSON reports are UTF-8 with sorted keys and LF line endings; CSV tables use
``,`` and ``.`` with LF line endings and carry the resolved configuration as
``# key=value`` header lines. Wall-clock runtime is kept out of the report
body (it would break byte-identical reruns) and written to a sidecar
``<report>.runtime.json`` instead.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__


def build_id() -> str:
    """``<version>+<12 hex digits>`` hashing every module of the package."""
    h = hashlib.sha256()
    root = resources.files("degenlab")
    for path in sorted(Path(str(root)).rglob("*.py")):
        h.update(path.relative_to(str(root)).as_posix().encode())
        h.update(path.read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


def plain(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def envelope(command: str, config: dict, result, seed: int | None = None) -> dict:
    return {"build": build_id(), "command": command, "config": plain(config), "seed": seed, "result": plain(result)}


def to_json(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _cell(v) -> str:
    v = plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else str(v)


def to_csv(rows: list[dict], header: dict | None = None, columns: list[str] | None = None) -> str:
    """Rows as CSV with an optional ``# key=value`` preamble."""
    buf = io.StringIO()
    for k, v in sorted((header or {}).items()):
        buf.write(f"# {k}={_cell(v)}\n")
    if columns is None:
        columns = list(rows[0]) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_runtime(path: str | Path, seconds: float) -> None:
    write_text(f"{path}.runtime.json", to_json({"runtime_seconds": seconds}))
