"""Deterministic JSON/CSV rendering: floats at 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping

import numpy as np

SIG_DIGITS = 12


def _round(x: float) -> float | str:
    if math.isnan(x) or math.isinf(x):
        return str(x)
    v = float(f"{x:.{SIG_DIGITS}g}")
    return 0.0 if v == 0 else v  # drop negative zero


def plain(obj: Any) -> Any:
    """Recursively convert numpy/complex values to JSON-ready Python objects."""
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    return obj


def to_json(obj: Any) -> str:
    return json.dumps(plain(obj), indent=2) + "\n"


def to_csv(rows: Iterable[Mapping[str, Any]]) -> str:
    rows = [plain(dict(r)) for r in rows]
    if not rows:
        return ""
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()
