"""JSON and CSV emission.  Extended reals are written as numbers or "+inf" / "-inf"."""
from __future__ import annotations

import csv
import enum
import json
import math

import numpy as np

from .extreal import ExtReal


def to_jsonable(obj):
    if isinstance(obj, ExtReal):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2)


def record(command: str, fn: str | None, point, order, settings, stabilized, **fields) -> dict:
    """A report record with the fields every command shares."""
    out = {
        "command": command,
        "fn": fn,
        "point": None if point is None else [float(c) for c in np.atleast_1d(point)],
        "order": order,
        "stabilized": stabilized,
        "seed": settings.shells.seed,
        "config_digest": settings.digest(),
    }
    out.update(fields)
    return to_jsonable(out)


def write_csv(path, rows: list) -> None:
    rows = [to_jsonable(r) for r in rows]
    keys = sorted({k for r in rows for k in r})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v
                        for k, v in r.items()})
