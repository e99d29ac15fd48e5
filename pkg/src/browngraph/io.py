"""Plain-text outputs: CSV with full double precision, and JSON."""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, enum.Enum):
        return str(v.value)
    return str(v)


def write_csv(dest: str | Path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    with dest.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return dest


def read_csv(src: str | Path) -> list[dict]:
    with Path(src).open(newline="") as fh:
        return list(csv.DictReader(fh))


def to_plain(obj):
    """Recursively convert numpy scalars, enums and complex numbers for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    # json writes floats with repr, which round-trips all 17 digits
    return json.dumps(to_plain(obj), indent=2, sort_keys=True)


def write_json(dest: str | Path, obj) -> Path:
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(dumps(obj) + "\n")
    return dest
