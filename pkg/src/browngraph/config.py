"""Run configuration: defaults, ``key = value`` files and command-line overrides.

Config file format, one entry per line::

    # comment
    n_steps = 4096
    moduli = 16, 32, 64
    matrix = 2,1;0,3

Lists are comma separated. Unknown keys are rejected. Values given on the
command line replace values from the file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgument
from .parallel import default_workers


@dataclass
class RunConfig:
    seed: int = 0
    out: str = "out"
    workers: int = field(default_factory=default_workers)
    # paths
    n_paths: int = 1
    n_steps: int = 4096
    # scan
    mode: str = "polar"
    eps: float = 1.0
    radius: float = 64.0
    moduli: list[float] = field(default_factory=lambda: [2.0**k for k in range(4, 11)])
    base_angles: int = 32
    oversample: int = 8
    n_random: int = 0
    # ito
    xi: list[float] = field(default_factory=lambda: [16.0, 16.0])
    sweep_steps: list[int] = field(default_factory=lambda: [2**10, 2**12, 2**14])
    moment_u: float = 100.0
    moment_theta: float = 0.0
    p_list: list[int] = field(default_factory=lambda: [1, 2])
    # equi
    matrix: str = "2,1;0,3"
    N: int = 256
    k_range: int = 3
    n_starts: int = 20
    bits: int = 0
    cross_check: bool = False
    third_doubling: bool = False
    # accept
    quick: bool = False
    only: list[int] = field(default_factory=list)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw):
    if name not in _FIELDS:
        raise InvalidArgument(f"unknown config key {name!r}")
    kind = _FIELDS[name].type
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "list[float]":
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == "list[int]":
            return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise InvalidArgument(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v)
    return RunConfig(**values)


def as_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
