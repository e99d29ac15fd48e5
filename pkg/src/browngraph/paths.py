"""Discrete Wiener paths on uniform grids of [0, 1].

Every path is a deterministic function of ``(n_steps, seed, stream_id)``.
Randomness comes from a Philox counter-based generator whose key is derived
with :class:`numpy.random.SeedSequence` using ``stream_id`` as the spawn key,
so ensemble members can be produced independently and in any order.
Standard normals are produced by inverse-CDF (``scipy.special.ndtri``) applied
to 53-bit uniforms on the open interval (0, 1).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .errors import InvalidArgument

_TWO53 = 2.0**-53

# spawn-key tags keep path and refinement streams disjoint
_TAG_PATH = 0
_TAG_REFINE = 1


def _generator(seed: int, *spawn_key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def standard_normals(gen: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-CDF standard normals from midpoint-shifted 53-bit uniforms."""
    raw = gen.integers(0, 2**53, size=size, dtype=np.uint64)
    return ndtri((raw.astype(np.float64) + 0.5) * _TWO53)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WienerPath:
    """Sampled Brownian path ``W(t_j)`` at ``t_j = j / n_steps``."""

    values: np.ndarray
    seed: int = 0
    stream_id: int = 0
    n_steps: int = field(init=False)

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 2:
            raise InvalidArgument("a path needs at least two grid values")
        if values[0] != 0.0:
            raise InvalidArgument("paths must start at W(0) = 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n_steps", values.size - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n_steps + 1, dtype=np.float64) / self.n_steps

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def at(self, t: float) -> float:
        """Linear interpolant of the path at time ``t``."""
        return float(np.interp(t, self.grid, self.values))

    def __eq__(self, other):
        if not isinstance(other, WienerPath):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.stream_id == other.stream_id
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class PathStats:
    sup_abs: float
    m_bound: float


def generate_path(n_steps: int, seed: int, stream_id: int = 0) -> WienerPath:
    if n_steps < 1:
        raise InvalidArgument("n_steps must be at least 1")
    gen = _generator(seed, stream_id, _TAG_PATH)
    z = standard_normals(gen, n_steps)
    values = np.empty(n_steps + 1)
    values[0] = 0.0
    np.cumsum(z * np.sqrt(1.0 / n_steps), out=values[1:])
    return WienerPath(values, seed=seed, stream_id=stream_id)


def refine_path(path: WienerPath, seed: int) -> WienerPath:
    """Double the resolution by Brownian-bridge midpoints.

    Each midpoint is the average of its neighbours plus a normal draw with
    variance ``dt / 4``, ``dt`` being the parent spacing.
    """
    n = path.n_steps
    # the parent resolution is part of the key so repeated refinement with one
    # seed never reuses draws
    gen = _generator(seed, path.stream_id, _TAG_REFINE, n)
    z = standard_normals(gen, n)
    v = path.values
    mids = 0.5 * (v[:-1] + v[1:]) + z * np.sqrt(0.25 / n)
    out = np.empty(2 * n + 1)
    out[0::2] = v
    out[1::2] = mids
    return WienerPath(out, seed=path.seed, stream_id=path.stream_id)


def path_stats(path: WienerPath) -> PathStats:
    sup_abs = float(np.max(np.abs(path.values)))
    return PathStats(sup_abs=sup_abs, m_bound=max(1.0, sup_abs))


def ensemble(n_paths: int, n_steps: int, seed: int, first_stream: int = 0):
    """Lazily yield ``n_paths`` independent paths with consecutive stream ids."""
    for s in range(first_stream, first_stream + n_paths):
        yield generate_path(n_steps, seed, s)


# --- dump formats ---------------------------------------------------------

def path_to_csv(path: WienerPath) -> str:
    buf = io.StringIO()
    buf.write(f"# n_steps={path.n_steps},seed={path.seed},stream_id={path.stream_id}\n")
    buf.write("t,W\n")
    for t, w in zip(path.grid, path.values):
        buf.write(f"{t:.17g},{w:.17g}\n")
    return buf.getvalue()


def path_from_csv(text: str) -> WienerPath:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise InvalidArgument("missing path header")
    header = dict(item.split("=") for item in lines[0][1:].strip().split(","))
    rows = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    n_steps = int(header["n_steps"])
    if rows.shape[0] != n_steps + 1:
        raise InvalidArgument("row count does not match n_steps")
    return WienerPath(rows[:, 1], seed=int(header["seed"]), stream_id=int(header["stream_id"]))


def write_path(path: WienerPath, dest: str | Path) -> Path:
    """Write a path as CSV, or as ``.npz`` when the suffix asks for it."""
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    if dest.suffix == ".npz":
        np.savez(
            dest,
            header=np.array([path.n_steps, path.seed, path.stream_id], dtype=np.uint64),
            values=path.values,
        )
    else:
        dest.write_text(path_to_csv(path))
    return dest


def read_path(src: str | Path) -> WienerPath:
    src = Path(src)
    if src.suffix == ".npz":
        with np.load(src) as data:
            n_steps, seed, stream_id = (int(x) for x in data["header"])
            path = WienerPath(data["values"], seed=seed, stream_id=stream_id)
        if path.n_steps != n_steps:
            raise InvalidArgument("corrupt path dump")
        return path
    return path_from_csv(src.read_text())
