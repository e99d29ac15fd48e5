"""Expanding toral endomorphisms, Weyl sums and discrepancy.

``T(x) = A x mod 1`` for an integer matrix ``A``. Orbits run on
:class:`~browngraph.fixedpoint.ExactPoint` mantissas, and Weyl sums can be
formed either from an orbit or directly from powers of the transpose, using
``k . T^n(x) = ((A^T)^n k) . x mod 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from .errors import InvalidArgument, PrecisionBudgetError
from .fixedpoint import MIN_BITS, ExactPoint, apply_mod1, frac_dot
from .parallel import pmap
from .paths import WienerPath

GUARD_BITS = 64
MAX_BOXES = 20_000_000

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ToralEndomorphism:
    A: Matrix
    sigma_min: float
    sigma_max: float

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def expanding(self) -> bool:
        return self.sigma_min > 1

    @property
    def adjoint(self) -> Matrix:
        return tuple(zip(*self.A))

    def text(self) -> str:
        return ";".join(",".join(str(a) for a in row) for row in self.A)


@dataclass(frozen=True)
class WeylReport:
    k: tuple[int, ...]
    N: int
    S_N: complex
    magnitude: float


@dataclass(frozen=True)
class DiscrepancyReport:
    level: int
    max_deviation: float


def parse_matrix(text: str) -> Matrix:
    """Row-major integer text such as ``"2,1;0,3"``."""
    try:
        rows = tuple(tuple(int(x) for x in row.split(",")) for row in text.strip().split(";"))
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse matrix {text!r}") from exc
    return rows


def _as_matrix(A) -> Matrix:
    if isinstance(A, str):
        A = parse_matrix(A)
    rows = tuple(tuple(int(a) for a in row) for row in A)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InvalidArgument("matrix must be square")
    for row, orig in zip(rows, A):
        if any(int(a) != a for a in orig):
            raise InvalidArgument("matrix entries must be integers")
    return rows


def determinant(A: Matrix) -> Fraction:
    m = [[Fraction(a) for a in row] for row in A]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for cc in range(c, n):
                m[r][cc] -= f * m[c][cc]
    return det


def gram(A: Matrix) -> Matrix:
    """``A^T A`` in exact integers."""
    n = len(A)
    return tuple(tuple(sum(A[r][i] * A[r][j] for r in range(n)) for j in range(n)) for i in range(n))


def make_endomorphism(A) -> ToralEndomorphism:
    A = _as_matrix(A)
    if determinant(A) == 0:
        raise InvalidArgument("matrix is singular")
    eig = np.linalg.eigvalsh(np.array(gram(A), dtype=np.float64))
    sv = np.sqrt(np.clip(eig, 0.0, None))
    return ToralEndomorphism(A, float(sv.min()), float(sv.max()))


def required_bits(T: ToralEndomorphism, N: int) -> int:
    return max(MIN_BITS, math.ceil(N * max(0.0, math.log2(T.sigma_max))) + GUARD_BITS)


def _check_budget(T: ToralEndomorphism, N: int, bits: int):
    need = required_bits(T, N)
    if bits < need:
        raise PrecisionBudgetError(need, bits)


def mat_vec(A: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def mat_pow(A: Matrix, n: int) -> Matrix:
    d = len(A)
    result = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
    base = A
    while n:
        if n & 1:
            result = _mat_mul(result, base)
        base = _mat_mul(base, base)
        n >>= 1
    return result


def _mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    cols = tuple(zip(*Y))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in X)


def orbit(T: ToralEndomorphism, x0: ExactPoint, N: int) -> list[ExactPoint]:
    """Iterates ``T(x0), ..., T^N(x0)`` in exact fixed point."""
    if x0.d != T.d:
        raise InvalidArgument("point and matrix dimensions differ")
    _check_budget(T, N, x0.bits)
    out = []
    x = x0
    for _ in range(N):
        x = apply_mod1(T.A, x)
        out.append(x)
    return out


def jump(T: ToralEndomorphism, x0: ExactPoint, n: int) -> ExactPoint:
    """``T^n(x0)`` in one step through the integer matrix power."""
    return apply_mod1(mat_pow(T.A, n), x0)


def rational_orbit(A, x0: Sequence, N: int) -> list[tuple[Fraction, ...]]:
    A = _as_matrix(A)
    x = tuple(Fraction(v) % 1 for v in x0)
    out = []
    for _ in range(N):
        x = tuple(v % 1 for v in mat_vec(A, x))
        out.append(x)
    return out


# --- Weyl sums ----------------------------------------------------------------

_R3 = math.sqrt(3.0) / 2
_TWELFTHS = [
    (1.0, 0.0), (_R3, 0.5), (0.5, _R3), (0.0, 1.0), (-0.5, _R3), (-_R3, 0.5),
    (-1.0, 0.0), (-_R3, -0.5), (-0.5, -_R3), (0.0, -1.0), (0.5, -_R3), (_R3, -0.5),
]


def _phasor(turn: Fraction) -> complex:
    turn = turn % 1
    twelve = turn * 12
    if twelve.denominator == 1:
        c, s = _TWELFTHS[int(twelve)]
        return complex(c, s)
    return cmath.exp(2j * math.pi * (turn.numerator / turn.denominator))


def _turns(points, k: Sequence[int]) -> np.ndarray | list[Fraction]:
    if len(points) and isinstance(points[0], ExactPoint):
        bits = points[0].bits
        den = 1 << bits
        return np.array([frac_dot(k, x) / den for x in points])
    first = points[0] if len(points) else None
    if isinstance(first, Fraction) or (isinstance(first, (tuple, list)) and isinstance(first[0], Fraction)):
        points = [p if isinstance(p, (tuple, list)) else (p,) for p in points]
        return [sum((ki * xi for ki, xi in zip(k, x)), Fraction(0)) % 1 for x in points]
    arr = np.asarray(points, dtype=np.float64)
    return np.mod(arr.reshape(len(arr), -1) @ np.asarray(k, dtype=np.float64), 1.0)


def phasors(points, k: Sequence[int]) -> np.ndarray:
    turns = _turns(points, k)
    if isinstance(turns, list):
        return np.array([_phasor(t) for t in turns])
    return np.exp(2j * np.pi * turns)


def _report(k, ph: np.ndarray) -> WeylReport:
    n = len(ph)
    s = complex(math.fsum(ph.real) / n, math.fsum(ph.imag) / n)
    return WeylReport(tuple(int(x) for x in k), n, s, abs(s))


def weyl_sum(points, k: Sequence[int]) -> WeylReport:
    """``S_N = (1/N) sum_n exp(2 pi i k . x_n)``."""
    if not any(k):
        raise InvalidArgument("k = 0 gives the trivial sum S_N = 1")
    if len(points) == 0:
        raise InvalidArgument("no points")
    return _report(k, phasors(points, k))


def adjoint_turns(T: ToralEndomorphism, k: Sequence[int], x0: ExactPoint, N: int) -> list[int]:
    """Mantissas of ``((A^T)^n k) . x0 mod 1`` for ``n = 1..N``."""
    _check_budget(T, N, x0.bits)
    adj = T.adjoint
    v = tuple(int(x) for x in k)
    out = []
    for _ in range(N):
        v = mat_vec(adj, v)
        out.append(frac_dot(v, x0))
    return out


def adjoint_weyl(T: ToralEndomorphism, k: Sequence[int], x0: ExactPoint, N: int) -> WeylReport:
    if not any(k):
        raise InvalidArgument("k = 0 gives the trivial sum S_N = 1")
    den = 1 << x0.bits
    turns = np.array([m / den for m in adjoint_turns(T, k, x0, N)])
    return _report(k, np.exp(2j * np.pi * turns))


def singular_growth_check(T: ToralEndomorphism, y: Sequence[int], n_max: int) -> list[dict]:
    """Check ``|(A^T)^n y| >= sigma_min^n |y|`` for ``n = 1..n_max``.

    The left side is an exact integer norm squared; ``sigma_min^2`` is the
    least eigenvalue of ``A^T A``, taken exactly when it is an integer and to
    high precision otherwise.
    """
    if not any(y):
        raise InvalidArgument("y must be nonzero")
    G = gram(T.A)
    y2 = sum(int(v) ** 2 for v in y)
    digits = 40 + int(n_max * math.log10(max(T.sigma_max**2, 2.0))) + len(str(y2))
    with mpmath.workdps(digits):
        lam = min(mpmath.eigsy(mpmath.matrix([list(r) for r in G]), eigvals_only=True))
        lam_int = int(mpmath.nint(lam))
        exact = _is_char_root(G, lam_int) and abs(lam - lam_int) < mpmath.mpf(10) ** (-digits // 2)
        results = []
        v = tuple(int(x) for x in y)
        adj = T.adjoint
        for n in range(1, n_max + 1):
            v = mat_vec(adj, v)
            lhs = sum(x * x for x in v)
            if exact:
                rhs = lam_int**n * y2
                ok = lhs >= rhs
            else:
                rhs = lam**n * y2
                ok = lhs >= rhs * (1 - mpmath.mpf(10) ** (-(digits - 20)))
            results.append({"n": n, "lhs_sq": lhs, "rhs_sq": float(rhs), "pass": bool(ok)})
    return results


def _is_char_root(G: Matrix, lam: int) -> bool:
    shifted = tuple(tuple(g - (lam if i == j else 0) for j, g in enumerate(row)) for i, row in enumerate(G))
    return determinant(shifted) == 0


# --- discrepancy -----------------------------------------------------------------

def _as_float_points(points) -> np.ndarray:
    if len(points) and isinstance(points[0], ExactPoint):
        return np.array([p.to_floats() for p in points])
    arr = np.asarray(points, dtype=np.float64)
    return arr.reshape(len(arr), -1)


def discrepancy(points, level: int) -> DiscrepancyReport:
    """Largest ``|fraction inside - volume|`` over boxes with corners on the ``2^-L`` grid."""
    if not 0 <= level <= 6:
        raise InvalidArgument("level must be between 0 and 6")
    pts = _as_float_points(points)
    n, d = pts.shape
    g = 1 << level
    lo, hi = np.triu_indices(g + 1, k=1)
    if lo.size**d > MAX_BOXES:
        raise InvalidArgument(f"{lo.size**d} boxes exceed the limit of {MAX_BOXES}")
    cells = np.clip(np.floor(pts * g).astype(np.int64), 0, g - 1)
    counts = np.zeros((g,) * d)
    np.add.at(counts, tuple(cells.T), 1.0)
    prefix = np.pad(counts, [(1, 0)] * d)
    for ax in range(d):
        prefix = np.cumsum(prefix, axis=ax)
    boxes = prefix
    for ax in range(d):
        boxes = np.take(boxes, hi, axis=ax) - np.take(boxes, lo, axis=ax)
    side = (hi - lo) / g
    vol = side
    for _ in range(d - 1):
        vol = np.multiply.outer(vol, side)
    dev = float(np.max(np.abs(boxes / n - vol)))
    return DiscrepancyReport(level, min(1.0, dev))


# --- Brownian starting points ---------------------------------------------------------

def _start_points(path: WienerPath, n_starts: int, seed: int, bits: int):
    rng = np.random.default_rng([seed, 0])
    idx = rng.integers(0, path.n_steps + 1, size=n_starts)
    starts = []
    for i, j in enumerate(idx):
        t = float(path.grid[j])
        w = float(path.values[j])
        x0 = ExactPoint.from_floats((t, w), bits, fill_seed=[seed, 1, i])
        starts.append((t, w, x0))
    return starts


def r_N_series(
    T: ToralEndomorphism,
    k: Sequence[int],
    path: WienerPath,
    Ns: Sequence[int],
    n_starts: int,
    seed: int,
    bits: int | None = None,
) -> dict[int, float]:
    """``r_N`` (mean of ``|S_N|^2`` over Brownian starts) for several ``N`` at once."""
    if not T.expanding:
        raise InvalidArgument(f"map is not expanding (sigma_min = {T.sigma_min:.6g})")
    if not any(k):
        raise InvalidArgument("k must be nonzero")
    n_max = max(Ns)
    bits = required_bits(T, n_max) if bits is None else bits
    _check_budget(T, n_max, bits)
    acc = {N: 0.0 for N in Ns}
    for _, _, x0 in _start_points(path, n_starts, seed, bits):
        den = 1 << bits
        turns = np.array([m / den for m in adjoint_turns(T, k, x0, n_max)])
        partial = np.cumsum(np.exp(2j * np.pi * turns))
        for N in Ns:
            acc[N] += abs(partial[N - 1] / N) ** 2
    return {N: acc[N] / n_starts for N in Ns}


def r_N_estimate(T, k, path, N, n_starts, seed=0, bits=None) -> float:
    return r_N_series(T, k, path, [N], n_starts, seed, bits)[N]


def nonzero_frequencies(d: int, k_range: int) -> list[tuple[int, ...]]:
    """One representative of each ``{k, -k}`` pair with ``0 < |k|_inf <= k_range``."""
    out = []
    for k in product(range(-k_range, k_range + 1), repeat=d):
        if any(k) and k > tuple(-x for x in k):
            out.append(k)
    return out


def _start_task(args):
    T, x0, N, ks, level = args
    pts = orbit(T, x0, N)
    return max(weyl_sum(pts, k).magnitude for k in ks), discrepancy(pts, level).max_deviation


def brownian_orbit_experiment(
    path: WienerPath,
    T: ToralEndomorphism,
    N: int,
    k_range: int,
    n_starts: int,
    seed: int = 0,
    bits: int | None = None,
    weyl_threshold: float = 0.1,
    discrepancy_threshold: float = 0.05,
    level: int = 3,
    workers: int = 1,
) -> dict:
    if T.d != 2:
        raise InvalidArgument("the Brownian graph lives in dimension 2")
    if not T.expanding:
        raise InvalidArgument(f"map is not expanding (sigma_min = {T.sigma_min:.6g})")
    bits = required_bits(T, N) if bits is None else bits
    _check_budget(T, N, bits)
    ks = nonzero_frequencies(2, k_range)
    starts = _start_points(path, n_starts, seed, bits)
    tasks = [(T, x0, N, ks, level) for _, _, x0 in starts]
    stats = pmap(_start_task, tasks, workers, chunksize=1)
    per_start = [
        {"t": t, "w": w, "max_weyl": mw, "discrepancy": disc} for (t, w, _), (mw, disc) in zip(starts, stats)
    ]
    weyl_ok = [s["max_weyl"] <= weyl_threshold for s in per_start]
    disc_ok = [s["discrepancy"] <= discrepancy_threshold for s in per_start]
    both = [a and b for a, b in zip(weyl_ok, disc_ok)]
    return {
        "A": [list(r) for r in T.A],
        "N": N,
        "k_range": k_range,
        "bits": bits,
        "per_start": per_start,
        "aggregate": {
            "pass_fraction": sum(both) / n_starts,
            "weyl_pass_fraction": sum(weyl_ok) / n_starts,
            "discrepancy_pass_fraction": sum(disc_ok) / n_starts,
        },
    }
