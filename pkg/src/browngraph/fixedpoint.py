"""Fixed-point points of the torus with integer mantissas.

A coordinate ``m`` with ``bits`` fractional bits stands for ``m / 2**bits``
in [0, 1). Integer matrix actions and reduction mod 1 are then exact integer
operations, so orbits of expanding maps carry no rounding error at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidArgument

MIN_BITS = 64
# a double carries 53 significant bits; below that the embedding has no data
FLOAT_BITS = 53


@dataclass(frozen=True)
class ExactPoint:
    coords: tuple[int, ...]
    bits: int

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise InvalidArgument(f"need at least {MIN_BITS} fractional bits")
        one = 1 << self.bits
        for m in self.coords:
            if not 0 <= m < one:
                raise InvalidArgument("coordinates must lie in [0, 1)")

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def mask(self) -> int:
        return (1 << self.bits) - 1

    @classmethod
    def from_fractions(cls, values: Sequence, bits: int) -> "ExactPoint":
        """Nearest-below fixed point of each value taken mod 1."""
        coords = []
        for v in values:
            f = Fraction(v) % 1
            coords.append((f.numerator << bits) // f.denominator)
        return cls(tuple(coords), bits)

    @classmethod
    def from_floats(cls, values: Sequence[float], bits: int, fill_seed: int | None = None) -> "ExactPoint":
        """Embed doubles exactly (mod 1) as dyadic fixed points.

        With ``fill_seed`` the bits below each double's own resolution are
        filled from a seeded stream, i.e. the point is drawn uniformly from
        the cell of reals that round to the given doubles. Without it the
        point is the dyadic rational itself.
        """
        rng = None if fill_seed is None else np.random.default_rng(fill_seed)
        coords = []
        for v in values:
            f = Fraction(float(v)) % 1
            num, den = f.numerator, f.denominator
            known = den.bit_length() - 1
            if known > bits:
                m = (num << bits) // den
                known = bits
            else:
                m = num << (bits - known)
            if rng is not None:
                # resolution of the original double, not of its fractional part
                ulp_bits = max(known, FLOAT_BITS - math.frexp(float(v))[1])
                free = bits - ulp_bits
                if free > 0:
                    m |= _random_bits(rng, free)
            coords.append(m)
        return cls(tuple(coords), bits)

    def to_floats(self) -> np.ndarray:
        shift = max(0, self.bits - 60)
        return np.array([(m >> shift) / 2.0 ** (self.bits - shift) for m in self.coords])

    def to_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(m, 1 << self.bits) for m in self.coords)


def _random_bits(rng: np.random.Generator, n: int) -> int:
    words = rng.integers(0, 2**32, size=(n + 31) // 32, dtype=np.uint64)
    out = 0
    for w in words:
        out = (out << 32) | int(w)
    return out >> (32 * len(words) - n)


def apply_mod1(A: Sequence[Sequence[int]], x: ExactPoint) -> ExactPoint:
    mask = x.mask
    coords = tuple(sum(a * m for a, m in zip(row, x.coords)) & mask for row in A)
    return ExactPoint(coords, x.bits)


def frac_dot(k: Sequence[int], x: ExactPoint) -> int:
    """Mantissa of ``k . x mod 1`` (same precision as ``x``)."""
    return sum(int(ki) * m for ki, m in zip(k, x.coords)) & x.mask
