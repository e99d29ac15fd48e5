"""Fourier transforms of the Brownian graph and image measures.

The graph measure is Lebesgue measure on [0, 1] lifted by ``t -> (t, W_t)``,
so ``mu_hat(xi) = int_0^1 exp(-2 pi i (xi1 t + xi2 W_t)) dt``. The image
measure is its projection, ``nu_hat(v) = mu_hat((0, v))``. Both are evaluated
exactly for the piecewise-linear interpolant of a sampled path.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import InsufficientData, InvalidArgument, ZeroFrequency
from .paths import WienerPath

TWO_PI = 2.0 * math.pi


class AngleClass(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    ZERO = "zero"


def theta_threshold(u: float) -> float:
    """Half-width ``min(u**-1/2, pi/4)`` of the horizontal bands at modulus ``u``."""
    if u <= 0:
        raise ZeroFrequency("threshold angle needs u > 0")
    return min(u**-0.5, math.pi / 4)


def _is_horizontal(u: float, theta: float) -> bool:
    th = theta_threshold(u)
    return theta <= th or abs(theta - math.pi) <= th or theta >= TWO_PI - th


@dataclass(frozen=True)
class Frequency:
    xi1: float
    xi2: float
    u: float
    theta: float
    angle_class: AngleClass = field(init=False)

    def __post_init__(self):
        if self.u == 0:
            cls = AngleClass.ZERO
        else:
            cls = AngleClass.HORIZONTAL if _is_horizontal(self.u, self.theta) else AngleClass.VERTICAL
        object.__setattr__(self, "angle_class", cls)

    @classmethod
    def cartesian(cls, xi1: float, xi2: float) -> "Frequency":
        xi1, xi2 = float(xi1), float(xi2)
        theta = math.atan2(xi2, xi1) % TWO_PI
        if theta >= TWO_PI:
            theta = 0.0
        return cls(xi1, xi2, math.hypot(xi1, xi2), theta)

    @classmethod
    def polar(cls, u: float, theta: float) -> "Frequency":
        if u < 0:
            raise InvalidArgument("modulus must be non-negative")
        theta = float(theta) % TWO_PI
        if theta >= TWO_PI:
            theta = 0.0
        return cls(u * math.cos(theta), u * math.sin(theta), float(u), theta)

    @property
    def cartesian_pair(self) -> tuple[float, float]:
        return (self.xi1, self.xi2)

    def __neg__(self) -> "Frequency":
        return Frequency.cartesian(-self.xi1, -self.xi2)


def as_frequency(xi) -> Frequency:
    if isinstance(xi, Frequency):
        return xi
    xi1, xi2 = xi
    return Frequency.cartesian(xi1, xi2)


@dataclass(frozen=True)
class SpectralSample:
    frequency: Frequency
    value: complex
    modulus: float

    def row(self) -> dict:
        f = self.frequency
        return {
            "xi1": f.xi1,
            "xi2": f.xi2,
            "u": f.u,
            "theta": f.theta,
            "angle_class": f.angle_class.value,
            "re": self.value.real,
            "im": self.value.imag,
            "modulus": self.modulus,
        }


SCAN_COLUMNS = ("xi1", "xi2", "u", "theta", "angle_class", "re", "im", "modulus")


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    sqrtlog_corrected: bool
    annuli: list
    residual_rms: float

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "sqrtlog_corrected": self.sqrtlog_corrected,
            "annuli": [[int(j), float(m)] for j, m in self.annuli],
            "residual_rms": self.residual_rms,
        }


# --- angle regimes --------------------------------------------------------

def classify_angle(xi) -> AngleClass:
    xi = as_frequency(xi)
    if xi.angle_class is AngleClass.ZERO:
        raise ZeroFrequency("the zero frequency has no angle class")
    return xi.angle_class


def trig_bounds_check(xi, rtol: float = 1e-12) -> dict:
    """Check the sine/cosine bounds that hold in each angle regime."""
    xi = as_frequency(xi)
    cls = classify_angle(xi)
    s = abs(math.sin(xi.theta))
    c = abs(math.cos(xi.theta))
    if cls is AngleClass.HORIZONTAL:
        sin_ok = s <= xi.u**-0.5 * (1 + rtol)
        cos_ok = c >= (1 / math.sqrt(2)) * (1 - rtol)
    else:
        sin_ok = s >= min(2 / math.pi * xi.u**-0.5, 1 / math.sqrt(2)) * (1 - rtol)
        cos_ok = True
    return {"sin_ok": sin_ok, "cos_ok": cos_ok, "angle_class": cls.value}


# --- transforms -----------------------------------------------------------

def graph_transforms(path: WienerPath, xis: np.ndarray) -> np.ndarray:
    """Vectorised ``mu_hat`` at the rows of an ``(m, 2)`` array of frequencies."""
    xis = np.atleast_2d(np.asarray(xis, dtype=np.float64))
    a = np.ascontiguousarray(-TWO_PI * xis[:, 0])
    b = np.ascontiguousarray(-TWO_PI * xis[:, 1])
    out = np.empty(xis.shape[0], dtype=np.complex128)
    return _kernels.linear_phase_integrals(a, b, path.grid, path.values, out)


def graph_transform(path: WienerPath, xi) -> complex:
    xi = as_frequency(xi)
    if xi.xi1 == 0 and xi.xi2 == 0:
        return 1.0 + 0.0j
    return complex(graph_transforms(path, [[xi.xi1, xi.xi2]])[0])


def image_transform(path: WienerPath, v: float) -> complex:
    """``nu_hat(v)``; shares the graph-transform code path at ``(0, v)``."""
    return graph_transform(path, (0.0, v))


def image_transforms(path: WienerPath, vs) -> np.ndarray:
    vs = np.asarray(vs, dtype=np.float64)
    return graph_transforms(path, np.column_stack([np.zeros_like(vs), vs]))


def lebesgue_transform(a: float) -> complex:
    """Closed form of ``int_0^1 exp(-2 pi i a t) dt``."""
    if a == 0:
        return 1.0 + 0.0j
    z = -2j * math.pi * a
    return (cmath.exp(z) - 1) / z


def _samples(path: WienerPath, freqs: Sequence[Frequency]) -> list[SpectralSample]:
    if not freqs:
        return []
    xis = np.array([[f.xi1, f.xi2] for f in freqs])
    vals = graph_transforms(path, xis)
    return [SpectralSample(f, complex(v), abs(complex(v))) for f, v in zip(freqs, vals)]


def lattice_points(eps: float, radius: float) -> list[Frequency]:
    """Nonzero points of ``eps * Z^2`` with modulus at most ``radius``, by modulus."""
    if eps <= 0:
        raise InvalidArgument("lattice spacing must be positive")
    m = int(math.floor(radius / eps))
    idx = np.arange(-m, m + 1)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    i, j = i.ravel(), j.ravel()
    r2 = (i * i + j * j).astype(np.float64)
    keep = (r2 > 0) & (r2 * eps * eps <= radius * radius)
    i, j, r2 = i[keep], j[keep], r2[keep]
    theta = np.mod(np.arctan2(j, i), TWO_PI)
    order = np.lexsort((theta, r2))
    return [Frequency.cartesian(eps * i[k], eps * j[k]) for k in order]


def scan_lattice(path: WienerPath, eps: float, radius: float) -> list[SpectralSample]:
    return _samples(path, lattice_points(eps, radius))


def _band_points(lo: float, hi: float, count: int) -> list[float]:
    width = hi - lo
    return [lo + (i + 0.5) * width / count for i in range(count)]


def polar_angles(u: float, base_angles: int, horizontal_oversample: int) -> list[float]:
    if base_angles < 4:
        raise InvalidArgument("need at least 4 base angles")
    angles = [TWO_PI * i / base_angles for i in range(base_angles)]
    if horizontal_oversample > 0:
        th = theta_threshold(u)
        for lo, hi in ((0.0, th), (math.pi - th, math.pi + th), (TWO_PI - th, TWO_PI)):
            angles += _band_points(lo, hi, horizontal_oversample)
    return angles


def polar_frequencies(moduli: Iterable[float], base_angles: int, horizontal_oversample: int) -> list[Frequency]:
    freqs = []
    for u in moduli:
        if u <= 0:
            raise InvalidArgument("moduli must be positive")
        freqs += [Frequency.polar(u, th) for th in polar_angles(u, base_angles, horizontal_oversample)]
    return freqs


def scan_polar(
    path: WienerPath, moduli: Iterable[float], base_angles: int, horizontal_oversample: int
) -> list[SpectralSample]:
    return _samples(path, polar_frequencies(moduli, base_angles, horizontal_oversample))


# --- decay fitting --------------------------------------------------------

def dyadic_level(u: float) -> int:
    """``j`` with ``2**j <= u < 2**(j+1)``, exact at powers of two."""
    if u <= 0:
        raise InvalidArgument("dyadic level needs u > 0")
    return math.frexp(u)[1] - 1


def annulus_max(samples: Sequence[SpectralSample]) -> list[tuple[int, float]]:
    if not samples:
        raise InvalidArgument("no samples to aggregate")
    best: dict[int, float] = {}
    for s in samples:
        j = dyadic_level(s.frequency.u)
        best[j] = max(best.get(j, 0.0), s.modulus)
    return sorted(best.items())


def fit_decay(annuli: Sequence[tuple[int, float]], sqrtlog_corrected: bool) -> DecayFit:
    annuli = sorted((int(j), float(m)) for j, m in annuli)
    if len(annuli) < 3:
        raise InsufficientData(f"need at least 3 annuli, got {len(annuli)}")
    levels = np.array([j for j, _ in annuli], dtype=np.float64)
    maxima = np.array([m for _, m in annuli])
    if np.any(maxima <= 0):
        raise InvalidArgument("annulus maxima must be positive to take logs")
    log_u = (levels + 0.5) * math.log(2.0)
    y = np.log(maxima)
    if sqrtlog_corrected:
        if np.any(log_u <= 0):
            raise InvalidArgument("sqrt-log correction needs annuli with j >= 0")
        y = y - 0.5 * np.log(log_u)
    slope, intercept = np.polyfit(log_u, y, 1)
    resid = y - (slope * log_u + intercept)
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        sqrtlog_corrected=sqrtlog_corrected,
        annuli=annuli,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


# --- exact second moment ----------------------------------------------------

def _one_minus_r_exp(c: complex) -> complex:
    # int_0^1 (1 - r) exp(c r) dr
    if abs(c) < 1e-6:
        return 0.5 + c / 6 + c * c / 24 + c**3 / 120
    return (cmath.exp(c) - 1 - c) / (c * c)


def second_moment_exact(xi) -> float:
    """``E |mu_hat(xi)|^2`` for Brownian motion, in closed form.

    The pair correlation of the graph measure only depends on ``r = |t - s|``,
    giving ``2 Re int_0^1 (1 - r) exp(-2 pi i xi1 r - 2 pi^2 xi2^2 r) dr``.
    """
    xi = as_frequency(xi)
    c = complex(-2 * math.pi**2 * xi.xi2**2, -TWO_PI * xi.xi1)
    val = 2.0 * _one_minus_r_exp(c).real
    return min(1.0, max(0.0, val))


# --- lattice versus off-grid --------------------------------------------------

@dataclass(frozen=True)
class OffgridReport:
    lattice_fit: DecayFit
    offgrid_fit: DecayFit | None
    slope_difference: float | None
    lattice_only: bool

    def to_json(self) -> dict:
        return {
            "lattice_fit": self.lattice_fit.to_json(),
            "offgrid_fit": None if self.offgrid_fit is None else self.offgrid_fit.to_json(),
            "slope_difference": self.slope_difference,
            "lattice_only": self.lattice_only,
        }


def random_frequencies(n: int, u_min: float, u_max: float, seed: int) -> list[Frequency]:
    """Log-uniform moduli in ``[u_min, u_max]`` with uniform angles."""
    rng = np.random.default_rng(seed)
    u = np.exp(rng.uniform(math.log(u_min), math.log(u_max), n))
    th = rng.uniform(0.0, TWO_PI, n)
    return [Frequency.polar(float(a), float(b)) for a, b in zip(u, th)]


def offgrid_consistency(
    path: WienerPath,
    eps: float,
    radius: float,
    n_random: int,
    seed: int,
    sqrtlog_corrected: bool = True,
) -> OffgridReport:
    lattice = scan_lattice(path, eps, radius)
    lfit = fit_decay(annulus_max(lattice), sqrtlog_corrected)
    if n_random <= 0:
        return OffgridReport(lfit, None, None, True)
    off = _samples(path, random_frequencies(n_random, eps, radius, seed))
    ofit = fit_decay(annulus_max(off), sqrtlog_corrected)
    return OffgridReport(lfit, ofit, ofit.slope - lfit.slope, False)


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def second_moment_interpolant(xi, n_steps: int, nodes: int = 96) -> float:
    """``E |mu_hat(xi)|^2`` when ``W`` is replaced by its linear interpolant on ``n_steps`` cells.

    For points ``a`` and ``b`` (fractions of their cells) in cells ``L >= 1``
    apart, the interpolant difference has variance ``dt (L - 1 + a^2 + (1-b)^2)``
    instead of ``dt (L - 1 + a + 1 - b)``; the cell integrals then factorise.
    This measures the discretisation bias of Monte Carlo estimates built on
    :func:`graph_transform`.
    """
    xi = as_frequency(xi)
    dt = 1.0 / n_steps
    alpha = TWO_PI * xi.xi1 * dt
    gamma = 2 * math.pi**2 * xi.xi2**2 * dt
    x, w = _gl(nodes)
    f = np.sum(w * np.exp(-1j * alpha * x - gamma * x * x))
    g = np.sum(w * np.exp(1j * alpha * x - gamma * (1 - x) ** 2))
    h = 2.0 * np.sum(w * (1 - x) * np.exp(-1j * alpha * x - gamma * x * x)).real
    lags = np.arange(1, n_steps, dtype=np.float64)
    geo = np.sum((n_steps - lags) * np.exp((-1j * alpha - gamma) * (lags - 1)))
    total = n_steps * dt * dt * h + 2.0 * (dt * dt * np.exp(-1j * alpha) * f * g * geo).real
    return float(total)
