"""Ito-calculus checks for the phase process ``X_t = b t + sigma W_t``.

With ``xi = u (cos theta, sin theta)`` the drift is ``b = -2 pi u cos theta``
and the diffusion coefficient ``sigma = -2 pi u sin theta``, so that
``mu_hat(xi) = int_0^1 exp(i X_t) dt``. Everything here works on the
piecewise-linear interpolant of a sampled path: the random time ``T`` is the
interpolant's first hitting time and time integrals are segment-exact.
Stochastic integrals always use left-endpoint (Ito) sums.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateCoefficient,
    InternalConsistencyError,
    InvalidArgument,
    PreconditionViolation,
    ZeroFrequency,
)
from .oscillatory import TWO_PI, AngleClass, Frequency, as_frequency, graph_transform
from .parallel import pmap
from .paths import WienerPath, generate_path, path_stats, refine_path


@dataclass(frozen=True)
class DriftDiffusion:
    b: float
    sigma: float

    @property
    def ito_coefficient(self) -> complex:
        """``b i - sigma^2 / 2``, the dt-coefficient of ``d exp(i X_t)``."""
        return complex(-0.5 * self.sigma**2, self.b)


@dataclass(frozen=True)
class PhaseProcess:
    x_samples: np.ndarray
    samples: np.ndarray


class Branch(enum.Enum):
    CEIL = "ceil"
    FLOOR = "floor"


@dataclass(frozen=True)
class RandomTimeResult:
    T: float
    target_level: float
    branch: Branch
    attained: float
    segment: int
    fraction: float


def drift_diffusion_params(xi) -> DriftDiffusion:
    xi = as_frequency(xi)
    return DriftDiffusion(b=-TWO_PI * xi.xi1, sigma=-TWO_PI * xi.xi2)


def phase_process(path: WienerPath, xi) -> PhaseProcess:
    xi = as_frequency(xi)
    x = -TWO_PI * (xi.xi1 * path.grid + xi.xi2 * path.values)
    return PhaseProcess(x_samples=x, samples=np.exp(1j * x))


def ito_integral(integrand: Sequence[complex], path: WienerPath, upper: int | None = None) -> complex:
    """Left-point sum ``sum_{j < upper} integrand[j] (W_{j+1} - W_j)``."""
    integrand = np.asarray(integrand)
    if integrand.shape != (path.n_steps + 1,):
        raise InvalidArgument(
            f"integrand needs {path.n_steps + 1} grid values, got {integrand.shape}"
        )
    upper = path.n_steps if upper is None else upper
    if not 0 <= upper <= path.n_steps:
        raise InvalidArgument("upper index outside the grid")
    dw = path.increments[:upper]
    return complex(np.sum(integrand[:upper] * dw))


def _require_nonzero(xi: Frequency):
    if xi.u == 0:
        raise ZeroFrequency("the random time is only defined for xi != 0")


def random_time(path: WienerPath, xi) -> RandomTimeResult:
    """First time the interpolated ``Y_t = xi1 t + xi2 W_t`` reaches its integer target.

    ``X_1 >= 0`` (equivalently ``Y_1 <= 0``) targets ``ceil(Y_1)``, otherwise
    ``floor(Y_1)``; either way ``X_T`` is a multiple of ``2 pi``.
    """
    xi = as_frequency(xi)
    _require_nonzero(xi)
    y = xi.xi1 * path.grid + xi.xi2 * path.values
    y1 = y[-1]
    if y1 <= 0:
        branch, target = Branch.CEIL, float(math.ceil(y1))
    else:
        branch, target = Branch.FLOOR, float(math.floor(y1))
    if target == 0.0:
        return RandomTimeResult(0.0, 0.0, branch, 0.0, 0, 0.0)
    j = _kernels.first_crossing(y, target)
    if j < 0:
        raise InternalConsistencyError(f"no crossing of level {target} found")
    dy = y[j + 1] - y[j]
    frac = 0.0 if dy == 0 else (target - y[j]) / dy
    frac = min(1.0, max(0.0, frac))
    T = (j + frac) / path.n_steps
    return RandomTimeResult(T, target, branch, float(y[j] + frac * dy), int(j), float(frac))


def _cut_at(path: WienerPath, rt: RandomTimeResult):
    t, w = path.grid, path.values
    j, frac = rt.segment, rt.fraction
    w_T = w[j] + frac * (w[j + 1] - w[j])
    head = (np.append(t[: j + 1], rt.T), np.append(w[: j + 1], w_T))
    tail = (np.concatenate([[rt.T], t[j + 1 :]]), np.concatenate([[w_T], w[j + 1 :]]))
    return head, tail, w_T


def _phase_integral(xi: Frequency, t: np.ndarray, w: np.ndarray) -> complex:
    a = np.array([-TWO_PI * xi.xi1])
    b = np.array([-TWO_PI * xi.xi2])
    out = np.empty(1, dtype=np.complex128)
    return complex(_kernels.linear_phase_integrals(a, b, t, w, out)[0])


def head_tail_split(path: WienerPath, xi, rt: RandomTimeResult | None = None) -> tuple[complex, complex]:
    """``(int_0^T Z dt, int_T^1 Z dt)`` with ``Z_t = exp(i X_t)``."""
    xi = as_frequency(xi)
    rt = random_time(path, xi) if rt is None else rt
    (th, wh), (tt, wt), _ = _cut_at(path, rt)
    return _phase_integral(xi, th, wh), _phase_integral(xi, tt, wt)


def _ito_terms(path: WienerPath, xi: Frequency):
    rt = random_time(path, xi)
    head, _ = head_tail_split(path, xi, rt)
    j, frac = rt.segment, rt.fraction
    z = np.exp(-1j * TWO_PI * (xi.xi1 * path.grid[: j + 1] + xi.xi2 * path.values[: j + 1]))
    dw = path.increments
    stoch = complex(np.sum(z[:j] * dw[:j]))
    if rt.T > 0:
        stoch += complex(z[j] * frac * dw[j])
    w_T = path.values[j] + frac * dw[j] if j < path.n_steps else path.values[j]
    f_T = complex(np.exp(-1j * TWO_PI * (xi.xi1 * rt.T + xi.xi2 * w_T)))
    return rt, head, stoch, f_T


def ito_residual(path: WienerPath, xi) -> complex:
    """Discretisation error of Ito's lemma for ``f(x) = exp(ix)`` up to ``T``."""
    xi = as_frequency(xi)
    _require_nonzero(xi)
    dd = drift_diffusion_params(xi)
    _, head, stoch, f_T = _ito_terms(path, xi)
    return f_T - 1.0 - dd.ito_coefficient * head - 1j * dd.sigma * stoch


def key_identity_residual(path: WienerPath, xi) -> float:
    """``|int_0^T f dt + sigma i / (b i - sigma^2/2) int_0^T f dW|``."""
    xi = as_frequency(xi)
    _require_nonzero(xi)
    dd = drift_diffusion_params(xi)
    coef = dd.ito_coefficient
    if coef == 0:
        raise DegenerateCoefficient("b i - sigma^2/2 vanishes")
    _, head, stoch, _ = _ito_terms(path, xi)
    return abs(head + 1j * dd.sigma / coef * stoch)


def _require_class(xi: Frequency, cls: AngleClass):
    if xi.u == 0:
        raise ZeroFrequency("angle class undefined at xi = 0")
    if xi.angle_class is not cls:
        raise PreconditionViolation(f"frequency {xi.cartesian_pair} is not {cls.value}")


def tail_bound_check(path: WienerPath, xi) -> dict:
    xi = as_frequency(xi)
    _require_class(xi, AngleClass.HORIZONTAL)
    rt = random_time(path, xi)
    lhs = 1.0 - rt.T
    rhs = 4.0 * path_stats(path).m_bound * xi.u**-0.5
    return {"lhs": lhs, "rhs": rhs, "pass": lhs <= rhs}


# --- moment reports -----------------------------------------------------------

def batch_standard_error(values: np.ndarray, n_batches: int = 20) -> float:
    """Standard error of the mean from contiguous batch means."""
    values = np.asarray(values, dtype=np.float64)
    k = min(n_batches, values.size)
    if k < 2:
        return 0.0
    means = np.array([b.mean() for b in np.array_split(values, k)])
    return float(means.std(ddof=1) / math.sqrt(k))


def horizontal_moment_bound(u: float, p: int) -> float:
    return 13.0 * math.sqrt(p) * 4.0**p * u ** (-p)


def moment_order(u: float) -> int:
    """Exponent choice ``floor(log u)`` used to turn moments into pointwise bounds."""
    return int(math.floor(math.log(u)))


@dataclass(frozen=True)
class MomentReport:
    p: int
    n_samples: int
    empirical: float
    paper_bound: float
    satisfied: bool
    std_error: float
    xi: tuple[float, float] = (0.0, 0.0)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n_samples": self.n_samples,
            "empirical": self.empirical,
            "paper_bound": self.paper_bound,
            "satisfied": self.satisfied,
            "std_error": self.std_error,
            "xi": list(self.xi),
        }


def horizontal_heads(ensemble: Iterable[WienerPath], xi) -> np.ndarray:
    xi = as_frequency(xi)
    _require_class(xi, AngleClass.HORIZONTAL)
    return np.array([head_tail_split(p, xi)[0] for p in ensemble])


def moment_report_from_heads(heads: np.ndarray, xi, p: int) -> MomentReport:
    xi = as_frequency(xi)
    if p < 1:
        raise InvalidArgument("p must be a positive integer")
    if len(heads) == 0:
        raise InvalidArgument("empty ensemble")
    vals = np.abs(heads) ** (2 * p)
    emp = float(vals.mean())
    bound = horizontal_moment_bound(xi.u, p)
    return MomentReport(p, len(vals), emp, bound, emp <= bound, batch_standard_error(vals), xi.cartesian_pair)


def horizontal_moment_report(ensemble: Iterable[WienerPath], xi, p: int) -> MomentReport:
    return moment_report_from_heads(horizontal_heads(ensemble, xi), xi, p)


@dataclass(frozen=True)
class VerticalReport:
    p: int
    n_samples: int
    empirical: float
    implied_C: float
    std_error: float
    xi: tuple[float, float]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n_samples": self.n_samples,
            "empirical": self.empirical,
            "implied_C": self.implied_C,
            "std_error": self.std_error,
            "xi": list(self.xi),
        }


def vertical_transforms(ensemble: Iterable[WienerPath], xi) -> np.ndarray:
    xi = as_frequency(xi)
    _require_class(xi, AngleClass.VERTICAL)
    return np.array([graph_transform(p, xi) for p in ensemble])


def vertical_report_from_values(values: np.ndarray, xi, p: int) -> VerticalReport:
    xi = as_frequency(xi)
    if len(values) == 0:
        raise InvalidArgument("empty ensemble")
    vals = np.abs(values) ** (2 * p)
    emp = float(vals.mean())
    implied = (emp * xi.u**p / p**p) ** (1.0 / p) if emp > 0 else 0.0
    return VerticalReport(p, len(vals), emp, implied, batch_standard_error(vals), xi.cartesian_pair)


def vertical_moment_report(ensemble: Iterable[WienerPath], xi, p: int) -> VerticalReport:
    return vertical_report_from_values(vertical_transforms(ensemble, xi), xi, p)


def markov_tail(report: MomentReport, lam: float) -> float:
    """Markov bound on ``P(|int_0^T Z dt| > lam)`` from the moment bound."""
    if lam <= 0:
        raise InvalidArgument("lambda must be positive")
    return min(1.0, report.paper_bound / lam ** (2 * report.p))


# --- Burkholder-Davis-Gundy -------------------------------------------------------

def bdg_constant(p: int) -> float:
    return 2.0 * math.sqrt(10.0 * p)


def bdg_path_terms(path: WienerPath, integrand: str, xi) -> tuple[float, float]:
    """``(sup_s |int_0^s g(X) dW|, int_0^1 g(X)^2 dt)`` for one path.

    The running supremum is taken over grid prefixes. The quadratic variation
    uses ``cos^2 = (1 + cos 2X) / 2`` so it is exact on the interpolant.
    """
    xi = as_frequency(xi)
    x = phase_process(path, xi).x_samples
    if integrand == "cos":
        g, sign = np.cos(x), 1.0
    elif integrand == "sin":
        g, sign = np.sin(x), -1.0
    else:
        raise InvalidArgument("integrand must be 'cos' or 'sin'")
    running = np.cumsum(g[:-1] * path.increments)
    sup = float(np.max(np.abs(running), initial=0.0))
    doubled = graph_transform(path, (2 * xi.xi1, 2 * xi.xi2)).real
    qv = 0.5 + sign * 0.5 * doubled
    return sup, qv


@dataclass(frozen=True)
class BDGReport:
    integrand: str
    p: int
    n_samples: int
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    passed_within_2se: bool
    std_error: float
    constant: float
    xi: tuple[float, float]

    def to_json(self) -> dict:
        return {
            "integrand": self.integrand,
            "p": self.p,
            "n_samples": self.n_samples,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "pass": self.passed,
            "pass_within_2se": self.passed_within_2se,
            "std_error": self.std_error,
            "constant": self.constant,
            "xi": list(self.xi),
        }


def bdg_report_from_terms(sups: np.ndarray, qvs: np.ndarray, integrand: str, xi, p: int) -> BDGReport:
    xi = as_frequency(xi)
    c = bdg_constant(p)
    left = np.asarray(sups) ** (2 * p)
    right = c * np.asarray(qvs) ** p
    lhs, rhs = float(left.mean()), float(right.mean())
    se = batch_standard_error(left - right)
    return BDGReport(
        integrand=integrand,
        p=p,
        n_samples=len(left),
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0 else math.inf,
        passed=lhs <= rhs,
        passed_within_2se=lhs - rhs <= 2 * se,
        std_error=se,
        constant=c,
        xi=xi.cartesian_pair,
    )


def bdg_check(ensemble: Iterable[WienerPath], integrand: str, xi, p: int) -> BDGReport:
    terms = [bdg_path_terms(path, integrand, xi) for path in ensemble]
    if not terms:
        raise InvalidArgument("empty ensemble")
    sups, qvs = map(np.array, zip(*terms))
    return bdg_report_from_terms(sups, qvs, integrand, xi, p)


# --- residual sweeps --------------------------------------------------------------

def convergence_order(n_steps: Sequence[int], rms: Sequence[float]) -> float:
    """Negative log-log slope of error against ``n_steps``."""
    slope = np.polyfit(np.log(np.asarray(n_steps, float)), np.log(np.asarray(rms, float)), 1)[0]
    return float(-slope)


def _sweep_task(args):
    seed, stream, levels, xi = args
    path = generate_path(levels[0], seed, stream)
    out = []
    while True:
        if path.n_steps in levels:
            out.append((abs(ito_residual(path, xi)), key_identity_residual(path, xi)))
        if path.n_steps >= levels[-1]:
            return out
        path = refine_path(path, seed)


def residual_sweep(
    n_paths: int, levels: Sequence[int], xi, seed: int, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """RMS of both residuals along nested grids made by bridge refinement.

    ``levels`` must be increasing powers-of-two multiples of ``levels[0]``.
    Returns ``(rms_ito, rms_key)``, one entry per level.
    """
    levels = tuple(int(n) for n in levels)
    if any(b % a or (b // a) & (b // a - 1) for a, b in zip(levels, levels[1:])):
        raise InvalidArgument("levels must be nested dyadic refinements")
    xi = as_frequency(xi).cartesian_pair
    res = np.array(pmap(_sweep_task, [(seed, s, levels, xi) for s in range(n_paths)], workers, 8))
    rms = np.sqrt(np.mean(res**2, axis=0))
    return rms[:, 0], rms[:, 1]
