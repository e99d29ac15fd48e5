"""Quantitative acceptance checks at desk scale.

Each ``criterion_*`` function runs one check with pinned seeds and returns a
:class:`CriterionResult`. ``quick=True`` shrinks ensembles so the whole suite
finishes in about a minute; quick results are marked advisory.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import equi, ito
from . import oscillatory as osc
from .fixedpoint import ExactPoint, frac_dot
from .parallel import pmap
from .paths import generate_path

PI = math.pi


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)
    advisory: bool = False
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        note = " (advisory)" if self.advisory else ""
        return f"[{tag}] criterion {self.id}: {self.name}: {self.summary}{note}"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "summary": self.summary,
            "advisory": self.advisory,
            "seconds": self.seconds,
            "detail": self.detail,
        }


# --- 1 and 2: decay exponents ---------------------------------------------------

DECAY_SEED = 1
DECAY_LEVELS = range(4, 14)


def _decay_task(args):
    seed, stream, n_steps = args
    path = generate_path(n_steps, seed, stream)
    moduli = [2.0**j for j in DECAY_LEVELS]
    graph = osc.annulus_max(osc.scan_polar(path, moduli, 32, 8))
    image = list(zip(DECAY_LEVELS, np.abs(osc.image_transforms(path, moduli))))
    return {
        "graph_corrected": osc.fit_decay(graph, True).slope,
        "graph_raw": osc.fit_decay(graph, False).slope,
        "image_corrected": osc.fit_decay(image, True).slope,
        "image_raw": osc.fit_decay(image, False).slope,
    }


def decay_slopes(n_paths: int, n_steps: int, workers: int = 1) -> list[dict]:
    return pmap(_decay_task, [(DECAY_SEED, s, n_steps) for s in range(n_paths)], workers, chunksize=1)


def criterion_1(quick=False, workers=1, slopes=None):
    slopes = slopes or decay_slopes(*((4, 2**15) if quick else (64, 2**17)), workers)
    vals = np.array([s["graph_corrected"] for s in slopes])
    mean = float(vals.mean())
    ok = -0.65 <= mean <= -0.40
    return CriterionResult(
        1,
        "graph decay exponent",
        ok,
        f"mean corrected slope {mean:.4f} over {len(vals)} paths, target [-0.65, -0.40]",
        {
            "mean_slope": mean,
            "per_path": vals.tolist(),
            "mean_uncorrected": float(np.mean([s["graph_raw"] for s in slopes])),
        },
    )


def criterion_2(quick=False, workers=1, slopes=None):
    slopes = slopes or decay_slopes(*((4, 2**15) if quick else (64, 2**17)), workers)
    vals = np.array([s["image_corrected"] for s in slopes])
    inside = (vals >= -1.2) & (vals <= -0.8)
    return CriterionResult(
        2,
        "image decay exponent",
        bool(inside.all()),
        f"{int(inside.sum())}/{len(vals)} per-path corrected slopes in [-1.2, -0.8], "
        f"mean {vals.mean():.4f}, range [{vals.min():.3f}, {vals.max():.3f}]",
        {"per_path": vals.tolist(), "mean_slope": float(vals.mean())},
    )


# --- 3: horizontal moment bound -------------------------------------------------

MOMENT_SEED = 3


def moment_frequencies() -> list[osc.Frequency]:
    out = []
    for u in (64.0, 256.0, 1024.0):
        for th in (0.0, osc.theta_threshold(u) / 2):
            out.append(osc.Frequency.polar(u, th))
    return out


def _moment_task(args):
    seed, stream, n_steps = args
    path = generate_path(n_steps, seed, stream)
    return [ito.head_tail_split(path, xi)[0] for xi in moment_frequencies()]


def criterion_3(quick=False, workers=1):
    n_paths = 200 if quick else 2000
    heads = np.array(pmap(_moment_task, [(MOMENT_SEED, s, 2**14) for s in range(n_paths)], workers, 64))
    rows, ok = [], True
    for i, xi in enumerate(moment_frequencies()):
        for p in (1, 2, 3):
            r = ito.moment_report_from_heads(heads[:, i], xi, p)
            ok &= r.satisfied
            rows.append(r.to_json() | {"u": xi.u, "theta": xi.theta})
    worst = max(rows, key=lambda r: r["empirical"] / r["paper_bound"])
    return CriterionResult(
        3,
        "horizontal moment bound",
        ok,
        f"{sum(r['satisfied'] for r in rows)}/{len(rows)} satisfied; largest empirical/bound "
        f"{worst['empirical'] / worst['paper_bound']:.3g}",
        {"reports": rows},
    )


# --- 4: second-moment oracle --------------------------------------------------------

ORACLE_SEED = 4


def oracle_plan(quick=False) -> list[tuple[int, list[osc.Frequency]]]:
    """Frequency groups with the grid size used for each.

    Grids are chosen so the interpolant bias (see
    :func:`~browngraph.oscillatory.second_moment_interpolant`) stays below
    half a Monte Carlo standard error.
    """
    t64, t1024 = osc.theta_threshold(64), osc.theta_threshold(1024)
    P = osc.Frequency.polar
    return [
        (2**14, [P(4, 0.25), P(4, PI + 0.4), P(4, PI / 2), P(4, 2.0)]),
        (
            2**17,
            [
                P(64, t64 / 2), P(64, PI - 0.1), P(64, 0.14), P(64, PI - 0.15),
                P(1024, t1024 / 4), P(1024, PI + t1024 / 8), P(1024, 2 * PI - 3 * t1024 / 8),
            ],
        ),
        (2**18 if quick else 2**20, [P(1024, 1.05 * t1024)]),
    ]


def _oracle_task(args):
    seed, stream, n_steps, xis = args
    path = generate_path(n_steps, seed, stream)
    return np.abs(osc.graph_transforms(path, np.array(xis))) ** 2


def criterion_4(quick=False, workers=1):
    n_paths = 500 if quick else 5000
    rows, ok = [], True
    for g, (n_steps, freqs) in enumerate(oracle_plan(quick)):
        xis = [f.cartesian_pair for f in freqs]
        tasks = [(ORACLE_SEED + 100 * g, s, n_steps, xis) for s in range(n_paths)]
        sq = np.array(pmap(_oracle_task, tasks, workers, 16))
        for i, f in enumerate(freqs):
            mean = float(sq[:, i].mean())
            se = float(sq[:, i].std(ddof=1) / math.sqrt(n_paths))
            exact = osc.second_moment_exact(f)
            z = (mean - exact) / se
            ok &= abs(z) <= 3
            rows.append(
                {
                    "u": f.u, "theta": f.theta, "angle_class": f.angle_class.value, "n_steps": n_steps,
                    "monte_carlo": mean, "std_error": se, "exact": exact, "z": z,
                    "interpolant_bias": osc.second_moment_interpolant(f, n_steps) / exact - 1,
                }
            )
    zs = [abs(r["z"]) for r in rows]
    return CriterionResult(
        4,
        "second-moment oracle",
        ok,
        f"{sum(z <= 3 for z in zs)}/{len(rows)} within 3 SE, max |z| = {max(zs):.2f}",
        {"rows": rows},
    )


# --- 5: Ito identity convergence ----------------------------------------------------

ITO_SEED = 5
ITO_LEVELS = (2**10, 2**12, 2**14, 2**16)


def criterion_5(quick=False, workers=1):
    rms_ito, rms_key = ito.residual_sweep(40 if quick else 200, ITO_LEVELS, (16.0, 16.0), ITO_SEED, workers)
    o1 = ito.convergence_order(ITO_LEVELS, rms_ito)
    o2 = ito.convergence_order(ITO_LEVELS, rms_key)
    return CriterionResult(
        5,
        "Ito identity convergence",
        o1 >= 0.35 and o2 >= 0.35,
        f"order {o1:.3f} (Ito residual), {o2:.3f} (key identity), floor 0.35",
        {
            "n_steps": list(ITO_LEVELS),
            "rms_ito": rms_ito.tolist(),
            "rms_key": rms_key.tolist(),
            "order_ito": o1,
            "order_key": o2,
            "first_ratio_ito": float(rms_ito[0] / rms_ito[1]),
        },
    )


# --- 6: BDG -----------------------------------------------------------------------------

BDG_SEED = 6
BDG_FREQS = ((16.0, 0.0), (0.0, 16.0), (16.0, 16.0))


def _bdg_task(args):
    seed, stream, n_steps = args
    path = generate_path(n_steps, seed, stream)
    return [ito.bdg_path_terms(path, g, xi) for xi in BDG_FREQS for g in ("cos", "sin")]


def criterion_6(quick=False, workers=1, p_values=(1, 2, 4)):
    n_paths = 500 if quick else 5000
    terms = np.array(pmap(_bdg_task, [(BDG_SEED, s, 2**12) for s in range(n_paths)], workers, 64))
    rows, failures = [], []
    k = 0
    for xi in BDG_FREQS:
        for g in ("cos", "sin"):
            for p in p_values:
                r = ito.bdg_report_from_terms(terms[:, k, 0], terms[:, k, 1], g, xi, p)
                rows.append(r.to_json())
                if not r.passed_within_2se:
                    failures.append(f"{g} xi={xi} p={p} ratio={r.ratio:.2f}")
            k += 1
    return CriterionResult(
        6,
        "BDG inequality",
        not failures,
        f"{len(rows) - len(failures)}/{len(rows)} pass within 2 SE"
        + (f"; failing: {', '.join(failures)}" if failures else ""),
        {"reports": rows},
    )


# --- 7: pathwise tail bound ------------------------------------------------------------

TAIL_SEED = 7


def tail_frequencies(n: int = 20, seed: int = TAIL_SEED) -> list[osc.Frequency]:
    """Horizontal frequencies with log-uniform ``u`` in [16, 4096]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        u = float(np.exp(rng.uniform(math.log(16), math.log(4096))))
        th = osc.theta_threshold(u)
        centre = (0.0, PI, 2 * PI)[rng.integers(3)]
        theta = float(np.mod(centre + rng.uniform(-th, th), 2 * PI))
        out.append(osc.Frequency.polar(u, theta))
    return out


def _tail_task(args):
    seed, stream, n_steps = args
    path = generate_path(n_steps, seed, stream)
    return [ito.tail_bound_check(path, xi) for xi in tail_frequencies()]


def criterion_7(quick=False, workers=1):
    n_paths = 100 if quick else 1000
    checks = [c for row in pmap(_tail_task, [(TAIL_SEED, s, 2**14) for s in range(n_paths)], workers, 64) for c in row]
    bad = sum(not c["pass"] for c in checks)
    margin = min(c["rhs"] - c["lhs"] for c in checks)
    return CriterionResult(
        7,
        "pathwise tail bound",
        bad == 0,
        f"{bad} violations in {len(checks)} checks, smallest margin {margin:.4f}",
        {"violations": bad, "checks": len(checks), "min_margin": margin},
    )


# --- 8: equidistribution of Brownian starting points ------------------------------------

EQUI_SEED = 8
EQUI_MATRIX = "2,1;0,3"


def equi_bits(T: equi.ToralEndomorphism, N: int) -> int:
    return max(equi.required_bits(T, N), math.ceil(N * math.log2(3.42)) + 64)


def criterion_8(quick=False, workers=1):
    T = equi.make_endomorphism(EQUI_MATRIX)
    N = 2048
    path = generate_path(2**16, EQUI_SEED, 0)
    rep = equi.brownian_orbit_experiment(path, T, N, 3, 20, seed=EQUI_SEED, bits=equi_bits(T, N))
    ps = rep["per_start"]
    nw = sum(s["max_weyl"] <= 0.1 for s in ps)
    nd = sum(s["discrepancy"] <= 0.05 for s in ps)
    return CriterionResult(
        8,
        "equidistribution",
        nw >= 18 and nd >= 18,
        f"max |S_N| <= 0.1 on {nw}/20 starts, discrepancy <= 0.05 on {nd}/20 starts "
        f"(worst {max(s['max_weyl'] for s in ps):.4f}, {max(s['discrepancy'] for s in ps):.4f})",
        rep,
    )


# --- 9: exact-arithmetic identities -------------------------------------------------------

def _random_case(rng: np.random.Generator):
    d = int(rng.integers(1, 4))
    while True:
        A = rng.integers(-3, 4, size=(d, d))
        if round(np.linalg.det(A)) != 0:
            break
    T = equi.make_endomorphism(A.tolist())
    k = rng.integers(-3, 4, size=d)
    if not k.any():
        k[0] = 1
    N = int(rng.integers(1, 65))
    bits = equi.required_bits(T, N)
    x0 = ExactPoint.from_floats(rng.random(d), bits, fill_seed=int(rng.integers(2**32)))
    return T, tuple(int(v) for v in k), x0, N


def identity_case_errors(n_cases: int = 50, seed: int = 9) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_cases):
        T, k, x0, N = _random_case(rng)
        adj = equi.adjoint_turns(T, k, x0, N)
        direct = [frac_dot(k, x) for x in equi.orbit(T, x0, N)]
        den = 1 << x0.bits
        ph_a = np.exp(2j * np.pi * np.array([m / den for m in adj]))
        ph_d = np.exp(2j * np.pi * np.array([m / den for m in direct]))
        out.append(
            {
                "A": T.text(), "k": k, "N": N,
                "bit_identical": adj == direct,
                "max_phase_error": float(np.max(np.abs(ph_a - ph_d))),
            }
        )
    return out


def criterion_9(quick=False, workers=1):
    cases = identity_case_errors()
    worst = max(c["max_phase_error"] for c in cases)
    ident = all(c["max_phase_error"] <= 1e-9 for c in cases)
    thirds = {}
    for N in (2, 4, 10, 64, 1000):
        s = equi.weyl_sum(equi.rational_orbit([[2]], [Fraction(1, 3)], N), (1,)).S_N
        thirds[N] = s
    exact = all(s == complex(-0.5, 0.0) for s in thirds.values())
    return CriterionResult(
        9,
        "exact-arithmetic identities",
        ident and exact,
        f"50 adjoint/orbit cases, max per-term phase error {worst:.1e}; "
        f"thirds doubling S_N = -1/2 exactly: {exact}",
        {"cases": cases, "thirds": {str(k): v for k, v in thirds.items()}},
    )


# --- 10: invariant suite ---------------------------------------------------------------------

def invariant_checks(seed: int = 10) -> dict[str, bool]:
    rng = np.random.default_rng(seed)
    checks = {}
    paths = [generate_path(2**10, seed, s) for s in range(8)]
    xis = rng.uniform(-300, 300, size=(40, 2))
    vals = np.array([osc.graph_transforms(p, xis) for p in paths])
    neg = np.array([osc.graph_transforms(p, -xis) for p in paths])
    checks["paths start at zero"] = all(p.values[0] == 0.0 for p in paths)
    checks["transform modulus at most one"] = bool(np.all(np.abs(vals) <= 1 + 1e-12))
    checks["conjugate symmetry"] = bool(np.max(np.abs(neg - vals.conj())) <= 1e-12)
    a_vals = rng.uniform(-50, 50, 20)
    leb = np.array([osc.lebesgue_transform(a) for a in a_vals])
    drift = osc.graph_transforms(paths[0], np.column_stack([a_vals, np.zeros(20)]))
    checks["drift-only reduces to Lebesgue"] = bool(np.max(np.abs(drift - leb)) <= 1e-12)
    vs = rng.uniform(-100, 100, 20)
    img = osc.image_transforms(paths[1], vs)
    vert = osc.graph_transforms(paths[1], np.column_stack([np.zeros(20), vs]))
    checks["vertical axis equals image transform"] = bool(np.array_equal(img, vert))
    u = np.exp(rng.uniform(-3, 12, 20000))
    th = rng.uniform(0, 2 * PI, 20000)
    freqs = [osc.Frequency.polar(a, b) for a, b in zip(u, th)]
    checks["angle classes partition"] = all(f.angle_class in (osc.AngleClass.HORIZONTAL, osc.AngleClass.VERTICAL) for f in freqs)
    checks["trig bounds"] = all(
        r["sin_ok"] and r["cos_ok"] for r in (osc.trig_bounds_check(f) for f in freqs)
    )
    checks["second moment in [0, 1]"] = all(0 <= osc.second_moment_exact(f) <= 1 for f in freqs[:2000])
    split_err, time_ok = 0.0, True
    for p in paths:
        for xi in xis[:10]:
            h = osc.graph_transform(p, xi)
            head, tail = ito.head_tail_split(p, xi)
            split_err = max(split_err, abs(head + tail - h))
            rt = ito.random_time(p, xi)
            y = xi[0] * p.grid + xi[1] * p.values
            lo = np.minimum(y[:-1], y[1:])[: rt.segment]
            hi = np.maximum(y[:-1], y[1:])[: rt.segment]
            earlier = np.any((lo <= rt.target_level) & (rt.target_level <= hi)) if rt.T > 0 else False
            time_ok &= abs(rt.attained - rt.target_level) <= 1e-9 and not earlier
            time_ok &= abs(head) <= rt.T + 1e-12
    checks["head plus tail equals transform"] = split_err <= 1e-10
    checks["random time minimal and attained"] = bool(time_ok)
    f = rng.normal(size=(2, 2**10 + 1)) + 1j * rng.normal(size=(2, 2**10 + 1))
    a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
    lhs = ito.ito_integral(a * f[0] + b * f[1], paths[2])
    rhs = a * ito.ito_integral(f[0], paths[2]) + b * ito.ito_integral(f[1], paths[2])
    checks["Ito sum linear"] = abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    growth = True
    for text in ("2,1;0,3", "2,0;0,2", "3,1;1,2", "1,1;0,1"):
        T = equi.make_endomorphism(text)
        for y in ((1, 0), (0, 1), (3, -2)):
            growth &= all(r["pass"] for r in equi.singular_growth_check(T, y, 40))
    checks["singular growth"] = growth
    T = equi.make_endomorphism("2,1;0,3")
    x0 = ExactPoint.from_floats((0.3, 0.6), equi.required_bits(T, 100), fill_seed=1)
    orb = equi.orbit(T, x0, 100)
    checks["orbit equals one-step power"] = orb[-1] == equi.jump(T, x0, 100)
    s1, s2 = equi.weyl_sum(orb, (1, 2)).S_N, equi.weyl_sum(orb, (-1, -2)).S_N
    checks["Weyl sums of k and -k conjugate"] = abs(s1 - s2.conjugate()) <= 1e-12 and abs(s1) <= 1
    return checks


def criterion_10(quick=False, workers=1):
    checks = invariant_checks()
    bad = [k for k, v in checks.items() if not v]
    return CriterionResult(
        10,
        "invariant suite",
        not bad,
        f"{len(checks) - len(bad)}/{len(checks)} invariants hold" + (f"; failing: {bad}" if bad else ""),
        {"checks": checks},
    )


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run(ids=None, quick=False, workers=1, report: Callable[[CriterionResult], None] | None = None):
    ids = sorted(ids or CRITERIA)
    slopes = None
    results = []
    for i in ids:
        start = time.perf_counter()
        kwargs = {}
        if i in (1, 2):
            if slopes is None:
                slopes = decay_slopes(*((4, 2**15) if quick else (64, 2**17)), workers)
            kwargs["slopes"] = slopes
        res = CRITERIA[i](quick=quick, workers=workers, **kwargs)
        res.seconds = time.perf_counter() - start
        res.advisory = quick
        results.append(res)
        if report:
            report(res)
    return results
