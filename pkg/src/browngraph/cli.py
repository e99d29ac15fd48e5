"""Command-line front end.

    browngraph paths  --n-paths 2 --n-steps 1024 --seed 7 --out runs/p
    browngraph scan   --mode lattice --eps 1 --radius 1.5
    browngraph ito    --xi 16,16 --sweep-steps 1024,4096,16384
    browngraph equi   --matrix "2,1;0,3" --N 2048
    browngraph accept --quick

Every run prints one JSON summary on stdout. Exit codes: 0 all checks pass,
1 a check failed, 2 usage error, 3 precision budget too small.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance, equi, ito
from . import oscillatory as osc
from .config import RunConfig, as_dict, load_config
from .errors import InsufficientData, InvalidArgument, PrecisionBudgetError, PreconditionViolation, ZeroFrequency
from .fixedpoint import ExactPoint, frac_dot
from .io import dumps, write_csv, write_json
from .parallel import pmap
from .paths import generate_path, write_path

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _paths(cfg: RunConfig):
    if cfg.n_paths < 1:
        raise UsageError("need at least one path (--n-paths >= 1)")
    return [generate_path(cfg.n_steps, cfg.seed, s) for s in range(cfg.n_paths)]


def _write_one_path(args):
    n_steps, seed, stream, dest = args
    return str(write_path(generate_path(n_steps, seed, stream), dest))


def cmd_paths(cfg: RunConfig) -> tuple[dict, list]:
    if cfg.n_paths < 1:
        raise UsageError("need at least one path (--n-paths >= 1)")
    out = Path(cfg.out)
    tasks = [(cfg.n_steps, cfg.seed, s, out / f"path_{s:04d}.csv") for s in range(cfg.n_paths)]
    files = pmap(_write_one_path, tasks, cfg.workers, chunksize=1)
    return {}, files


def _scan_one(args):
    cfg, stream = args
    path = generate_path(cfg.n_steps, cfg.seed, stream)
    if cfg.mode == "lattice":
        samples = osc.scan_lattice(path, cfg.eps, cfg.radius)
    else:
        samples = osc.scan_polar(path, cfg.moduli, cfg.base_angles, cfg.oversample)
    out = Path(cfg.out)
    files = [str(write_csv(out / f"scan_{stream:04d}.csv", osc.SCAN_COLUMNS, (s.row() for s in samples)))]
    try:
        fit = {"fit": osc.fit_decay(osc.annulus_max(samples), True).to_json()}
    except InsufficientData as exc:
        fit = {"fit": None, "reason": str(exc)}
    files.append(str(write_json(out / f"fit_{stream:04d}.json", fit)))
    if cfg.mode == "lattice" and cfg.n_random > 0:
        rep = osc.offgrid_consistency(path, cfg.eps, cfg.radius, cfg.n_random, cfg.seed)
        files.append(str(write_json(out / f"offgrid_{stream:04d}.json", rep.to_json())))
    return files


def cmd_scan(cfg: RunConfig) -> tuple[dict, list]:
    if cfg.mode not in ("lattice", "polar"):
        raise UsageError("--mode must be lattice or polar")
    if cfg.n_paths < 1:
        raise UsageError("need at least one path (--n-paths >= 1)")
    nested = pmap(_scan_one, [(cfg, s) for s in range(cfg.n_paths)], cfg.workers, chunksize=1)
    return {}, [f for files in nested for f in files]


def cmd_ito(cfg: RunConfig) -> tuple[dict, list]:
    out = Path(cfg.out)
    xi = tuple(cfg.xi)
    if len(xi) != 2:
        raise UsageError("--xi takes two numbers")
    checks, files = {}, []

    rms_ito, rms_key = ito.residual_sweep(cfg.n_paths, cfg.sweep_steps, xi, cfg.seed, cfg.workers)
    rows = [
        {"n_steps": n, "rms_residual": a, "rms_key_identity": b}
        for n, a, b in zip(cfg.sweep_steps, rms_ito, rms_key)
    ]
    files.append(str(write_csv(out / "residual_sweep.csv", ["n_steps", "rms_residual", "rms_key_identity"], rows)))
    if len(cfg.sweep_steps) >= 2:
        order = ito.convergence_order(cfg.sweep_steps, rms_ito)
        checks["residual order >= 0.35"] = order >= 0.35

    paths = _paths(cfg)
    hxi = osc.Frequency.polar(cfg.moment_u, cfg.moment_theta)
    if hxi.angle_class is not osc.AngleClass.HORIZONTAL:
        raise UsageError(f"moment frequency (u={cfg.moment_u}, theta={cfg.moment_theta}) is not horizontal")
    heads = ito.horizontal_heads(paths, hxi)
    moments = [ito.moment_report_from_heads(heads, hxi, p).to_json() for p in cfg.p_list]
    files.append(str(write_json(out / "moment.json", moments)))
    checks["moment bound"] = all(m["satisfied"] for m in moments)

    bdg = []
    for g in ("cos", "sin"):
        terms = [ito.bdg_path_terms(p, g, xi) for p in paths]
        sups, qvs = map(np.array, zip(*terms))
        bdg += [ito.bdg_report_from_terms(sups, qvs, g, xi, p).to_json() for p in cfg.p_list]
    files.append(str(write_json(out / "bdg.json", bdg)))
    checks["BDG within 2 SE"] = all(r["pass_within_2se"] for r in bdg)

    tails = [ito.tail_bound_check(p, hxi) for p in paths]
    files.append(str(write_json(out / "tail.json", tails)))
    checks["tail bound"] = all(t["pass"] for t in tails)
    return checks, files


def _cross_check(T: equi.ToralEndomorphism, cfg: RunConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    bits = equi.required_bits(T, cfg.N)
    worst, identical = 0.0, True
    for _ in range(10):
        k = tuple(int(v) for v in rng.integers(-cfg.k_range, cfg.k_range + 1, size=T.d))
        if not any(k):
            k = (1,) + k[1:]
        x0 = ExactPoint.from_floats(rng.random(T.d), bits, fill_seed=int(rng.integers(2**32)))
        adj = equi.adjoint_turns(T, k, x0, cfg.N)
        direct = [frac_dot(k, x) for x in equi.orbit(T, x0, cfg.N)]
        identical &= adj == direct
        den = 1 << bits
        diff = np.exp(2j * np.pi * np.array([m / den for m in adj])) - np.exp(
            2j * np.pi * np.array([m / den for m in direct])
        )
        worst = max(worst, float(np.max(np.abs(diff))))
    return {"cases": 10, "bit_identical": identical, "max_phase_error": worst}


def cmd_equi(cfg: RunConfig) -> tuple[dict, list]:
    out = Path(cfg.out)
    checks, files = {}, []
    if cfg.third_doubling:
        n = cfg.N if cfg.N % 2 == 0 else cfg.N + 1
        rep = equi.weyl_sum(equi.rational_orbit([[2]], [Fraction(1, 3)], n), (1,))
        files.append(str(write_json(out / "third_doubling.json", {"N": n, "S_N": rep.S_N, "magnitude": rep.magnitude})))
        checks["thirds doubling |S_N| = 1/2"] = rep.magnitude == 0.5
        return checks, files
    T = equi.make_endomorphism(cfg.matrix)
    if not T.expanding:
        raise UsageError(f"map {cfg.matrix} is not expanding: sigma_min = {T.sigma_min:.17g}")
    bits = cfg.bits or acceptance.equi_bits(T, cfg.N)
    if cfg.cross_check:
        rep = _cross_check(T, cfg)
        files.append(str(write_json(out / "cross_check.json", rep)))
        checks["adjoint equals orbit"] = rep["bit_identical"] and rep["max_phase_error"] <= 1e-9
    path = generate_path(cfg.n_steps, cfg.seed, 0)
    rep = equi.brownian_orbit_experiment(
        path, T, cfg.N, cfg.k_range, cfg.n_starts, seed=cfg.seed, bits=bits, workers=cfg.workers
    )
    files.append(str(write_json(out / "equi.json", rep)))
    agg = rep["aggregate"]
    checks["Weyl sums small on 90% of starts"] = agg["weyl_pass_fraction"] >= 0.9
    checks["discrepancy small on 90% of starts"] = agg["discrepancy_pass_fraction"] >= 0.9
    return checks, files


def cmd_accept(cfg: RunConfig) -> tuple[dict, list]:
    def report(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = acceptance.run(cfg.only or None, quick=cfg.quick, workers=cfg.workers, report=report)
    dest = write_json(Path(cfg.out) / "acceptance.json", [r.to_json() for r in results])
    return {f"criterion {r.id}": r.passed for r in results}, [str(dest)]


COMMANDS = {"paths": cmd_paths, "scan": cmd_scan, "ito": cmd_ito, "equi": cmd_equi, "accept": cmd_accept}

# flag name -> config key, for flags that differ only by dashes
_FLAGS = {
    "paths": ["n-paths", "n-steps"],
    "scan": ["n-paths", "n-steps", "mode", "eps", "radius", "moduli", "base-angles", "oversample", "n-random"],
    "ito": ["n-paths", "n-steps", "xi", "sweep-steps", "moment-u", "moment-theta", "p-list"],
    "equi": ["n-steps", "matrix", "N", "k-range", "n-starts", "bits"],
    "accept": ["only"],
}
_SWITCHES = {"equi": ["cross-check", "third-doubling"], "accept": ["quick"]}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed")
    common.add_argument("--out")
    common.add_argument("--workers")
    common.add_argument("--config", help="key = value file; flags override it")
    parser = argparse.ArgumentParser(prog="browngraph", description="Brownian graph Fourier and equidistribution experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        for flag in _FLAGS[name]:
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"))
        for flag in _SWITCHES.get(name, []):
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), action="store_const", const="true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    start = time.perf_counter()
    summary = {"command": args.command}
    try:
        cfg = load_config(args.config, overrides)
        summary["config"] = as_dict(cfg)
        checks, files = COMMANDS[args.command](cfg)
        code = EXIT_OK if all(checks.values()) else EXIT_CHECK
    except PrecisionBudgetError as exc:
        checks, files, code = {}, [], EXIT_BUDGET
        summary["error"] = str(exc)
    except (UsageError, InvalidArgument, PreconditionViolation, ZeroFrequency, OSError) as exc:
        checks, files, code = {}, [], EXIT_USAGE
        summary["error"] = str(exc)
        print(f"browngraph {args.command}: {exc}", file=sys.stderr)
    summary.update(
        {"wall_time": time.perf_counter() - start, "checks": checks, "artifacts": files, "exit_code": code}
    )
    print(dumps(summary))
    return code


if __name__ == "__main__":
    sys.exit(main())
