"""How the linear interpolant inflates E|nu_hat(v)|^2 at large v.

Prints log2(Monte Carlo / exact) for v = 2^4..2^13 at several grid sizes.
Once v * sqrt(dt) is of order 0.1 the interpolant's second moment decays like
1/v instead of 1/v^2, which pulls per-path image slopes towards -1/2.
"""

import argparse

import numpy as np

from browngraph import oscillatory as osc
from browngraph.paths import ensemble

ap = argparse.ArgumentParser()
ap.add_argument("--paths", type=int, default=24)
ap.add_argument("--grids", type=int, nargs="+", default=[13, 17, 21])
args = ap.parse_args()

vs = np.array([2.0**k for k in range(4, 14)])
exact = np.array([osc.second_moment_exact((0, v)) for v in vs])
print("log2 n  " + " ".join(f"{int(np.log2(v)):>6d}" for v in vs))
for k in args.grids:
    acc = np.zeros(len(vs))
    for p in ensemble(args.paths, 2**k, seed=7):
        acc += np.abs(osc.image_transforms(p, vs)) ** 2
    ratio = np.log2(acc / args.paths / exact)
    model = np.log2([osc.second_moment_interpolant((0, v), 2**k) for v in vs] / exact)
    print(f"{k:6d}  " + " ".join(f"{r:6.2f}" for r in ratio))
    print(f"{'model':>6}  " + " ".join(f"{r:6.2f}" for r in model))
