"""RMS Ito and key-identity residuals under bridge refinement."""

import argparse

from browngraph import ito
from browngraph.parallel import default_workers

ap = argparse.ArgumentParser()
ap.add_argument("--paths", type=int, default=200)
ap.add_argument("--xi", type=float, nargs=2, default=[16.0, 16.0])
ap.add_argument("--workers", type=int, default=default_workers())
args = ap.parse_args()

levels = [2**10, 2**12, 2**14, 2**16]
rms_ito, rms_key = ito.residual_sweep(args.paths, levels, tuple(args.xi), seed=5, workers=args.workers)
for n, a, b in zip(levels, rms_ito, rms_key):
    print(f"{n:7d} {a:12.6g} {b:12.6g}")
print("order", ito.convergence_order(levels, rms_ito), ito.convergence_order(levels, rms_key))
