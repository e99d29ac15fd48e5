"""Per-path decay slopes of the graph and image transforms.

    python3 scripts/decay_ensemble.py --paths 8 --n-steps 131072
"""

import argparse

import numpy as np

from browngraph.acceptance import decay_slopes
from browngraph.parallel import default_workers

ap = argparse.ArgumentParser()
ap.add_argument("--paths", type=int, default=8)
ap.add_argument("--n-steps", type=int, default=2**17)
ap.add_argument("--workers", type=int, default=default_workers())
args = ap.parse_args()

rows = decay_slopes(args.paths, args.n_steps, args.workers)
keys = ["graph_corrected", "graph_raw", "image_corrected", "image_raw"]
print("path " + " ".join(f"{k:>16}" for k in keys))
for i, r in enumerate(rows):
    print(f"{i:4d} " + " ".join(f"{r[k]:16.4f}" for k in keys))
print("mean " + " ".join(f"{np.mean([r[k] for r in rows]):16.4f}" for k in keys))
