"""Lattice versus off-grid decay slopes on 2^17-step paths (slow: ~40 s per path)."""

import numpy as np

from browngraph import oscillatory as osc
from browngraph.paths import generate_path

diffs = []
for s in range(6):
    rep = osc.offgrid_consistency(generate_path(2**17, 11, s), 128.0, 4096.0, 2000, s)
    diffs.append(rep.slope_difference)
    print(s, f"{rep.lattice_fit.slope:.4f} {rep.offgrid_fit.slope:.4f} {rep.slope_difference:+.4f}", flush=True)
print("mean difference", np.mean(diffs))
