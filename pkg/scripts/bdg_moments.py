"""Both sides of the BDG-type inequality for p = 1, 2, 4.

At xi = 0 the left side for p = 4 is at least E[W_1^8] = 105 while the right
side is 2 sqrt(40) E[1] = 12.65, so the inequality as stated cannot hold there.
"""

import numpy as np

from browngraph import ito
from browngraph.paths import ensemble

for xi in [(0, 0), (16, 0), (0, 16), (16, 16)]:
    for g in ("cos", "sin"):
        if xi == (0, 0) and g == "sin":
            continue
        terms = [ito.bdg_path_terms(p, g, xi) for p in ensemble(2000, 2**12, seed=3)]
        sups, qvs = map(np.array, zip(*terms))
        cells = []
        for p in (1, 2, 4):
            r = ito.bdg_report_from_terms(sups, qvs, g, xi, p)
            cells.append(f"p={p}: {r.lhs:9.3f} vs {r.rhs:7.3f}")
        print(f"{str(xi):10s} {g}  " + "   ".join(cells))
