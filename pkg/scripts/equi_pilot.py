"""Weyl sums and discrepancy along orbits started on a Brownian graph."""

import numpy as np

from browngraph import equi
from browngraph.acceptance import equi_bits
from browngraph.paths import generate_path

path = generate_path(2**16, 8, 0)
T = equi.make_endomorphism("2,1;0,3")
for N in (256, 512, 1024, 2048):
    rep = equi.brownian_orbit_experiment(path, T, N, 3, 20, seed=8, bits=equi_bits(T, N))
    w = [s["max_weyl"] for s in rep["per_start"]]
    d = [s["discrepancy"] for s in rep["per_start"]]
    print(f"N={N:5d} max|S_N| median {np.median(w):.4f} worst {max(w):.4f}  discrepancy median {np.median(d):.4f} worst {max(d):.4f}")

T2 = equi.make_endomorphism("2,0;0,2")
Ns = [2**j for j in range(4, 11)]
r = equi.r_N_series(T2, (1, 1), generate_path(4096, 1), Ns, 64, seed=3)
print("r_N", {N: round(float(r[N]), 5) for N in Ns})
print("fit exponent", np.polyfit(np.log(Ns), np.log([r[N] for N in Ns]), 1)[0])
