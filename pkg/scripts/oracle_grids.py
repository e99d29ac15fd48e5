"""Interpolant bias of the second-moment check at the grid sizes it uses."""

from browngraph.acceptance import oracle_plan
from browngraph import oscillatory as osc

for n_steps, freqs in oracle_plan():
    for f in freqs:
        exact = osc.second_moment_exact(f)
        bias = osc.second_moment_interpolant(f, n_steps) / exact - 1
        print(f"u={f.u:7.1f} theta={f.theta:7.4f} {f.angle_class.value:10s} n=2^{n_steps.bit_length() - 1:<3d}"
              f" exact={exact:.6e} relative bias={bias:+.4f}")
