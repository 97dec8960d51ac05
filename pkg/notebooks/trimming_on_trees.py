"""
Trimming a percolation cluster
==============================

Run the randomized trimming on bond percolation in a tree ball, then check
the surviving configuration by exhaustive search over small sets.
"""

# %%
from fractions import Fraction

from percolab.graphs import gen_tree_ball
from percolab.percolation import sample_bond
from percolab.trimming import (density_lower_bound, surviving_interior_fraction, trim,
                               verify_isoperimetry)

g = gen_tree_ball(3, 10)
h = Fraction(1, 10)

# %% a few seeds; every removed piece had boundary ratio below h
for seed in range(5):
    trace = trim(sample_bond(g, 0.95, seed), h, seed)
    rep = verify_isoperimetry(trace, cap=10)
    print(f"seed {seed}: {trace.sweeps:3d} sweeps, {len(trace.removals):3d} removals, "
          f"survivors {surviving_interior_fraction(trace.final):.4f}, verified {rep.ok}")

# %% the density lower bound for these parameters
print("bound", density_lower_bound(3, 2.85, 1.0, 1.0, 0.1))

# %% the sweep table, as written by `percolab trim`
print("\n".join(trim(sample_bond(g, 0.95, 0), h, 0).to_csv().splitlines()[:6]))
