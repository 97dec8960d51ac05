"""
Spanning forests and the degree of the basepoint
================================================

Free and wired uniform spanning forests on grid balls.  The exact expected
degree comes from effective resistances; Wilson's algorithm gives the
sampled one.
"""

# %%
from percolab.forests import degree_report, expected_degree_exact, p0_threshold
from percolab.graphs import gen_grid_ball, gen_tree_ball

# %% wired degree tends to 2 on Z^2 and the free/wired gap closes
for r in (2, 4, 6, 8):
    g = gen_grid_ball(2, r)
    free = expected_degree_exact(g, "free")
    wired = expected_degree_exact(g, "wired")
    mc = degree_report(g, "wired", 2000, seed=r)
    print(f"r={r}: free {free:.4f}  wired {wired:.4f}  gap {free - wired:.4f}  "
          f"sampled wired {mc.mean:.4f} +- {3 * mc.stderr:.4f}")

# %% on a tree ball the free forest is the ball itself
rep = degree_report(gen_tree_ball(3, 6), "free", 1, seed=0)
print("tree free degree", rep.mean, "threshold", p0_threshold(rep).value)
