"""
Walks on the 3-regular tree
===========================

Speed, spectral radius and entropy of the simple walk on T3, computed on the
implicit tree so that long times cost nothing.
"""

# %%
import math

import numpy as np

from percolab.graphs import RegularTree
from percolab.walks import (distribution_exact, entropy, return_probabilities,
                            spectral_radius_profile, spectral_radius_ratio,
                            speed_estimate, walk_batch)

T3 = RegularTree(3)

# %% speed: simple walk drifts away at 1/3, the delayed one at 1/4
for kind in ("simple", "delayed"):
    est = speed_estimate(walk_batch(T3, 1000, 400, seed=1, kind=kind))
    print(f"{kind:8s} speed {est.speed:.4f} +- {3 * est.stderr:.4f}")

# %% return probabilities decay like rho^(2t) t^(-3/2), rho = 2 sqrt(2)/3
rho = 2 * math.sqrt(2) / 3
p = return_probabilities(T3, 80)
print("p_2t(o,o) for t = 1..5:", np.round(p[2:12:2], 5))
prof = spectral_radius_profile(T3, 40)
print(f"p_80^(1/80) = {prof[-1]:.5f}, ratio estimate {spectral_radius_ratio(T3, 40):.5f}, "
      f"rho = {rho:.5f}")

# %% entropy per step of the exact law; the limit is log(2)/3
for t in (10, 50, 200):
    print(f"t={t:4d}  H(mu_t)/t = {entropy(distribution_exact(T3, t)) / t:.5f}")
print(f"limit     {math.log(2) / 3:.5f}")
