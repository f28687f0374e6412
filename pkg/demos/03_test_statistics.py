"""The statistic family on one dataset, and the identities tying it together.

Ordering on every sample:  0 <= L <= U <= T2  and  0 <= L* <= U* <= T2,
with the halfspace versions dominating their orthant counterparts pointwise.
The integrated-likelihood identity links the L statistic to a posterior-odds
style quantity, and a directional sweep shows U as the envelope of squared
one-dimensional statistics.
"""

import numpy as np

from conetest import (
    calibration_scale,
    directional_component,
    fuit,
    hotelling_t2,
    integrated_lr_ratio,
    lrt_halfspace,
    lrt_orthant,
    summarize,
    uit_halfspace,
    uit_orthant,
)
from conetest.sample import conditional_block

rng = np.random.default_rng(21)
data = rng.multivariate_normal([0.45, 0.2, -0.25], [[1, 0.4, 0.1], [0.4, 1, 0.2], [0.1, 0.2, 1]], size=20)
s = summarize(data)

t2 = hotelling_t2(s)
u, l = uit_orthant(s), lrt_orthant(s)
us, ls = uit_halfspace(s), lrt_halfspace(s)

print(f"T2  = {t2.statistic:.4f}")
print(f"U   = {u.statistic:.4f}   L  = {l.statistic:.4f}   (orthant, active {u.active_subset.a})")
print(f"U*  = {us.statistic:.4f}   L* = {ls.statistic:.4f}   (halfspace)")
print("\nordering holds:", l.statistic <= u.statistic <= t2.statistic,
      "and", ls.statistic <= us.statistic <= t2.statistic)
print("halfspace dominates orthant:", us.statistic >= u.statistic, ls.statistic >= l.statistic)

# Calibration-scale values are what critical values are compared against.
print("\ncalibration-scale values:",
      {o.family: round(calibration_scale(o), 4) for o in (t2, u, l, us, ls)})

# The integrated-likelihood identity: log form is exact.
ratio = integrated_lr_ratio(s)
print(f"\n(1 + L)^((n-1)/2) = {ratio:.6f}")
print("log recomputation :", np.exp(0.5 * (s.n - 1) * np.log1p(l.statistic)).round(6))

# Directional envelope: any direction's squared statistic sits below U,
# and the conditional-regression direction attains it.
part = u.active_subset
block = conditional_block(s, part)
best = np.zeros(s.p)
best[list(part.a)] = np.linalg.solve(block.cov_cond, block.mean_cond)
print("\noptimizing direction value:", round(directional_component(s, best), 4), "= U")
sup_random = max(
    directional_component(s, rng.standard_normal(s.p)) for _ in range(2000)
)
print("best of 2000 random directions:", round(sup_random, 4), "<= U")

# The Bonferroni combination of coordinatewise t tests.
rep = fuit(s, alpha=0.05)
print("\ncoordinatewise t statistics:", rep.t_values.round(3))
print(f"per-coordinate level {rep.alpha_star:.4f}, threshold {rep.threshold:.3f},",
      "reject" if rep.reject else "accept")
