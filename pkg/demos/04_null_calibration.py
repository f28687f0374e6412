"""Null calibration: mixture weights, tails, critical values, p-values.

The halfspace statistics have covariance-free null laws: a 50/50 mixture of
two chi-square-ratio tails.  The orthant statistics mix p+1 components with
weights that depend on the correlation structure; the supremum of their null
tail over all covariances equals the halfspace expression, so one critical
value calibrates the halfspace test exactly and the orthant test
conservatively.  Averaging the null over a proper inverse-Wishart prior
gives the smaller Bayes-weighted critical value instead.
"""

import numpy as np

from conetest import (
    PriorSpec,
    bayes_critical_value,
    bayes_weights_b1,
    chi_bar_weights,
    g_ratio_tail,
    g_star_tail,
    marginal_logdensity,
    null_tail,
    p_value,
    stats,
    summarize,
    sup_critical_value,
    uit_orthant,
)

n, p, alpha = 20, 3, 0.05

# Chi-square-ratio building blocks.
print("tail of chi2_3/chi2_17 at 0.5:", round(g_ratio_tail(3, n - p, 0.5), 6))
print("two-block convolution tail   :", round(g_star_tail(n, 2, p, 0.5), 6))

# Mixture weights: closed forms through p = 3, Monte Carlo beyond.
rho = 0.5
sigma = np.array([[1, rho, 0], [rho, 1, 0], [0, 0, 1.0]])
w = chi_bar_weights(sigma)
print("\nweights for a correlated covariance:", w.weights.round(4), f"({w.method})")
w_id = chi_bar_weights(np.eye(p))
print("identity weights (binomial):        ", w_id.weights.round(4))
w_mc = chi_bar_weights(sigma, method="monte_carlo", mc_samples=200_000, seed=2)
print("Monte-Carlo replication:            ", w_mc.weights.round(4),
      "+-", w_mc.std_errors.round(4))

# One supremum-calibrated critical value serves halfspace (exactly) and
# orthant (conservatively).
cv = sup_critical_value(stats.UIT_ORTHANT, alpha, n, p)
print(f"\nsup critical value at alpha={alpha}: {cv.value:.6f} (ratio scale)")
print("halfspace tail there:", round(null_tail(stats.UIT_HALFSPACE, cv.value, n, p), 6))
print("orthant tail (identity weights):",
      round(null_tail(stats.UIT_ORTHANT, cv.value, n, p, weights=w_id), 6), "< alpha")

# Bayes-weighted calibration under a proper inverse-Wishart prior.
prior = PriorSpec.inverse_wishart(np.eye(p), df=8.0)
b1 = bayes_weights_b1(n, p, prior, mc_samples=100_000, seed=3)
print("\ncompound-model weights b1:", b1.weights.round(4), "+-", b1.std_errors.round(4))
bayes_cv = bayes_critical_value(stats.UIT_ORTHANT, alpha, n, p, b1)
print(f"Bayes critical {bayes_cv.value:.4f} < sup critical {cv.value:.4f}")

# P-values on a dataset, conservative vs weighted.
rng = np.random.default_rng(5)
s = summarize(rng.multivariate_normal([0.5, 0.3, 0.1], sigma, size=n))
out = uit_orthant(s)
print(f"\nobserved U = {out.statistic:.4f}")
print("conservative p-value:", round(p_value(out, "sup_conservative"), 4))
print("weighted p-value    :", round(p_value(out, "weighted", weights=w), 4))

# Marginal log densities (up to constants) under the two weight functions.
print("\nmarginal log density at theta=0 (inverse-Wishart):",
      round(marginal_logdensity(s, np.zeros(p), prior), 4))
print("marginal log density at theta=0 (Haar):           ",
      round(marginal_logdensity(s, np.zeros(p), PriorSpec.haar()), 4))
print("at theta = sample mean (larger):                  ",
      round(marginal_logdensity(s, s.mean, PriorSpec.haar()), 4))
