"""Null calibration: mixture weights, tails, critical values, p-values.

The tail formulas are expressed on the chi-square-ratio scale (statistics
standardized by the sum-of-squares matrix); use
:func:`conetest.stats.calibration_scale` to map a computed
:class:`~conetest.stats.TestOutcome` onto that scale.  Halfspace tails are
free of the covariance; orthant tails are mixtures over the active-subset
cardinality with weights that depend on the covariance only through its
correlation structure.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import stats
from ._batch import (
    DEFAULT_CHUNK,
    batch_active_sizes_fixed_cov,
    batch_orthant,
    chunk_sizes,
    run_chunks,
    sample_invwishart_chol,
    sample_mean_cov,
    substream,
)
from ._linalg import check_positive_definite, read_only
from .dist import g_ratio_tail, g_star_tail
from .exceptions import CalibrationError, DataError, MetricError

CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"

SUP_SIGMA = "sup_sigma"
BAYES_WEIGHTED = "bayes_weighted"
EXACT_HALFSPACE = "exact_halfspace"

# Default Monte-Carlo sample count for weight estimation.
DEFAULT_MC_SAMPLES = 1_000_000

_BISECT_TOL_C = 1e-8
_BISECT_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class MixtureWeights:
    """Chi-bar-square mixture weights indexed by subset cardinality 0..p."""

    weights: np.ndarray
    std_errors: np.ndarray
    method: str
    mc_samples: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        se = np.asarray(self.std_errors, dtype=float)
        if w.ndim != 1 or se.shape != w.shape:
            raise DataError("weights and std_errors must be matching vectors")
        if np.any(w < 0.0):
            raise DataError("weights must be nonnegative")
        tol = 1e-12 if self.method == CLOSED_FORM else 1e-3
        if abs(float(w.sum()) - 1.0) > tol:
            raise DataError(f"weights sum to {w.sum():.6f}, not 1")
        object.__setattr__(self, "weights", read_only(w))
        object.__setattr__(self, "std_errors", read_only(se))

    @property
    def p(self):
        return self.weights.shape[0] - 1


@dataclass(frozen=True)
class CriticalValue:
    """A critical value on the chi-square-ratio scale."""

    value: float
    alpha: float
    family: str
    calibration: str


@dataclass(frozen=True)
class PriorSpec:
    """Weight function on the covariance: proper inverse-Wishart, or Haar."""

    kind: str
    scale: Optional[np.ndarray] = None
    df: Optional[float] = None

    def __post_init__(self):
        if self.kind == "inverse_wishart":
            if self.scale is None or self.df is None:
                raise DataError("inverse_wishart prior needs a scale matrix and df")
            scale = check_positive_definite(self.scale, "prior scale")
            p = scale.shape[0]
            if not float(self.df) > p - 1:
                raise DataError(
                    f"inverse_wishart df must exceed p - 1 = {p - 1} for a proper prior"
                )
            object.__setattr__(self, "scale", read_only(scale))
            object.__setattr__(self, "df", float(self.df))
        elif self.kind == "haar":
            if self.scale is not None or self.df is not None:
                raise DataError("haar prior takes no parameters")
        else:
            raise DataError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def inverse_wishart(cls, scale, df):
        return cls(kind="inverse_wishart", scale=scale, df=df)

    @classmethod
    def haar(cls):
        return cls(kind="haar")


def _correlation_from(sigma):
    sigma = check_positive_definite(sigma, "sigma")
    d = 1.0 / np.sqrt(np.diag(sigma))
    return sigma * np.outer(d, d)


def _orthant_probability_2(r):
    """P{Z1 > 0, Z2 > 0} for a bivariate normal with correlation ``r``."""
    return 0.25 + np.arcsin(r) / (2.0 * np.pi)


def _orthant_probability_3(corr):
    """Trivariate positive-orthant probability via pairwise arcsines."""
    r12, r13, r23 = corr[0, 1], corr[0, 2], corr[1, 2]
    return 0.125 + (np.arcsin(r12) + np.arcsin(r13) + np.arcsin(r23)) / (4.0 * np.pi)


def _closed_form_weights(corr):
    p = corr.shape[0]
    w = np.zeros(p + 1)
    if p == 1:
        w[:] = (0.5, 0.5)
        return w
    if p == 2:
        rho = corr[0, 1]
        w[2] = _orthant_probability_2(rho)
        w[0] = 0.25 - np.arcsin(rho) / (2.0 * np.pi)
        w[1] = 1.0 - w[0] - w[2]
        return w
    if p == 3:
        w[3] = _orthant_probability_3(corr)
        inv_corr = _correlation_from(np.linalg.inv(corr))
        w[0] = _orthant_probability_3(inv_corr)
        # |a| = 2: the adjusted pair is independent of the leftover coordinate,
        # with partial correlation given that coordinate.
        for k in range(3):
            i, j = [t for t in range(3) if t != k]
            partial = (corr[i, j] - corr[i, k] * corr[j, k]) / np.sqrt(
                (1.0 - corr[i, k] ** 2) * (1.0 - corr[j, k] ** 2)
            )
            w[2] += 0.5 * _orthant_probability_2(partial)
        # |a| = 1: the complement-pair condition flips the sign of the
        # pairwise correlation under block inversion.
        for i in range(3):
            j, k = [t for t in range(3) if t != i]
            w[1] += 0.5 * (0.25 - np.arcsin(corr[j, k]) / (2.0 * np.pi))
        return w
    raise CalibrationError(f"no closed-form weights for p = {p}")


def chi_bar_weights(sigma, method="auto", mc_samples=DEFAULT_MC_SAMPLES, seed=None, workers=1):
    """Mixture weights of the orthant statistics' null distribution.

    ``weights[k]`` is the probability that the active subset has cardinality
    ``k`` for a centered normal vector with covariance ``sigma``; it depends
    on ``sigma`` only through its correlation matrix.

    Parameters
    ----------
    sigma : array_like, shape (p, p)
        Positive definite covariance (or correlation) matrix.
    method : {"auto", "closed_form", "monte_carlo"}
        ``auto`` uses closed forms for ``p <= 3`` and Monte Carlo beyond.
    mc_samples : int
        Monte-Carlo sample count (``monte_carlo`` only).
    seed : int
        Required for Monte Carlo; drives counter-based substreams.
    workers : int
        Worker threads for the Monte-Carlo chunks; does not affect results.
    """
    corr = _correlation_from(sigma)
    p = corr.shape[0]
    if method not in ("auto", CLOSED_FORM, MONTE_CARLO):
        raise DataError(f"unknown weights method {method!r}")
    if method == CLOSED_FORM and p > 3:
        raise CalibrationError(f"closed-form weights stop at p = 3, got p = {p}")
    if method in ("auto", CLOSED_FORM) and p <= 3:
        w = _closed_form_weights(corr)
        return MixtureWeights(
            weights=w,
            std_errors=np.zeros(p + 1),
            method=CLOSED_FORM,
            mc_samples=0,
        )
    if seed is None:
        raise CalibrationError("Monte-Carlo weight estimation requires a seed")
    mc_samples = int(mc_samples)
    if mc_samples < 1:
        raise DataError("mc_samples must be positive")
    chol = np.linalg.cholesky(corr)
    sizes_of = chunk_sizes(mc_samples, DEFAULT_CHUNK)

    def worker(i):
        rng = substream(seed, (10, i))
        z = rng.standard_normal((sizes_of[i], p)) @ chol.T
        counts = np.bincount(batch_active_sizes_fixed_cov(z, corr), minlength=p + 1)
        return counts

    counts = np.sum(run_chunks(worker, len(sizes_of), workers), axis=0)
    w = counts / mc_samples
    se = np.sqrt(w * (1.0 - w) / mc_samples)
    return MixtureWeights(weights=w, std_errors=se, method=MONTE_CARLO, mc_samples=mc_samples)


def null_tail(family, c, n, p, weights=None):
    """Null upper-tail probability at ``c`` on the chi-square-ratio scale.

    Halfspace families average the tails of the boundary and interior
    branches; orthant families are chi-bar-square style mixtures over the
    supplied weights (which are then required).  ``c <= 0`` returns 1
    (statistics are nonnegative, with an atom at zero).
    """
    n = int(n)
    p = int(p)
    if n <= p:
        raise DataError(f"need n > p, got n={n}, p={p}")
    if c <= 0.0:
        return 1.0
    if family == stats.T2:
        return g_ratio_tail(p, n - p, c)
    if family == stats.LRT_HALFSPACE:
        return 0.5 * (g_ratio_tail(p - 1, n - p, c) + g_ratio_tail(p, n - p, c))
    if family == stats.UIT_HALFSPACE:
        return 0.5 * (g_star_tail(n, p - 1, p, c) + g_star_tail(n, p, p, c))
    if family in (stats.LRT_ORTHANT, stats.UIT_ORTHANT):
        if weights is None:
            raise CalibrationError(f"{family} tail requires mixture weights")
        w = np.asarray(weights.weights, dtype=float)
        if w.shape[0] != p + 1:
            raise DataError("weights length does not match p + 1")
        if family == stats.LRT_ORTHANT:
            terms = [g_ratio_tail(k, n - p, c) for k in range(p + 1)]
        else:
            terms = [g_star_tail(n, k, p, c) for k in range(p + 1)]
        return float(np.dot(w, terms))
    raise CalibrationError(f"no null tail for family {family!r}")


def _invert_tail(tail, alpha, tol_c=_BISECT_TOL_C):
    """Solve ``tail(c) = alpha`` for a nonincreasing tail on (0, inf)."""
    if not 0.0 < alpha < 1.0:
        raise CalibrationError(f"alpha must be in (0, 1), got {alpha}")
    lo = 0.0
    hi = 1.0
    doublings = 0
    while tail(hi) >= alpha:
        hi *= 2.0
        doublings += 1
        if doublings > _BISECT_MAX_DOUBLINGS:
            raise CalibrationError("tail does not drop below alpha; cannot bracket")
    while hi - lo > tol_c:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if tail(mid) >= alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sup_critical_value(family, alpha, n, p):
    """Critical value equating the covariance-supremum of the null tail to alpha.

    For halfspace families this calibration is exact (their tails do not
    depend on the covariance); for the orthant families the same value is
    conservative, since the supremum of their null tail over all covariances
    equals the halfspace expression.
    """
    n = int(n)
    p = int(p)
    if n <= p:
        raise DataError(f"need n > p, got n={n}, p={p}")
    if family in (stats.LRT_ORTHANT, stats.LRT_HALFSPACE):
        tail = lambda c: 0.5 * (
            g_ratio_tail(p - 1, n - p, c) + g_ratio_tail(p, n - p, c)
        )
    elif family in (stats.UIT_ORTHANT, stats.UIT_HALFSPACE):
        tail = lambda c: 0.5 * (g_star_tail(n, p - 1, p, c) + g_star_tail(n, p, p, c))
    elif family == stats.T2:
        tail = lambda c: g_ratio_tail(p, n - p, c)
    else:
        raise CalibrationError(f"no supremum calibration for family {family!r}")
    attainable = 1.0 if (p >= 2 or family == stats.T2) else 0.5
    if not 0.0 < alpha < attainable:
        raise CalibrationError(
            f"alpha = {alpha} is outside the attainable tail range (0, {attainable})"
        )
    value = _invert_tail(tail, alpha)
    return CriticalValue(value=float(value), alpha=float(alpha), family=family, calibration=SUP_SIGMA)


def exact_halfspace_critical_value(family, alpha, n, p):
    """Exact critical value for a halfspace family (same tail, exact label)."""
    if family not in stats.HALFSPACE_FAMILIES + (stats.T2,):
        raise CalibrationError(
            f"exact calibration applies to halfspace families, not {family!r}"
        )
    cv = sup_critical_value(family, alpha, n, p)
    return CriticalValue(
        value=cv.value, alpha=cv.alpha, family=family, calibration=EXACT_HALFSPACE
    )


def bayes_weights_b1(n, p, prior, mc_samples=DEFAULT_MC_SAMPLES, seed=None, workers=1):
    """Active-subset size probabilities under a compound inverse-Wishart null.

    The covariance is drawn from the proper inverse-Wishart prior, the data
    are null-normal given the covariance, and each draw is classified by the
    usual active-subset rule; standard errors accompany the estimates.
    """
    n = int(n)
    p = int(p)
    if n <= p:
        raise DataError(f"need n > p, got n={n}, p={p}")
    if not isinstance(prior, PriorSpec) or prior.kind != "inverse_wishart":
        raise CalibrationError(
            "weight estimation requires a proper inverse-Wishart prior"
        )
    if prior.scale.shape[0] != p:
        raise DataError("prior scale dimension disagrees with p")
    if seed is None:
        raise CalibrationError("Monte-Carlo weight estimation requires a seed")
    mc_samples = int(mc_samples)
    if mc_samples < 1:
        raise DataError("mc_samples must be positive")
    sizes_of = chunk_sizes(mc_samples, max(1, DEFAULT_CHUNK // max(1, n // 8)))

    def worker(i):
        rng = substream(seed, (11, i))
        reps = sizes_of[i]
        factors = sample_invwishart_chol(rng, np.asarray(prior.scale), prior.df, reps)
        means, covs = sample_mean_cov(rng, None, factors, n, reps)
        sizes, _, _ = batch_orthant(means, covs, n)
        return np.bincount(sizes, minlength=p + 1)

    counts = np.sum(run_chunks(worker, len(sizes_of), workers), axis=0)
    w = counts / mc_samples
    se = np.sqrt(w * (1.0 - w) / mc_samples)
    return MixtureWeights(weights=w, std_errors=se, method=MONTE_CARLO, mc_samples=mc_samples)


def bayes_critical_value(family, alpha, n, p, weights):
    """Critical value averaging the null tail over the covariance prior.

    Solves ``sum_k b1(k) * tail_k(c) = alpha`` by bisection to ``1e-6``,
    where ``tail_k`` is the plain chi-square-ratio tail for the
    likelihood-ratio family and the two-block convolution tail for the
    union-intersection family.
    """
    if family not in (stats.LRT_ORTHANT, stats.UIT_ORTHANT):
        raise CalibrationError(
            f"Bayes-weighted calibration applies to orthant families, not {family!r}"
        )
    if weights is None:
        raise CalibrationError("Bayes-weighted calibration requires weights")
    tail = lambda c: null_tail(family, c, n, p, weights=weights)
    attainable = 1.0 - float(weights.weights[0])
    if not 0.0 < alpha < attainable:
        raise CalibrationError(
            f"alpha = {alpha} is outside the attainable tail range (0, {attainable:.4f})"
        )
    value = _invert_tail(tail, alpha, tol_c=1e-8)
    # Polish until the defining equation holds to 1e-6.
    if abs(tail(value) - alpha) > 1e-6:
        value = _invert_tail(tail, alpha, tol_c=1e-10)
    return CriticalValue(value=float(value), alpha=float(alpha), family=family, calibration=BAYES_WEIGHTED)


def marginal_logdensity(s, theta, prior):
    """Log marginal density of the sample summaries, up to an additive constant.

    Under the proper inverse-Wishart prior the value is
    ``(m/2) log|scale| + ((n-p-2)/2) log|S| - ((n+m-1)/2) log|W + scale|``
    with ``W = S + n (xbar - theta)(xbar - theta)'``; under the Haar weight
    it is ``((n-p-2)/2) log|S| - (n/2) log|V|`` with
    ``V = (n-1) S + n (xbar - theta)(xbar - theta)'``.  Normalizing
    constants are omitted.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (s.p,):
        raise DataError("theta has wrong dimension")
    s.require_positive_definite()
    cov = np.asarray(s.cov, dtype=float)
    diff = np.asarray(s.mean, dtype=float) - theta
    outer = s.n * np.outer(diff, diff)
    sign_s, logdet_s = np.linalg.slogdet(cov)
    if prior.kind == "inverse_wishart":
        if prior.scale.shape[0] != s.p:
            raise DataError("prior scale dimension disagrees with p")
        w = cov + outer + np.asarray(prior.scale)
        sign_w, logdet_w = np.linalg.slogdet(w)
        if sign_w <= 0:
            raise MetricError("W + scale is not positive definite")
        _, logdet_g = np.linalg.slogdet(np.asarray(prior.scale))
        m = prior.df
        return float(
            0.5 * m * logdet_g
            + 0.5 * (s.n - s.p - 2) * logdet_s
            - 0.5 * (s.n + m - 1) * logdet_w
        )
    if prior.kind == "haar":
        v = (s.n - 1) * cov + outer
        sign_v, logdet_v = np.linalg.slogdet(v)
        if sign_v <= 0:
            raise MetricError("V is not positive definite")
        return float(0.5 * (s.n - s.p - 2) * logdet_s - 0.5 * s.n * logdet_v)
    raise CalibrationError(f"unsupported prior kind {prior.kind!r}")


def p_value(outcome, mode, weights=None):
    """Null tail probability at the observed statistic.

    Modes: ``exact_halfspace`` (halfspace families, whose null law is free
    of the covariance), ``sup_conservative`` (upper bound; exact for
    halfspace families, conservative for orthant ones), and ``weighted``
    (orthant families with supplied mixture or Bayes weights).  A statistic
    of exactly zero reports 1.
    """
    family = outcome.family
    if outcome.statistic <= 0.0:
        return 1.0
    value = stats.calibration_scale(outcome)
    n, p = outcome.n, outcome.p
    if mode == EXACT_HALFSPACE:
        if family not in stats.HALFSPACE_FAMILIES + (stats.T2,):
            raise CalibrationError(
                f"exact_halfspace p-values apply to halfspace families, not {family!r}"
            )
        return null_tail(family, value, n, p)
    if mode == "sup_conservative":
        if family == stats.T2:
            return null_tail(stats.T2, value, n, p)
        if family in (stats.LRT_ORTHANT, stats.LRT_HALFSPACE):
            return null_tail(stats.LRT_HALFSPACE, value, n, p)
        if family in (stats.UIT_ORTHANT, stats.UIT_HALFSPACE):
            return null_tail(stats.UIT_HALFSPACE, value, n, p)
        raise CalibrationError(f"no conservative p-value for family {family!r}")
    if mode == "weighted":
        if family not in stats.ORTHANT_FAMILIES:
            raise CalibrationError(
                f"weighted p-values apply to orthant families, not {family!r}"
            )
        if weights is None:
            raise CalibrationError("weighted p-values require mixture weights")
        return null_tail(family, value, n, p, weights=weights)
    raise CalibrationError(f"unknown p-value mode {mode!r}")
