"""Monte-Carlo power laboratory.

Reproduces the qualitative phenomena of cone-restricted testing: exact
similarity of the halfspace tests, conservativeness and non-similarity of
the orthant tests under supremum calibration, pointwise domination of the
orthant tests by their halfspace counterparts, convexity of the
union-intersection acceptance regions, and nonconvexity of the
likelihood-ratio acceptance region.

Randomness is organized in fixed-size chunks driven by counter-based
substreams, so results are bit-identical for any worker count.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import calibrate, stats
from ._batch import (
    batch_fuit_max_t,
    batch_halfspace,
    batch_orthant,
    chunk_sizes,
    run_chunks,
    sample_invwishart_chol,
    sample_mean_cov,
    substream,
)
from ._linalg import check_positive_definite
from .dist import student_t_upper_quantile
from .exceptions import CalibrationError, ConeTestError, DataError
from .stats import (
    FUIT,
    LRT_HALFSPACE,
    LRT_ORTHANT,
    T2,
    UIT_HALFSPACE,
    UIT_ORTHANT,
)

DEFAULT_SIM_CHUNK = 20000

# Leading substream indices per consumer, so stream keys never collide
# (the weight estimators in the calibration module use 10 and 11).
_STREAM_POWER = 2
_STREAM_CONVEXITY = 3
_STREAM_SIMILARITY = 4


@dataclass(frozen=True)
class SigmaSource:
    """Covariance source: a fixed matrix, an explicit list, or random correlations."""

    kind: str
    matrix: Optional[np.ndarray] = None
    matrices: Optional[tuple] = None
    count: int = 1

    def __post_init__(self):
        if self.kind == "fixed":
            if self.matrix is None:
                raise DataError("fixed sigma source needs a matrix")
            object.__setattr__(
                self, "matrix", check_positive_definite(self.matrix, "sigma")
            )
        elif self.kind == "sequence":
            if not self.matrices:
                raise DataError("sequence sigma source needs at least one matrix")
            mats = tuple(
                check_positive_definite(m, f"sigma[{i}]")
                for i, m in enumerate(self.matrices)
            )
            object.__setattr__(self, "matrices", mats)
        elif self.kind == "random_correlation":
            if self.count < 1:
                raise DataError("random_correlation sigma source needs count >= 1")
        else:
            raise DataError(f"unknown sigma source kind {self.kind!r}")

    @classmethod
    def fixed(cls, matrix):
        return cls(kind="fixed", matrix=matrix)

    @classmethod
    def sequence(cls, matrices):
        return cls(kind="sequence", matrices=tuple(matrices))

    @classmethod
    def random_correlation(cls, count):
        return cls(kind="random_correlation", count=count)


@dataclass(frozen=True)
class TestPlan:
    """One test to run: a statistic family plus its calibration mode."""

    __test__ = False  # statistical test plan, not a pytest collection target

    family: str
    calibration: str = "sup"
    prior: Optional[calibrate.PriorSpec] = None
    weight_samples: int = 200_000

    def __post_init__(self):
        if self.family not in stats.FAMILIES:
            raise DataError(f"unknown family {self.family!r}")
        if self.calibration not in ("sup", "exact", "bayes"):
            raise DataError(f"unknown calibration {self.calibration!r}")
        if self.calibration == "bayes" and self.prior is None:
            raise DataError("bayes calibration requires a prior")

    @property
    def label(self):
        return f"{self.family}/{self.calibration}"


@dataclass(frozen=True)
class ExperimentConfig:
    """Frame for a power or size experiment."""

    p: int
    n: int
    alpha: float
    replications: int
    seed: int
    sigma_source: SigmaSource
    theta_grid: tuple
    tests: tuple
    workers: int = 1
    chunk: int = DEFAULT_SIM_CHUNK

    def __post_init__(self):
        if self.n <= self.p:
            raise DataError(f"need n > p, got n={self.n}, p={self.p}")
        if not 0.0 < self.alpha < 1.0:
            raise DataError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.replications < 1:
            raise DataError("replications must be >= 1")
        if self.seed is None:
            raise DataError("a seed is mandatory")
        thetas = tuple(np.asarray(t, dtype=float) for t in self.theta_grid)
        for t in thetas:
            if t.shape != (self.p,):
                raise DataError(f"theta {t} has wrong dimension")
        object.__setattr__(self, "theta_grid", thetas)
        plans = tuple(self.tests)
        if not plans:
            raise DataError("at least one test plan is required")
        object.__setattr__(self, "tests", plans)
        orthant_plans = [
            t for t in plans if t.family in (LRT_ORTHANT, UIT_ORTHANT, FUIT)
        ]
        halfspace_plans = [
            t for t in plans if t.family in (LRT_HALFSPACE, UIT_HALFSPACE)
        ]
        for t in thetas:
            if orthant_plans and np.any(t < 0.0):
                raise DataError(
                    f"theta {t.tolist()} lies outside the positive orthant"
                )
            if halfspace_plans and t[-1] < 0.0:
                raise DataError(f"theta {t.tolist()} lies outside the halfspace")


@dataclass(frozen=True)
class PowerRow:
    theta: tuple
    sigma_id: str
    family: str
    calibration: str
    rejection_rate: float
    mc_std_error: float
    replications: int


@dataclass
class PowerTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "rows": [
                {
                    "theta": list(r.theta),
                    "sigma_id": r.sigma_id,
                    "family": r.family,
                    "calibration": r.calibration,
                    "rejection_rate": r.rejection_rate,
                    "mc_std_error": r.mc_std_error,
                    "replications": r.replications,
                }
                for r in self.rows
            ],
        }

    def lookup(self, theta=None, family=None, sigma_id=None):
        out = []
        for r in self.rows:
            if theta is not None and tuple(r.theta) != tuple(theta):
                continue
            if family is not None and r.family != family:
                continue
            if sigma_id is not None and r.sigma_id != sigma_id:
                continue
            out.append(r)
        return out


def random_correlation_matrix(rng, p, df=None):
    """Random correlation matrix from a normalized Wishart draw."""
    df = df if df is not None else p + 2
    g = rng.standard_normal((df, p))
    w = g.T @ g
    d = 1.0 / np.sqrt(np.diag(w))
    return w * np.outer(d, d)


def resolve_sigmas(source, p, seed):
    """Materialize a sigma source into labeled positive definite matrices."""
    if source.kind == "fixed":
        mats = [np.asarray(source.matrix)]
    elif source.kind == "sequence":
        mats = [np.asarray(m) for m in source.matrices]
    else:
        rng = substream(seed, (12, 0))
        mats = [random_correlation_matrix(rng, p) for _ in range(source.count)]
    for m in mats:
        if m.shape != (p, p):
            raise DataError(f"sigma has shape {m.shape}, expected ({p}, {p})")
    return [(f"sigma{i}", m) for i, m in enumerate(mats)]


def _resolve_critical(plan, alpha, n, p, seed):
    """Critical value on the calibration scale for one test plan."""
    if plan.family == FUIT:
        return student_t_upper_quantile(n - 1, alpha / p)
    if plan.calibration == "sup":
        return calibrate.sup_critical_value(plan.family, alpha, n, p).value
    if plan.calibration == "exact":
        return calibrate.exact_halfspace_critical_value(plan.family, alpha, n, p).value
    weights = calibrate.bayes_weights_b1(
        n, p, plan.prior, mc_samples=plan.weight_samples, seed=seed
    )
    return calibrate.bayes_critical_value(plan.family, alpha, n, p, weights).value


def _needs(plans):
    fams = {t.family for t in plans}
    return {
        "orthant": bool(fams & {LRT_ORTHANT, UIT_ORTHANT}),
        "halfspace": bool(fams & {LRT_HALFSPACE, UIT_HALFSPACE, T2}),
        "fuit": FUIT in fams,
    }


def _batch_values(means, covs, n, needs):
    """Calibration-scale statistic values per draw for the requested groups."""
    nm1 = n - 1
    values = {}
    if needs["orthant"]:
        _, q_proj, q_res = batch_orthant(means, covs, n)
        values[UIT_ORTHANT] = q_proj / nm1
        values[LRT_ORTHANT] = q_proj / (nm1 + q_res)
    if needs["halfspace"]:
        q_proj_h, q_res_h = batch_halfspace(means, covs, n)
        values[UIT_HALFSPACE] = q_proj_h / nm1
        values[LRT_HALFSPACE] = q_proj_h / (nm1 + q_res_h)
        values[T2] = (q_proj_h + q_res_h) / nm1
    if needs["fuit"]:
        values[FUIT] = batch_fuit_max_t(means, covs, n)
    return values


def simulate_power(cfg):
    """Rejection rates for every (theta, sigma, test plan) cell.

    All test plans are evaluated on the same draws within a cell, so
    cross-family comparisons are paired.  Deterministic given
    ``(cfg, seed)`` and independent of ``workers``.
    """
    sigmas = resolve_sigmas(cfg.sigma_source, cfg.p, cfg.seed)
    criticals = {
        plan.label: _resolve_critical(plan, cfg.alpha, cfg.n, cfg.p, cfg.seed)
        for plan in cfg.tests
    }
    needs = _needs(cfg.tests)
    sizes = chunk_sizes(cfg.replications, cfg.chunk)
    rows = []
    for is_, (sigma_id, sigma) in enumerate(sigmas):
        chol = np.linalg.cholesky(sigma)
        for it, theta in enumerate(cfg.theta_grid):

            def worker(j, _is=is_, _it=it, _theta=theta, _chol=chol, _sizes=sizes):
                rng = substream(cfg.seed, (_STREAM_POWER, _is, _it, j))
                means, covs = sample_mean_cov(rng, _theta, _chol, cfg.n, _sizes[j])
                values = _batch_values(means, covs, cfg.n, needs)
                return {
                    plan.label: int(np.sum(values[plan.family] >= criticals[plan.label]))
                    for plan in cfg.tests
                }

            counts = run_chunks(worker, len(sizes), cfg.workers)
            for plan in cfg.tests:
                total = sum(c[plan.label] for c in counts)
                rate = total / cfg.replications
                rows.append(
                    PowerRow(
                        theta=tuple(float(v) for v in theta),
                        sigma_id=sigma_id,
                        family=plan.family,
                        calibration=plan.calibration,
                        rejection_rate=rate,
                        mc_std_error=float(
                            np.sqrt(rate * (1.0 - rate) / cfg.replications)
                        ),
                        replications=cfg.replications,
                    )
                )
    return PowerTable(
        rows=rows,
        metadata={
            "p": cfg.p,
            "n": cfg.n,
            "alpha": cfg.alpha,
            "replications": cfg.replications,
            "seed": cfg.seed,
            "tests": [plan.label for plan in cfg.tests],
            "sigma_ids": [sid for sid, _ in sigmas],
            "critical_values": {k: float(v) for k, v in criticals.items()},
        },
    )


@dataclass(frozen=True)
class DominationRow:
    theta: tuple
    sigma_id: str
    pair: str
    power_orthant: float
    power_halfspace: float
    difference: float
    difference_std_error: float
    implication_violations: int


@dataclass
class DominationReport:
    rows: list
    metadata: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "flagged": list(self.flagged),
            "rows": [
                {
                    "theta": list(r.theta),
                    "sigma_id": r.sigma_id,
                    "pair": r.pair,
                    "power_orthant": r.power_orthant,
                    "power_halfspace": r.power_halfspace,
                    "difference": r.difference,
                    "difference_std_error": r.difference_std_error,
                    "implication_violations": r.implication_violations,
                }
                for r in self.rows
            ],
        }


_PAIRS = {
    "UIT": (UIT_ORTHANT, UIT_HALFSPACE),
    "LRT": (LRT_ORTHANT, LRT_HALFSPACE),
}


def domination_experiment(cfg, pairs=("UIT", "LRT")):
    """Paired-draw comparison of orthant tests against halfspace tests.

    Both members of each pair use the same supremum-calibrated critical
    value, and the same simulated draws feed both statistics (common random
    numbers).  For the union-intersection pair, a per-draw implication
    (orthant rejection implies halfspace rejection) is asserted; it holds
    pointwise because the halfspace statistic dominates.
    """
    for theta in cfg.theta_grid:
        if np.any(np.asarray(theta) < 0.0):
            raise DataError("domination grid must lie in the positive orthant")
    sigmas = resolve_sigmas(cfg.sigma_source, cfg.p, cfg.seed)
    criticals = {}
    for name in pairs:
        fam_o, fam_h = _PAIRS[name]
        criticals[name] = calibrate.sup_critical_value(
            fam_o, cfg.alpha, cfg.n, cfg.p
        ).value
    sizes = chunk_sizes(cfg.replications, cfg.chunk)
    needs = {"orthant": True, "halfspace": True, "fuit": False}
    rows = []
    flagged = []
    for is_, (sigma_id, sigma) in enumerate(sigmas):
        chol = np.linalg.cholesky(sigma)
        for it, theta in enumerate(cfg.theta_grid):

            def worker(j, _is=is_, _it=it, _theta=theta, _chol=chol, _sizes=sizes):
                rng = substream(cfg.seed, (_STREAM_POWER, _is, _it, j))
                means, covs = sample_mean_cov(rng, _theta, _chol, cfg.n, _sizes[j])
                values = _batch_values(means, covs, cfg.n, needs)
                out = {}
                for name in pairs:
                    fam_o, fam_h = _PAIRS[name]
                    c = criticals[name]
                    rej_o = values[fam_o] >= c
                    rej_h = values[fam_h] >= c
                    viol = int(np.sum(rej_o & ~rej_h))
                    out[name] = (
                        int(rej_o.sum()),
                        int(rej_h.sum()),
                        int(np.sum(rej_h & ~rej_o)),
                        viol,
                    )
                return out

            counts = run_chunks(worker, len(sizes), cfg.workers)
            for name in pairs:
                no = sum(c[name][0] for c in counts)
                nh = sum(c[name][1] for c in counts)
                gain = sum(c[name][2] for c in counts)
                viol = sum(c[name][3] for c in counts)
                if viol:
                    raise ConeTestError(
                        f"per-draw domination violated {viol} times for the {name} pair"
                    )
                reps = cfg.replications
                p_o, p_h = no / reps, nh / reps
                diff = p_h - p_o
                # Paired difference: d in {0, +1} here since violations are zero.
                var_d = gain / reps - (gain / reps) ** 2
                d_se = float(np.sqrt(var_d / reps))
                row = DominationRow(
                    theta=tuple(float(v) for v in theta),
                    sigma_id=sigma_id,
                    pair=name,
                    power_orthant=p_o,
                    power_halfspace=p_h,
                    difference=diff,
                    difference_std_error=d_se,
                    implication_violations=viol,
                )
                rows.append(row)
                if diff < -3.0 * max(d_se, 1e-12):
                    flagged.append(
                        {"theta": list(row.theta), "pair": name, "difference": diff}
                    )
    return DominationReport(
        rows=rows,
        flagged=flagged,
        metadata={
            "p": cfg.p,
            "n": cfg.n,
            "alpha": cfg.alpha,
            "replications": cfg.replications,
            "seed": cfg.seed,
            "critical_values": {k: float(v) for k, v in criticals.items()},
            "pairing": "common random numbers",
        },
    )


@dataclass
class ConvexityReport:
    region: str
    pairs_tested: int
    violations: int
    witness: Optional[dict]
    attempts: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "region": self.region,
            "pairs_tested": self.pairs_tested,
            "violations": self.violations,
            "witness": self.witness,
            "attempts": self.attempts,
            "metadata": self.metadata,
        }


UIT_ORTHANT_ACCEPTANCE = "UIT_orthant_acceptance"
UIT_HALFSPACE_ACCEPTANCE = "UIT_halfspace_acceptance"
LRT_ORTHANT_ACCEPTANCE = "LRT_orthant_acceptance"

_WITNESS_CAP = 1_000_000


def _member_means(family, c, n, p, cov, rng, count):
    """Means inside the acceptance slice for a fixed covariance matrix."""
    needs = {
        "orthant": family == UIT_ORTHANT,
        "halfspace": family == UIT_HALFSPACE,
        "fuit": False,
    }
    pool = []
    got = 0
    for scale in (0.6, 1.2, 2.5, 5.0):
        means = (rng.standard_normal((count, p)) @ np.linalg.cholesky(cov).T) * (
            scale / np.sqrt(n)
        )
        values = _batch_values(means, cov, n, needs)[family]
        keep = values <= c
        pool.append(means[keep])
        got += int(keep.sum())
        if got >= count:
            break
    return np.concatenate(pool, axis=0)


def _lrt_ratio_p2_diag(x, n, diag):
    """Calibration-scale likelihood-ratio statistic at p=2 for fixed diagonal S."""
    q = float(n)
    nm1 = n - 1.0
    x0, x1 = float(x[0]), float(x[1])
    v0, v1 = float(diag[0]), float(diag[1])
    if x0 > 0 and x1 > 0:
        return q * (x0 * x0 / v0 + x1 * x1 / v1) / nm1
    if x0 > 0 and x1 <= 0:
        return (q * x0 * x0 / v0) / (nm1 + q * x1 * x1 / v1)
    if x1 > 0 and x0 <= 0:
        return (q * x1 * x1 / v1) / (nm1 + q * x0 * x0 / v0)
    return 0.0


def _search_lrt_witness(c, n, seed):
    """Find member means whose midpoint leaves the acceptance region.

    Pairs one boundary-adjacent member of the all-positive branch with one
    deep member of a single-coordinate branch; the acceptance set flares
    outward along the branch boundary, so midpoints overshoot.
    """
    diag = np.ones(2)
    rng = substream(seed, (_STREAM_CONVEXITY, 10_001))
    attempts = 0
    while attempts < _WITNESS_CAP:
        attempts += 1
        eps = rng.uniform(1e-3, 0.05)
        phi = rng.uniform(0.01, 0.5)
        t = rng.uniform(1.0, 6.0)
        r = np.sqrt(c * (1.0 - eps) * (n - 1.0) / n)
        a_pt = np.array([r * np.cos(phi), r * np.sin(phi)])
        b0 = np.sqrt(c * (1.0 - eps) * ((n - 1.0) + n * t * t) / n)
        b_pt = np.array([b0, -t])
        if _lrt_ratio_p2_diag(a_pt, n, diag) > c or _lrt_ratio_p2_diag(b_pt, n, diag) > c:
            continue
        mid = 0.5 * (a_pt + b_pt)
        val = _lrt_ratio_p2_diag(mid, n, diag)
        if val > c * (1.0 + 1e-9):
            return {
                "member_a": a_pt.tolist(),
                "member_b": b_pt.tolist(),
                "midpoint": mid.tolist(),
                "midpoint_statistic": val,
                "critical": c,
                "fixed_diagonal_cov": diag.tolist(),
            }, attempts
    raise ConeTestError(
        f"no nonconvexity witness found within {_WITNESS_CAP} attempts"
    )


def convexity_probe(region, trials, seed, n, p, alpha=0.05):
    """Midpoint convexity probe of an acceptance region.

    The acceptance regions are convex slice-wise: for every fixed covariance
    matrix the set of accepted mean vectors is convex (the statistic is not
    jointly convex in the mean and the covariance, so mixing covariances can
    leave the region).  The probe therefore draws a covariance per block,
    samples accepted means under it, and tests mean midpoints; the
    union-intersection regions must show zero violations.  The
    likelihood-ratio probe runs at ``p = 2`` with a fixed diagonal
    covariance and must *find* a witness pair whose midpoint falls outside;
    the witness is returned in the report.
    """
    if region == LRT_ORTHANT_ACCEPTANCE:
        if p != 2:
            raise DataError("the likelihood-ratio witness search runs at p = 2")
        c = calibrate.sup_critical_value(LRT_ORTHANT, alpha, n, p).value
        witness, attempts = _search_lrt_witness(c, n, seed)
        return ConvexityReport(
            region=region,
            pairs_tested=0,
            violations=0,
            witness=witness,
            attempts=attempts,
            metadata={"n": n, "p": p, "alpha": alpha, "critical": c, "seed": seed},
        )
    if region not in (UIT_ORTHANT_ACCEPTANCE, UIT_HALFSPACE_ACCEPTANCE):
        raise DataError(f"unknown region {region!r}")
    family = UIT_ORTHANT if region == UIT_ORTHANT_ACCEPTANCE else UIT_HALFSPACE
    c = calibrate.sup_critical_value(family, alpha, n, p).value
    needs = {
        "orthant": family == UIT_ORTHANT,
        "halfspace": family == UIT_HALFSPACE,
        "fuit": False,
    }
    violations = 0
    tested = 0
    block_pairs = 10_000
    worst = None
    covariances = 0
    while tested < trials:
        rng = substream(seed, (_STREAM_CONVEXITY, covariances))
        cov = random_correlation_matrix(rng, p) * rng.uniform(0.3, 3.0)
        covariances += 1
        means = _member_means(family, c, n, p, cov, rng, 20_000)
        m = means.shape[0]
        if m < 2:
            continue
        block = min(trials - tested, block_pairs)
        i = rng.integers(0, m, size=block)
        j = rng.integers(0, m, size=block)
        mid = 0.5 * (means[i] + means[j])
        values = _batch_values(mid, cov, n, needs)[family]
        bad = values > c * (1.0 + 1e-9)
        violations += int(bad.sum())
        if bad.any() and worst is None:
            k = int(np.flatnonzero(bad)[0])
            worst = {
                "midpoint_statistic": float(values[k]),
                "critical": float(c),
            }
        tested += block
    return ConvexityReport(
        region=region,
        pairs_tested=tested,
        violations=violations,
        witness=worst,
        attempts=0,
        metadata={
            "n": n,
            "p": p,
            "alpha": alpha,
            "critical": float(c),
            "covariances_probed": covariances,
            "seed": seed,
        },
    )


@dataclass
class SimilarityReport:
    family: str
    calibration: str
    alpha: float
    critical: float
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "family": self.family,
            "calibration": self.calibration,
            "alpha": self.alpha,
            "critical": self.critical,
            "rows": list(self.rows),
            "metadata": self.metadata,
        }


def similarity_probe(family, calibration, sigma_list, cfg, prior=None):
    """Null rejection rates across covariance matrices (theta = 0).

    Halfspace families calibrated by the supremum are exactly similar, so
    their rates agree across covariances; orthant families stay below the
    level.  With ``calibration="bayes"`` the probe simulates the compound
    null (covariance drawn from the prior) and reports the aggregate rate,
    which matches the level by construction.
    """
    if calibration == "bayes":
        if prior is None:
            raise CalibrationError("bayes similarity probe requires a prior")
        weights = calibrate.bayes_weights_b1(
            cfg.n, cfg.p, prior, mc_samples=200_000, seed=cfg.seed
        )
        critical = calibrate.bayes_critical_value(
            family, cfg.alpha, cfg.n, cfg.p, weights
        ).value
    elif calibration in ("sup", "exact"):
        critical = calibrate.sup_critical_value(family, cfg.alpha, cfg.n, cfg.p).value
    else:
        raise DataError(f"unknown calibration {calibration!r}")
    needs = _needs([TestPlan(family=family)])
    sizes = chunk_sizes(cfg.replications, cfg.chunk)
    rows = []
    if sigma_list:
        for is_, sigma in enumerate(sigma_list):
            sigma = check_positive_definite(sigma, f"sigma[{is_}]")
            chol = np.linalg.cholesky(sigma)

            def worker(j, _chol=chol, _cell=is_):
                rng = substream(cfg.seed, (_STREAM_SIMILARITY, _cell, j))
                means, covs = sample_mean_cov(rng, None, _chol, cfg.n, sizes[j])
                values = _batch_values(means, covs, cfg.n, needs)[family]
                return int(np.sum(values >= critical))

            total = sum(run_chunks(worker, len(sizes), cfg.workers))
            rate = total / cfg.replications
            rows.append(
                {
                    "sigma_id": f"sigma{is_}",
                    "rate": rate,
                    "std_error": float(np.sqrt(rate * (1 - rate) / cfg.replications)),
                }
            )
    if calibration == "bayes":

        def worker(j):
            rng = substream(cfg.seed, (_STREAM_SIMILARITY, 999, j))
            factors = sample_invwishart_chol(
                rng, np.asarray(prior.scale), prior.df, sizes[j]
            )
            means, covs = sample_mean_cov(rng, None, factors, cfg.n, sizes[j])
            values = _batch_values(means, covs, cfg.n, needs)[family]
            return int(np.sum(values >= critical))

        total = sum(run_chunks(worker, len(sizes), cfg.workers))
        rate = total / cfg.replications
        rows.append(
            {
                "sigma_id": "prior_draws",
                "rate": rate,
                "std_error": float(np.sqrt(rate * (1 - rate) / cfg.replications)),
            }
        )
    return SimilarityReport(
        family=family,
        calibration=calibration,
        alpha=cfg.alpha,
        critical=float(critical),
        rows=rows,
        metadata={"n": cfg.n, "p": cfg.p, "seed": cfg.seed, "replications": cfg.replications},
    )
