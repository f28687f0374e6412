import numpy as np
import pytest
from scipy.stats import t as scipy_t

from conetest import (
    CalibrationError,
    MixtureWeights,
    PriorSpec,
    bayes_critical_value,
    bayes_weights_b1,
    chi_bar_weights,
    exact_halfspace_critical_value,
    g_ratio_tail,
    marginal_logdensity,
    null_tail,
    p_value,
    sup_critical_value,
    summarize,
)
from conetest import stats
from conetest._batch import sample_mean_cov, substream
from conetest.calibrate import CLOSED_FORM, MONTE_CARLO

from conftest import random_correlation
from test_sample import make_summary


def corr2(rho):
    return np.array([[1.0, rho], [rho, 1.0]])


class TestChiBarWeights:
    def test_identity_binomial(self):
        from math import comb

        for p in (1, 2, 3):
            w = chi_bar_weights(np.eye(p))
            expect = [comb(p, k) * 0.5**p for k in range(p + 1)]
            assert np.allclose(w.weights, expect, atol=1e-12)
            assert w.method == CLOSED_FORM

    def test_rho_half_closed_form(self):
        w = chi_bar_weights(corr2(0.5))
        assert w.weights[2] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert w.weights[0] == pytest.approx(0.25 - np.arcsin(0.5) / (2 * np.pi))
        assert w.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_closed_form_matches_monte_carlo(self, rng):
        for p in (2, 3):
            sigma = random_correlation(rng, p)
            closed = chi_bar_weights(sigma)
            mc = chi_bar_weights(sigma, method=MONTE_CARLO, mc_samples=200_000, seed=5)
            for k in range(p + 1):
                se = max(mc.std_errors[k], 1e-6)
                assert abs(closed.weights[k] - mc.weights[k]) <= 4 * se

    def test_scale_invariance(self, rng):
        sigma = random_correlation(rng, 3)
        d = np.diag([0.3, 2.0, 11.0])
        w1 = chi_bar_weights(sigma)
        w2 = chi_bar_weights(d @ sigma @ d)
        assert np.allclose(w1.weights, w2.weights, atol=1e-12)

    def test_independent_seeds_agree(self, rng):
        sigma = random_correlation(rng, 4)
        w1 = chi_bar_weights(sigma, mc_samples=1_000_000, seed=1)
        w2 = chi_bar_weights(sigma, mc_samples=1_000_000, seed=2)
        joint_se = np.sqrt(w1.std_errors**2 + w2.std_errors**2)
        assert np.all(np.abs(w1.weights - w2.weights) <= 3 * np.maximum(joint_se, 1e-9))
        assert w1.weights.sum() == pytest.approx(1.0, abs=1e-3)

    def test_worker_count_does_not_change_result(self, rng):
        sigma = random_correlation(rng, 4)
        w1 = chi_bar_weights(sigma, mc_samples=60_000, seed=3, workers=1)
        w2 = chi_bar_weights(sigma, mc_samples=60_000, seed=3, workers=4)
        assert np.array_equal(w1.weights, w2.weights)

    def test_seed_required_for_monte_carlo(self):
        with pytest.raises(CalibrationError):
            chi_bar_weights(np.eye(4))


class TestNullTail:
    def test_statistic_zero_includes_atom(self):
        assert null_tail(stats.UIT_HALFSPACE, 0.0, 20, 3) == 1.0
        assert null_tail(stats.LRT_HALFSPACE, -1.0, 20, 3) == 1.0

    def test_univariate_halfspace_is_half_tail(self):
        n = 15
        for c in (0.05, 0.3, 1.0):
            expect = 0.5 * g_ratio_tail(1, n - 1, c)
            assert null_tail(stats.LRT_HALFSPACE, c, n, 1) == pytest.approx(expect)

    def test_orthant_requires_weights(self):
        with pytest.raises(CalibrationError):
            null_tail(stats.UIT_ORTHANT, 0.5, 20, 3)

    def test_orthant_tail_matches_simulation(self):
        # Full pipeline check at moderate accuracy; the acceptance suite
        # repeats this at scale.
        n, p = 15, 3
        c = 2.0 / (n - 1)
        w = chi_bar_weights(np.eye(p))
        tail = null_tail(stats.UIT_ORTHANT, c, n, p, weights=w)
        from conetest._batch import batch_orthant

        rng = substream(77, 0)
        means, covs = sample_mean_cov(rng, None, np.eye(p), n, 40_000)
        _, q_proj, _ = batch_orthant(means, covs, n)
        emp = float(np.mean(q_proj / (n - 1) >= c))
        se = np.sqrt(emp * (1 - emp) / 40_000)
        assert abs(tail - emp) <= 3.5 * se


class TestTailProperties:
    def test_null_tail_nonincreasing_in_c(self):
        w = chi_bar_weights(np.eye(3))
        grid = np.linspace(0.01, 3.0, 12)
        for family, kwargs in (
            (stats.UIT_ORTHANT, {"weights": w}),
            (stats.LRT_ORTHANT, {"weights": w}),
            (stats.UIT_HALFSPACE, {}),
            (stats.LRT_HALFSPACE, {}),
        ):
            vals = [null_tail(family, c, 20, 3, **kwargs) for c in grid]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_sup_calibration_conservative_for_identity(self):
        # At the supremum-calibrated critical value the identity-covariance
        # mixture tail sits strictly below the level.
        for p, n in ((2, 15), (3, 20)):
            w = chi_bar_weights(np.eye(p))
            cv = sup_critical_value(stats.UIT_ORTHANT, 0.05, n, p)
            tail = null_tail(stats.UIT_ORTHANT, cv.value, n, p, weights=w)
            assert tail < 0.05


class TestFuitUitUnivariateConsistency:
    def test_rejections_agree_on_draws(self, rng):
        # At p = 1 the Bonferroni test and the halfspace projection test at
        # its own critical value are the same test.
        from conetest import fuit, uit_halfspace
        from conetest.stats import calibration_scale

        n, alpha = 12, 0.05
        cv = sup_critical_value(stats.UIT_HALFSPACE, alpha, n, 1).value
        for _ in range(1000):
            data = rng.standard_normal((n, 1)) + rng.normal(0, 0.4)
            s = summarize(data)
            rep = fuit(s, alpha)
            value = calibration_scale(uit_halfspace(s))
            assert rep.reject == bool(value >= cv)


class TestSupCriticalValue:
    def test_univariate_matches_t_quantile(self):
        n, alpha = 20, 0.05
        cv = sup_critical_value(stats.LRT_HALFSPACE, alpha, n, 1)
        t_q = scipy_t.ppf(1 - alpha, n - 1)
        assert cv.value == pytest.approx(t_q**2 / (n - 1), abs=1e-6)

    def test_round_trip(self):
        for family in (stats.LRT_HALFSPACE, stats.UIT_HALFSPACE):
            cv = sup_critical_value(family, 0.05, 20, 3)
            assert null_tail(family, cv.value, 20, 3) == pytest.approx(0.05, abs=1e-6)

    def test_monotone_in_alpha(self):
        c01 = sup_critical_value(stats.UIT_ORTHANT, 0.01, 20, 3).value
        c10 = sup_critical_value(stats.UIT_ORTHANT, 0.10, 20, 3).value
        assert c01 > c10

    def test_unattainable_alpha(self):
        with pytest.raises(CalibrationError):
            sup_critical_value(stats.LRT_HALFSPACE, 0.6, 20, 1)

    def test_exact_label_for_halfspace(self):
        cv = exact_halfspace_critical_value(stats.UIT_HALFSPACE, 0.05, 20, 3)
        assert cv.calibration == "exact_halfspace"
        with pytest.raises(CalibrationError):
            exact_halfspace_critical_value(stats.UIT_ORTHANT, 0.05, 20, 3)


class TestBayesWeights:
    def test_univariate_symmetry(self):
        prior = PriorSpec.inverse_wishart(np.eye(1), 3.0)
        w = bayes_weights_b1(10, 1, prior, mc_samples=60_000, seed=4)
        assert w.weights.sum() == pytest.approx(1.0, abs=1e-3)
        assert abs(w.weights[0] - 0.5) <= 4 * w.std_errors[0]

    def test_large_df_approaches_identity_weights(self):
        p, n = 2, 20
        prior = PriorSpec.inverse_wishart(np.eye(p), 250.0)
        w = bayes_weights_b1(n, p, prior, mc_samples=120_000, seed=9)
        expect = [0.25, 0.5, 0.25]
        for k in range(p + 1):
            assert abs(w.weights[k] - expect[k]) <= 5 * max(w.std_errors[k], 1e-6)

    def test_two_seeds_agree(self):
        p, n = 2, 15
        prior = PriorSpec.inverse_wishart(np.eye(p), 6.0)
        w1 = bayes_weights_b1(n, p, prior, mc_samples=80_000, seed=11)
        w2 = bayes_weights_b1(n, p, prior, mc_samples=80_000, seed=12)
        joint = np.sqrt(w1.std_errors**2 + w2.std_errors**2)
        assert np.all(np.abs(w1.weights - w2.weights) <= 3 * np.maximum(joint, 1e-9))
        assert np.all(w1.weights[1:] > 0)

    def test_improper_prior_rejected(self):
        with pytest.raises(CalibrationError):
            bayes_weights_b1(10, 2, PriorSpec.haar(), mc_samples=100, seed=0)

    def test_df_bound_enforced(self):
        from conetest import DataError

        with pytest.raises(DataError):
            PriorSpec.inverse_wishart(np.eye(3), 1.5)


class TestBayesCriticalValue:
    def test_degenerate_weights_single_component(self):
        p, n, alpha = 3, 20, 0.05
        w = MixtureWeights(
            weights=np.array([0.0, 0.0, 0.0, 1.0]),
            std_errors=np.zeros(4),
            method=CLOSED_FORM,
            mc_samples=0,
        )
        cv = bayes_critical_value(stats.LRT_ORTHANT, alpha, n, p, w)
        assert g_ratio_tail(p, n - p, cv.value) == pytest.approx(alpha, abs=1e-6)

    def test_round_trip(self):
        p, n = 2, 20
        prior = PriorSpec.inverse_wishart(np.eye(p), 6.0)
        w = bayes_weights_b1(n, p, prior, mc_samples=50_000, seed=21)
        for family in (stats.LRT_ORTHANT, stats.UIT_ORTHANT):
            cv = bayes_critical_value(family, 0.05, n, p, w)
            assert null_tail(family, cv.value, n, p, weights=w) == pytest.approx(
                0.05, abs=1e-6
            )

    def test_bayes_below_sup(self):
        p, n, alpha = 2, 20, 0.05
        prior = PriorSpec.inverse_wishart(np.eye(p), 6.0)
        w = bayes_weights_b1(n, p, prior, mc_samples=50_000, seed=22)
        bayes = bayes_critical_value(stats.UIT_ORTHANT, alpha, n, p, w).value
        sup = sup_critical_value(stats.UIT_ORTHANT, alpha, n, p).value
        assert bayes < sup


class TestMarginalLogDensity:
    def test_maximized_at_sample_mean(self, rng):
        s = summarize(rng.standard_normal((12, 2)) + 0.5)
        prior = PriorSpec.inverse_wishart(0.01 * np.eye(2), 4.0)
        at_mean = marginal_logdensity(s, s.mean, prior)
        for _ in range(20):
            other = s.mean + rng.standard_normal(2)
            assert marginal_logdensity(s, other, prior) <= at_mean + 1e-12

    def test_univariate_haar_closed_form(self, rng):
        data = rng.standard_normal((9, 1)) + 0.2
        s = summarize(data)
        got = marginal_logdensity(s, np.zeros(1), PriorSpec.haar())
        n = s.n
        s2 = float(s.cov[0, 0])
        xbar = float(s.mean[0])
        expect = 0.5 * (n - 3) * np.log(s2) - 0.5 * n * np.log(
            (n - 1) * s2 + n * xbar**2
        )
        assert got == pytest.approx(expect, rel=1e-12)

    def test_monotone_in_w_determinant(self, rng):
        s = summarize(rng.standard_normal((14, 2)) + 0.3)
        prior = PriorSpec.inverse_wishart(1e-8 * np.eye(2), 4.0)
        thetas = [s.mean + t * np.array([1.0, -0.4]) for t in (0.1, 0.5, 1.5)]

        def det_w(theta):
            diff = s.mean - theta
            return np.linalg.det(s.cov + s.n * np.outer(diff, diff))

        pairs = [(det_w(t), marginal_logdensity(s, t, prior)) for t in thetas]
        for (d1, v1), (d2, v2) in zip(pairs, pairs[1:]):
            assert (d1 - d2) * (v2 - v1) >= 0  # smaller |W| means larger density


class TestPValue:
    def test_zero_statistic_reports_one(self):
        s = make_summary([-1.0, -1.0], np.eye(2), n=10)
        from conetest import uit_orthant

        out = uit_orthant(s)
        assert out.statistic == 0.0
        assert p_value(out, "sup_conservative") == 1.0

    def test_inversion_consistency(self, rng):
        from conetest.stats import TestOutcome

        n, p, alpha = 20, 3, 0.05
        cv = sup_critical_value(stats.UIT_HALFSPACE, alpha, n, p)
        stat = cv.value * (n - 1)
        out = TestOutcome(
            statistic=stat,
            family=stats.UIT_HALFSPACE,
            active_subset=None,
            n=n,
            p=p,
            sq_norm_projection=stat,
            sq_norm_residual=0.0,
        )
        assert p_value(out, "exact_halfspace") == pytest.approx(alpha, abs=1e-6)

    def test_weighted_below_conservative(self, rng):
        from conetest import uit_orthant

        w = chi_bar_weights(np.eye(3))
        count = 0
        for _ in range(100):
            s = summarize(rng.standard_normal((20, 3)) + rng.uniform(0, 0.4, 3))
            out = uit_orthant(s)
            if out.statistic == 0.0:
                continue
            pw = p_value(out, "weighted", weights=w)
            pc = p_value(out, "sup_conservative")
            assert pw <= pc + 1e-12
            count += 1
        assert count > 50

    def test_incompatible_mode_raises(self, rng):
        from conetest import uit_orthant

        s = summarize(rng.standard_normal((10, 2)) + 1.0)
        out = uit_orthant(s)
        with pytest.raises(CalibrationError):
            p_value(out, "exact_halfspace")
        with pytest.raises(CalibrationError):
            p_value(out, "weighted")
