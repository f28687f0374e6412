import numpy as np
import pytest

from conetest import (
    CoordinateHalfspace,
    DataError,
    MetricError,
    Orthant,
    Polyhedral,
    ReductionError,
    dual_cone_contains,
    metric_sq_norm,
    project,
    reduce_model,
)

from conftest import kkt_enumeration_projection, random_pd_matrix


class TestOrthantProjection:
    def test_interior_point_fixed(self):
        proj = project([1.0, 2.0], np.eye(2), Orthant(2))
        assert np.allclose(proj.point, [1.0, 2.0])
        assert proj.sq_norm_projection == pytest.approx(5.0)
        assert proj.sq_norm_residual == pytest.approx(0.0)
        assert proj.active_subset.a == (0, 1)

    def test_polar_point_projects_to_origin(self):
        proj = project([-1.0, -3.0], np.eye(2), Orthant(2))
        assert np.allclose(proj.point, 0.0)
        assert proj.sq_norm_projection == pytest.approx(0.0)
        assert proj.active_subset.a == ()

    @pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
    def test_three_routes_agree(self, rng, p):
        for _ in range(60):
            x = rng.standard_normal(p) * rng.uniform(0.5, 3.0)
            m = random_pd_matrix(rng, p)
            proj = project(x, m, Orthant(p), verify=True)  # subset formula cross-check
            theta, obj = kkt_enumeration_projection(x, m)
            assert np.allclose(proj.point, theta, rtol=1e-8, atol=1e-10)
            scale = max(1.0, proj.sq_norm_projection)
            brute_norm = float(theta @ np.linalg.solve(m, theta))
            assert abs(proj.sq_norm_projection - brute_norm) <= 1e-8 * scale
            assert obj == pytest.approx(proj.sq_norm_residual, rel=1e-8, abs=1e-10)

    def test_pythagoras_and_complementarity(self, rng):
        for _ in range(100):
            p = rng.integers(1, 6)
            x = rng.standard_normal(p)
            m = random_pd_matrix(rng, p)
            proj = project(x, m, Orthant(p))
            total = metric_sq_norm(x, m)
            assert total == pytest.approx(
                proj.sq_norm_projection + proj.sq_norm_residual, rel=1e-9, abs=1e-12
            )
            inner = proj.point @ np.linalg.solve(m, proj.residual)
            assert abs(inner) <= 1e-9 * max(1.0, total)

    def test_idempotent(self, rng):
        for _ in range(50):
            p = 4
            x = rng.standard_normal(p) * 2
            m = random_pd_matrix(rng, p)
            proj = project(x, m, Orthant(p))
            again = project(proj.point, m, Orthant(p))
            assert np.allclose(again.point, proj.point, atol=1e-9)

    def test_contraction(self, rng):
        for _ in range(100):
            p = 3
            x = rng.standard_normal(p)
            m = random_pd_matrix(rng, p)
            proj = project(x, m, Orthant(p))
            assert proj.sq_norm_projection <= metric_sq_norm(x, m) + 1e-12

    def test_non_pd_metric_raises(self):
        with pytest.raises(MetricError):
            project([1.0, 1.0], np.array([[1.0, 2.0], [2.0, 1.0]]), Orthant(2))


class TestHalfspaceProjection:
    def test_inside_halfspace(self, rng):
        m = random_pd_matrix(rng, 3)
        x = np.array([-1.0, 2.0, 0.5])
        proj = project(x, m, CoordinateHalfspace(3, 2))
        assert np.allclose(proj.point, x)
        assert proj.sq_norm_residual == 0.0

    def test_projects_to_boundary(self, rng):
        for _ in range(50):
            m = random_pd_matrix(rng, 3)
            x = rng.standard_normal(3)
            x[2] = -abs(x[2]) - 0.1
            proj = project(x, m, CoordinateHalfspace(3, 2))
            assert proj.point[2] == pytest.approx(0.0, abs=1e-14)
            # The boundary projection equals the subspace minimizer.
            theta, _ = kkt_enumeration_projection_hyperplane(x, m, 2)
            assert np.allclose(proj.point, theta, atol=1e-9)

    def test_orthant_dominated_by_halfspace(self, rng):
        # The orthant is contained in the halfspace, so its projection norm
        # is never larger.
        for _ in range(200):
            p = 3
            x = rng.standard_normal(p)
            m = random_pd_matrix(rng, p)
            q_orth = project(x, m, Orthant(p)).sq_norm_projection
            q_half = project(x, m, CoordinateHalfspace(p, p - 1)).sq_norm_projection
            assert q_orth <= q_half + 1e-9 * max(1.0, q_half)


def kkt_enumeration_projection_hyperplane(x, m, coord):
    """Minimize the metric distance subject to x[coord] = 0 (reference)."""
    p = len(x)
    rest = [i for i in range(p) if i != coord]
    theta = np.zeros(p)
    theta[rest] = x[rest] - m[np.ix_(rest, [coord])].ravel() * x[coord] / m[coord, coord]
    diff = x - theta
    return theta, float(diff @ np.linalg.solve(m, diff))


class TestPolyhedralProjection:
    def test_square_identity_matches_orthant(self, rng):
        p = 3
        for _ in range(30):
            x = rng.standard_normal(p)
            m = random_pd_matrix(rng, p)
            by_orthant = project(x, m, Orthant(p))
            by_poly = project(x, m, Polyhedral(np.eye(p)))
            assert np.allclose(by_poly.point, by_orthant.point, atol=1e-9)
            assert by_poly.sq_norm_projection == pytest.approx(
                by_orthant.sq_norm_projection, rel=1e-9, abs=1e-12
            )

    def test_square_general_constraints(self, rng):
        b = np.array([[1.0, -1.0], [0.0, 1.0]])
        cone = Polyhedral(b)
        for _ in range(50):
            x = rng.standard_normal(2) * 2
            m = random_pd_matrix(rng, 2)
            proj = project(x, m, cone)
            assert cone.contains(proj.point, tol=1e-9)
            # KKT: the metric residual lies in the dual cone and is
            # orthogonal to the projection.
            grad = np.linalg.solve(m, x - proj.point)
            assert dual_cone_contains(grad, cone) or np.allclose(grad, 0, atol=1e-9)
            assert abs(proj.point @ grad) <= 1e-8 * max(1.0, metric_sq_norm(x, m))

    def test_wide_constraints_match_sampled_minimum(self, rng):
        # One constraint in R^3: check against dense random feasible search.
        b = np.array([[1.0, 1.0, -0.5]])
        cone = Polyhedral(b)
        for _ in range(20):
            x = rng.standard_normal(3) * 2
            m = random_pd_matrix(rng, 3)
            proj = project(x, m, cone)
            assert cone.contains(proj.point, tol=1e-8)
            obj = (x - proj.point) @ np.linalg.solve(m, x - proj.point)
            # Random feasible candidates never beat the reported minimum.
            cand = rng.standard_normal((4000, 3)) * 2 + x
            feas = cand[(cand @ b[0]) >= 0.0]
            diffs = feas - x
            objs = np.einsum("ri,ri->r", diffs, np.linalg.solve(m, diffs.T).T)
            assert objs.min() >= obj - 1e-7

    def test_rank_deficient_rejected(self):
        with pytest.raises(ReductionError):
            Polyhedral(np.array([[1.0, 1.0], [2.0, 2.0]]))


class TestReduceModel:
    def test_identity_reduction(self, rng):
        data = rng.standard_normal((10, 3))
        reduced = reduce_model(np.eye(3), np.eye(3), data)
        assert np.allclose(reduced.data, data)
        assert np.allclose(reduced.cone.constraints, np.eye(3))

    def test_orthonormal_rows_simplify(self, rng):
        b1 = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        b2 = rng.standard_normal((2, 3))
        data = rng.standard_normal((8, 3))
        reduced = reduce_model(b1, b2, data)
        assert np.allclose(reduced.cone.constraints, b2 @ b1.T)

    def test_null_mean_preserved(self, rng):
        b1 = rng.standard_normal((2, 3))
        b2 = rng.standard_normal((2, 3))
        null_dirs = np.linalg.svd(b1)[2][2:]  # basis of the null space of b1
        mu = null_dirs.T @ rng.standard_normal(1)
        data = np.tile(mu.ravel(), (6, 1))
        reduced = reduce_model(b1, b2, data)
        assert np.allclose(reduced.data, data @ b1.T)
        assert np.allclose(reduced.data.mean(axis=0), 0.0, atol=1e-12)

    def test_linear_in_data(self, rng):
        b1 = rng.standard_normal((2, 4))
        b2 = rng.standard_normal((1, 4))
        data = rng.standard_normal((5, 4))
        r1 = reduce_model(b1, b2, data)
        r2 = reduce_model(b1, b2, 3.0 * data)
        assert np.allclose(3.0 * np.asarray(r1.data), r2.data)

    def test_rank_deficiency_named(self):
        b1 = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(ReductionError, match="b1"):
            reduce_model(b1, np.eye(2), np.zeros((4, 2)))


class TestDualCone:
    def test_orthant_dual_is_negative_orthant(self):
        assert dual_cone_contains([-1.0, -1.0], Orthant(2))
        assert not dual_cone_contains([-1.0, 1.0], Orthant(2))
        assert dual_cone_contains([0.0, 0.0], Orthant(2))

    def test_coordinate_halfspace_dual(self):
        cone = CoordinateHalfspace(3, 2)
        assert dual_cone_contains([0.0, 0.0, -2.0], cone)
        assert not dual_cone_contains([0.1, 0.0, -2.0], cone)
        assert not dual_cone_contains([0.0, 0.0, 0.5], cone)

    def test_sum_halfspace_dual_is_diagonal_ray(self, rng):
        cone = Polyhedral(np.ones((1, 4)))
        assert dual_cone_contains(-0.7 * np.ones(4), cone)
        for _ in range(20):
            w = rng.standard_normal(4)
            if np.allclose(w, w[0]):
                continue
            member = dual_cone_contains(w, cone)
            # Support oracle: maximize <w, x> over sampled cone points.
            pts = rng.standard_normal((5000, 4))
            pts = pts[pts.sum(axis=1) >= 0.0]
            support = (pts @ w).max()
            assert member == bool(support <= 1e-8)

    def test_unbounded_dual_ray(self):
        # Dual membership is scale invariant: a huge multiple stays inside.
        cone = Polyhedral(np.ones((1, 3)))
        w = -np.ones(3)
        assert dual_cone_contains(w, cone)
        assert dual_cone_contains(1e6 * w, cone)

    def test_metric_pairing(self, rng):
        m = random_pd_matrix(rng, 2)
        w = -m @ np.ones(2)  # M^{-1} w = -(1,1) lies in the plain dual
        assert dual_cone_contains(w, Orthant(2), metric=m)


class TestBoundednessProbe:
    def test_t2_acceptance_contains_no_ray(self, rng):
        # Quadratic-form acceptance region: scaling any nonzero member far
        # enough always exits, unlike the dual-cone set.
        m = random_pd_matrix(rng, 3)
        c = 7.0
        for _ in range(20):
            x = rng.standard_normal(3)
            x *= 0.9 * np.sqrt(c / metric_sq_norm(x, m))
            assert metric_sq_norm(x, m) <= c
            assert metric_sq_norm(1e6 * x, m) > c


def test_dimension_mismatch():
    with pytest.raises(DataError):
        project([1.0, 2.0, 3.0], np.eye(2), Orthant(2))
