import numpy as np
import pytest

import morsecert as mc
from morsecert.errors import DegenerateVector, NotPositiveDefinite

from conftest import random_point, random_sl, random_traceless_sym
from oracles import cartan_vector_scipy, wall_distance_opt


class TestCartanVector:
    def test_identical_points(self):
        p = mc.identity_point(3)
        assert np.allclose(mc.cartan_vector(p, p).entries, 0.0)

    def test_diagonal_case(self):
        p = mc.identity_point(3)
        q = mc.Point(np.diag([np.e**2, np.e**-1, np.e**-1]))
        assert np.allclose(mc.cartan_vector(p, q).entries, [2.0, -1.0, -1.0])

    def test_eigen_solver_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            p, q = random_point(rng, 3, 1.1), random_point(rng, 3, 1.1)
            got = mc.cartan_vector(p, q).entries
            assert np.max(np.abs(got - cartan_vector_scipy(p, q))) < 1e-8

    def test_norm_is_distance(self):
        rng = np.random.default_rng(11)
        p, q = random_point(rng, 4), random_point(rng, 4)
        assert mc.cartan_vector(p, q).norm() == pytest.approx(
            mc.riemannian_distance(p, q)
        )

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            mc.Point(np.diag([1.0, -1.0]))
        with pytest.raises(NotPositiveDefinite):
            mc.Point(np.diag([2.0, 1.0]))  # determinant 2

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            mc.CartanVector(np.array([0.0, 1.0, -1.0]))  # not descending
        with pytest.raises(ValueError):
            mc.CartanVector(np.array([1.0, 0.5]))  # nonzero sum


class TestIota:
    def test_zero(self):
        a = mc.CartanVector(np.zeros(4))
        assert np.array_equal(mc.iota(a).entries, np.zeros(4))

    def test_reversal_negation(self):
        a = mc.CartanVector(np.array([2.0, -1.0, -1.0]))
        assert np.allclose(mc.iota(a).entries, [1.0, 1.0, -2.0])

    def test_involution(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            v = np.sort(rng.standard_normal(5))[::-1]
            a = mc.CartanVector(v - v.mean())
            assert np.allclose(mc.iota(mc.iota(a)).entries, a.entries)


class TestRegularityMargin:
    def test_closed_formula(self):
        a = mc.CartanVector(np.array([2.0, -1.0, -1.0]))
        face = mc.FaceType(3, (1,))
        assert mc.regularity_margin(a, face) == pytest.approx(3 / np.sqrt(2))

    def test_on_wall(self):
        a = mc.CartanVector(np.array([1.0, 1.0, -2.0]))
        assert mc.regularity_margin(a, mc.FaceType(3, (1,))) == 0.0

    def test_projection_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            v = np.sort(rng.standard_normal(4))[::-1]
            a = mc.CartanVector(v - v.mean())
            for dims in ((1,), (2,), (1, 3), (1, 2, 3)):
                face = mc.FaceType(4, dims)
                assert mc.regularity_margin(a, face) == pytest.approx(
                    wall_distance_opt(a, face), abs=1e-6
                )

    def test_lipschitz(self):
        rng = np.random.default_rng(14)
        face = mc.FaceType(4, (1, 3))
        for _ in range(200):
            v = np.sort(rng.standard_normal(4))[::-1]
            w = np.sort(rng.standard_normal(4))[::-1]
            a = mc.CartanVector(v - v.mean())
            b = mc.CartanVector(w - w.mean())
            gap = abs(mc.regularity_margin(a, face) - mc.regularity_margin(b, face))
            assert gap <= np.linalg.norm(a.entries - b.entries) + 1e-12


class TestThetaContains:
    def test_barycenter_direction(self):
        theta = mc.ThetaSet(mc.FaceType(3, (1, 2)), 0.5)
        a = mc.CartanVector(np.array([1.0, 0.0, -1.0]) * 2.3)
        assert mc.theta_contains(theta, a)  # root values 1/sqrt(2) each

    def test_wall_fails_any_margin(self):
        a = mc.CartanVector(np.array([1.0, 1.0, -2.0]))
        theta = mc.ThetaSet(mc.FaceType(3, (1, 2)), 1e-9)
        assert not mc.theta_contains(theta, a)

    def test_margin_monotonicity(self):
        rng = np.random.default_rng(15)
        face = mc.FaceType(3, (1, 2))
        for _ in range(100):
            v = np.sort(rng.standard_normal(3))[::-1]
            a = mc.CartanVector(v - v.mean())
            tight = mc.ThetaSet(face, 0.4)
            loose = mc.ThetaSet(face, 0.1)
            if mc.theta_contains(tight, a):
                assert mc.theta_contains(loose, a)

    def test_degenerate_vector(self):
        theta = mc.ThetaSet(mc.FaceType(2, (1,)), 0.5)
        with pytest.raises(DegenerateVector):
            mc.theta_contains(theta, mc.CartanVector(np.zeros(2)))

    def test_convexity_of_unit_types(self):
        # membership survives normalized convex combination
        rng = np.random.default_rng(16)
        face = mc.FaceType(3, (1, 2))
        theta = mc.ThetaSet(face, 0.3)
        kept = 0
        while kept < 50:
            v = np.sort(rng.standard_normal(3))[::-1]
            w = np.sort(rng.standard_normal(3))[::-1]
            a = mc.CartanVector((v - v.mean()) / np.linalg.norm(v - v.mean()))
            b = mc.CartanVector((w - w.mean()) / np.linalg.norm(w - w.mean()))
            if not (mc.theta_contains(theta, a) and mc.theta_contains(theta, b)):
                continue
            kept += 1
            lam = rng.uniform()
            mix = lam * a.entries + (1 - lam) * b.entries
            mix = mc.CartanVector(mix / np.linalg.norm(mix))
            assert mc.theta_contains(theta, mix)


class TestRiemannianDistance:
    def test_zero(self):
        p = mc.identity_point(2)
        assert mc.riemannian_distance(p, p) == 0.0

    def test_sl2_diagonal(self):
        p = mc.identity_point(2)
        q = mc.Point(np.diag([np.e, 1 / np.e]))
        assert mc.riemannian_distance(p, q) == pytest.approx(np.sqrt(2.0))

    def test_isometry_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            p, q = random_point(rng, 3), random_point(rng, 3)
            g = random_sl(rng, 3, 1.3)
            d0 = mc.riemannian_distance(p, q)
            d1 = mc.riemannian_distance(g.apply(p), g.apply(q))
            assert abs(d0 - d1) < 1e-7

    def test_triangle_inequality(self):
        rng = np.random.default_rng(18)
        for _ in range(50):
            p, q, r = (random_point(rng, 3) for _ in range(3))
            assert mc.riemannian_distance(p, q) <= (
                mc.riemannian_distance(p, r) + mc.riemannian_distance(r, q) + 1e-10
            )


class TestModuleInvariants:
    def test_symmetry_property(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            p, q = random_point(rng, 3), random_point(rng, 3)
            lhs = mc.cartan_vector(p, q).entries
            rhs = mc.iota(mc.cartan_vector(q, p)).entries
            assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_coarse_triangle_inequality(self):
        rng = np.random.default_rng(20)
        for _ in range(50):
            p, pp, q = (random_point(rng, 3) for _ in range(3))
            lhs = np.linalg.norm(
                mc.cartan_vector(p, q).entries - mc.cartan_vector(pp, q).entries
            )
            assert lhs <= mc.riemannian_distance(p, pp) + 1e-7

    def test_cartan_isometry_invariance(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            p, q = random_point(rng, 3), random_point(rng, 3)
            g = random_sl(rng, 3)
            lhs = mc.cartan_vector(g.apply(p), g.apply(q)).entries
            assert np.max(np.abs(lhs - mc.cartan_vector(p, q).entries)) < 1e-7


class TestFaceType:
    def test_iota_invariance_flag(self):
        assert mc.FaceType(4, (1, 3)).is_iota_invariant
        assert mc.FaceType(4, (2,)).is_iota_invariant
        assert not mc.FaceType(4, (1,)).is_iota_invariant

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            mc.FaceType(3, (0,))
        with pytest.raises(ValueError):
            mc.FaceType(3, (3,))
        with pytest.raises(ValueError):
            mc.FaceType(3, ())

    def test_block_sizes(self):
        assert mc.FaceType(5, (1, 4)).block_sizes() == (1, 3, 1)
