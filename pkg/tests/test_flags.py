import numpy as np
import pytest

import morsecert as mc
from morsecert.errors import (
    DegenerateSegment,
    FaceMismatch,
    NearSingularMargin,
    NotASubface,
    NotIotaInvariant,
)
from morsecert.flags import (
    geodesic_point,
    random_flag,
    reversed_flag,
    star_direction,
)

from conftest import conjugated_transvection, random_point, random_sl
from oracles import comparison_angle


class TestCanonicalZeta:
    def test_sl2(self):
        z = mc.canonical_zeta(mc.FaceType(2, (1,)))
        assert np.allclose(z.weights.entries, [1 / np.sqrt(2), -1 / np.sqrt(2)])

    def test_sl3_full(self):
        z = mc.canonical_zeta(mc.FaceType(3, (1, 2)))
        expect = np.array([1.0, 0.0, -1.0]) / np.sqrt(2)
        assert np.allclose(z.weights.entries, expect)

    def test_symmetry_all_faces(self):
        for n in range(2, 7):
            for dims in _iota_invariant_faces(n):
                z = mc.canonical_zeta(mc.FaceType(n, dims))
                w = z.weights.entries
                assert np.array_equal(w, -w[::-1])  # exact by construction

    def test_rejects_non_invariant(self):
        with pytest.raises(NotIotaInvariant):
            mc.canonical_zeta(mc.FaceType(3, (1,)))


def _iota_invariant_faces(n):
    import itertools

    out = []
    for r in range(1, n):
        for dims in itertools.combinations(range(1, n), r):
            if all((n - k) in dims for k in dims):
                out.append(dims)
    return out


class TestFlagShadow:
    def test_diagonal(self):
        p = mc.identity_point(3)
        q = mc.Point(np.diag([np.e**3, np.e, np.e**-4]))
        sh = mc.flag_shadow(p, q, mc.FaceType(3, (1,)))
        v1 = sh.subspace(1).ravel()
        assert abs(abs(v1[0]) - 1.0) < 1e-12

    def test_degenerate(self):
        p = mc.identity_point(3)
        with pytest.raises(DegenerateSegment):
            mc.flag_shadow(p, p, mc.FaceType(3, (1,)))

    def test_svd_oracle(self, face3):
        rng = np.random.default_rng(30)
        for _ in range(20):
            p, q = random_point(rng, 3, 0.9), random_point(rng, 3, 0.9)
            a = mc.cartan_vector(p, q)
            if mc.regularity_margin(a, face3) < 1e-3:
                continue
            sh = mc.flag_shadow(p, q, face3)
            # independent route: singular subspaces of p^{-1/2} q^{1/2}
            import scipy.linalg as sla

            k = np.real(
                sla.fractional_matrix_power(p.mat, -0.5)
                @ sla.fractional_matrix_power(q.mat, 0.5)
            )
            u, _, _ = np.linalg.svd(k)
            half = np.real(sla.fractional_matrix_power(p.mat, 0.5))
            for kk in face3.dims:
                ours = sh.subspace(kk)
                qb, _ = np.linalg.qr(half @ u[:, :kk])
                c = np.linalg.svd(ours.T @ qb, compute_uv=False)
                assert np.arccos(np.clip(c[-1], 0, 1)) < 1e-6


class TestGroupShadow:
    def test_sl2_diagonal(self):
        g = mc.GroupElement(np.diag([np.e**2, np.e**-2]))
        sh = mc.group_shadow(g, mc.identity_point(2), mc.FaceType(2, (1,)))
        assert abs(abs(sh.subspace(1)[0, 0]) - 1.0) < 1e-12

    def test_rotation_refused(self, face3):
        th = 0.8
        k = mc.GroupElement(
            np.array(
                [[np.cos(th), -np.sin(th), 0], [np.sin(th), np.cos(th), 0], [0, 0, 1.0]]
            )
        )
        with pytest.raises(NearSingularMargin):
            mc.group_shadow(k, mc.identity_point(3), face3)

    def test_left_singular_oracle(self, face3):
        rng = np.random.default_rng(31)
        for _ in range(20):
            g = random_sl(rng, 3, 1.2)
            try:
                sh = mc.group_shadow(g, mc.identity_point(3), face3)
            except NearSingularMargin:
                continue
            u, _, _ = np.linalg.svd(g.mat)
            for k in face3.dims:
                c = np.linalg.svd(sh.subspace(k).T @ u[:, :k], compute_uv=False)
                assert np.arccos(np.clip(c[-1], 0, 1)) < 1e-6


class TestOpposition:
    def test_standard_reversed(self, face3):
        ok, margin = mc.is_opposite(mc.standard_flag(face3), reversed_flag(face3))
        assert ok and margin == pytest.approx(1.0)

    def test_self(self, face3):
        tau = mc.standard_flag(face3)
        ok, margin = mc.is_opposite(tau, tau)
        assert not ok and margin == pytest.approx(0.0, abs=1e-12)

    def test_determinant_oracle(self, face3):
        rng = np.random.default_rng(32)
        for _ in range(50):
            t1, t2 = random_flag(rng, face3), random_flag(rng, face3)
            ok, _ = mc.is_opposite(t1, t2)
            oracle = all(
                abs(
                    np.linalg.det(
                        np.hstack([t1.subspace(k), t2.subspace(3 - k)])
                    )
                )
                > 1e-6
                for k in face3.dims
            )
            assert ok == oracle

    def test_symmetry_with_margins(self, face3):
        rng = np.random.default_rng(33)
        for _ in range(30):
            t1, t2 = random_flag(rng, face3), random_flag(rng, face3)
            ok1, m1 = mc.is_opposite(t1, t2)
            ok2, m2 = mc.is_opposite(t2, t1)
            assert ok1 == ok2 and abs(m1 - m2) < 1e-8

    def test_face_mismatch(self):
        t1 = mc.standard_flag(mc.FaceType(3, (1, 2)))
        t2 = mc.standard_flag(mc.FaceType(3, (1,)))
        with pytest.raises(FaceMismatch):
            mc.is_opposite(t1, t2)


class TestFaceOf:
    def test_identity(self, face3):
        tau = mc.standard_flag(face3)
        assert mc.face_of(tau, face3) is not None
        assert mc.flag_distance(mc.face_of(tau, face3), tau) == 0.0

    def test_line_projection(self, face3):
        rng = np.random.default_rng(34)
        tau = random_flag(rng, face3)
        sub = mc.FaceType(3, (1,))
        proj = mc.face_of(tau, sub)
        assert np.allclose(proj.subspace(1), tau.subspace(1))

    def test_functoriality(self):
        rng = np.random.default_rng(35)
        full = mc.FaceType(4, (1, 2, 3))
        mid = mc.FaceType(4, (1, 3))
        small = mc.FaceType(4, (1,))
        tau = random_flag(rng, full)
        once = mc.face_of(tau, small)
        twice = mc.face_of(mc.face_of(tau, mid), small)
        assert mc.flag_distance(once, twice) == 0.0

    def test_not_a_subface(self, face3):
        tau = mc.standard_flag(mc.FaceType(3, (1,)))
        with pytest.raises(NotASubface):
            mc.face_of(tau, face3)


class TestZetaDirection:
    def test_standard_diagonal(self, face3):
        z = mc.canonical_zeta(face3)
        a = mc.zeta_direction(mc.identity_point(3), mc.standard_flag(face3), z)
        assert np.allclose(a, np.diag(z.weights.entries))

    def test_reversed_negates(self, face3):
        z = mc.canonical_zeta(face3)
        a = mc.zeta_direction(mc.identity_point(3), reversed_flag(face3), z)
        assert np.allclose(a, -np.diag(z.weights.entries))

    def test_unit_norm_and_round_trip(self, face3):
        rng = np.random.default_rng(36)
        z = mc.canonical_zeta(face3)
        for _ in range(15):
            x = random_point(rng, 3)
            tau = random_flag(rng, face3)
            a = mc.zeta_direction(x, tau, z)
            assert np.linalg.norm(a) == pytest.approx(1.0)
            y = geodesic_point(x, a, 3.0)
            back = mc.flag_shadow(x, y, face3)
            assert mc.flag_distance(back, tau) < 1e-7

    def test_face_mismatch(self, face3):
        z = mc.canonical_zeta(mc.FaceType(3, (1, 2)))
        tau = mc.standard_flag(mc.FaceType(3, (1,)))
        with pytest.raises(FaceMismatch):
            mc.zeta_direction(mc.identity_point(3), tau, z)


class TestAngles:
    def test_same_flag_zero(self, face3):
        z = mc.canonical_zeta(face3)
        tau = mc.standard_flag(face3)
        assert mc.angle_zeta(mc.identity_point(3), tau, tau, z) == pytest.approx(0.0)

    def test_opposite_pi(self, face3):
        z = mc.canonical_zeta(face3)
        angle = mc.angle_zeta(
            mc.identity_point(3), mc.standard_flag(face3), reversed_flag(face3), z
        )
        assert angle == pytest.approx(np.pi)

    def test_finite_difference_oracle(self, face3):
        rng = np.random.default_rng(37)
        z = mc.canonical_zeta(face3)
        for _ in range(10):
            x = random_point(rng, 3, 0.7)
            t1, t2 = random_flag(rng, face3), random_flag(rng, face3)
            ours = mc.angle_zeta(x, t1, t2, z)
            y1 = geodesic_point(x, mc.zeta_direction(x, t1, z), 1.0)
            y2 = geodesic_point(x, mc.zeta_direction(x, t2, z), 1.0)
            assert abs(ours - comparison_angle(x, y1, y2)) < 1e-4

    def test_point_angle_on_ray(self, face3):
        rng = np.random.default_rng(38)
        z = mc.canonical_zeta(face3)
        x = random_point(rng, 3)
        tau = random_flag(rng, face3)
        a = mc.zeta_direction(x, tau, z)
        assert mc.angle_zeta_point(x, tau, geodesic_point(x, a, 2.0), z) < 1e-7
        assert mc.angle_zeta_point(x, tau, geodesic_point(x, a, -2.0), z) == pytest.approx(np.pi)

    def test_point_angle_limit(self, face3):
        # far along a ray toward another flag, the point angle approaches
        # the flag angle
        rng = np.random.default_rng(39)
        z = mc.canonical_zeta(face3)
        x = random_point(rng, 3, 0.5)
        t1, t2 = random_flag(rng, face3), random_flag(rng, face3)
        far = geodesic_point(x, mc.zeta_direction(x, t2, z), 20.0)
        lhs = mc.angle_zeta_point(x, t1, far, z)
        assert abs(lhs - mc.angle_zeta(x, t1, t2, z)) < 1e-3

    def test_degenerate_point(self, face3):
        z = mc.canonical_zeta(face3)
        x = mc.identity_point(3)
        with pytest.raises(DegenerateSegment):
            mc.angle_zeta_point(x, mc.standard_flag(face3), x, z)


class TestFlagDistance:
    def test_zero(self, face3):
        tau = mc.standard_flag(face3)
        assert mc.flag_distance(tau, tau) == 0.0

    def test_orthogonal_lines(self):
        face = mc.FaceType(2, (1,))
        t1 = mc.Flag(np.eye(2), face)
        t2 = mc.Flag(np.eye(2)[:, ::-1], face)
        assert mc.flag_distance(t1, t2) == pytest.approx(np.pi / 2)

    def test_triangle_inequality(self, face3):
        rng = np.random.default_rng(40)
        for _ in range(1000):
            a, b, c = (random_flag(rng, face3) for _ in range(3))
            assert mc.flag_distance(a, c) <= (
                mc.flag_distance(a, b) + mc.flag_distance(b, c) + 1e-10
            )


class TestModuleInvariants:
    def test_shadow_equivariance(self, face3):
        rng = np.random.default_rng(41)
        for _ in range(15):
            p, q = random_point(rng, 3, 0.8), random_point(rng, 3, 0.8)
            if mc.regularity_margin(mc.cartan_vector(p, q), face3) < 1e-3:
                continue
            g = random_sl(rng, 3)
            lhs = mc.flag_shadow(g.apply(p), g.apply(q), face3)
            rhs = mc.apply_to_flag(g, mc.flag_shadow(p, q, face3))
            assert mc.flag_distance(lhs, rhs) < 1e-6

    def test_shadow_asymptotic_uniqueness(self, face3):
        rng = np.random.default_rng(42)
        for _ in range(5):
            gamma, _ = conjugated_transvection(rng, [1.1, 0.1, -1.2])
            p = random_point(rng, 3, 0.6)
            base = mc.identity_point(3)
            dists = []
            for k in range(2, 11):
                gk = mc.GroupElement(
                    np.linalg.matrix_power(gamma.mat, k), validate=False
                )
                d = mc.flag_distance(
                    mc.group_shadow(gk, base, face3), mc.group_shadow(gk, p, face3)
                )
                dists.append(d)
            assert all(b <= a + 1e-12 for a, b in zip(dists[:-1], dists[1:]))
            assert dists[-1] < 1e-3

    def test_angle_zeta_isometry_invariance(self, face3):
        rng = np.random.default_rng(43)
        z = mc.canonical_zeta(face3)
        for _ in range(10):
            x = random_point(rng, 3)
            t1, t2 = random_flag(rng, face3), random_flag(rng, face3)
            g = random_sl(rng, 3)
            lhs = mc.angle_zeta(x, t1, t2, z)
            rhs = mc.angle_zeta(
                g.apply(x), mc.apply_to_flag(g, t1), mc.apply_to_flag(g, t2), z
            )
            assert abs(lhs - rhs) < 1e-6
