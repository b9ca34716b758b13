"""Parallel sets, Weyl cones with restricted types, and diamonds.

A transverse flag pair splits R^n into complementary blocks; the parallel
set it spans consists of the points making those blocks orthogonal (with
respect to the inner product u^T p^{-1} v, the choice invariant under the
group action).  In the adapted basis the parallel set is an embedded
product of smaller positive definite cones, which gives closed-form
geodesics for the projection.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import spd_inv_sqrt, spd_log, spd_sqrt, sym, sym_exp
from .cartan import (
    GEOM_TOL,
    Point,
    cartan_vector,
    regularity_margin,
    riemannian_distance,
    theta_contains,
)
from .errors import (
    DegenerateSegment,
    NoConvergence,
    NotOpposite,
    NotThetaRegular,
)
from .flags import MARGIN_FLOOR, face_of, flag_distance, flag_shadow, is_opposite

PROJECTION_GRAD_TOL = 1e-8
PROJECTION_MAX_ITER = 10_000


@dataclass(frozen=True)
class ParallelSetSpec:
    """Totally geodesic set spanned by a transverse flag pair.

    `blocks` lists orthonormal bases of the complementary subspaces
    W_1,...,W_{m+1} cut out by the pair; `adapted` is their concatenation,
    rescaled to |det| = 1.
    """

    tau_minus: object
    tau_plus: object
    blocks: tuple
    adapted: np.ndarray

    @property
    def n(self):
        return self.adapted.shape[0]

    def block_slices(self):
        out, lo = [], 0
        for b in self.blocks:
            out.append(slice(lo, lo + b.shape[1]))
            lo += b.shape[1]
        return out

    def block_mask(self):
        n = self.n
        mask = np.zeros((n, n), dtype=bool)
        for s in self.block_slices():
            mask[s, s] = True
        return mask


def parallel_set(tau_minus, tau_plus):
    """Build the parallel set spec of an opposite pair.

    The j-th block is the intersection of the j-th subspace of `tau_plus`
    with the complementary-dimension subspace of `tau_minus`.
    """
    ok, margin = is_opposite(tau_minus, tau_plus)
    if not ok:
        raise NotOpposite(f"flags are not transverse (margin {margin:.3e})")
    n = tau_plus.n
    dims = (0,) + tau_plus.face.dims + (n,)
    blocks = []
    for j in range(1, len(dims)):
        k_hi, k_lo = dims[j], dims[j - 1]
        a = tau_plus.subspace(k_hi) if k_hi < n else np.eye(n)
        if k_lo == 0:
            blocks.append(a)
            continue
        # intersect span(a) with the (n - k_lo)-subspace of tau_minus:
        # solve (complement of that subspace)^T a u = 0
        c = tau_minus.complement(n - k_lo)  # k_lo columns
        _, _, vt = np.linalg.svd(c.T @ a)
        want = k_hi - k_lo
        u = vt[-want:].T
        blocks.append(a @ u)
    adapted = np.hstack(blocks)
    det = float(np.linalg.det(adapted))
    if abs(det) < 1e-12:
        raise NotOpposite("adapted basis is numerically singular")
    adapted = adapted / abs(det) ** (1.0 / n)
    return ParallelSetSpec(tau_minus, tau_plus, tuple(blocks), adapted)


def membership_residual(spec, p):
    """How far p is from making the blocks pairwise orthogonal.

    Max over block pairs of ||W_i^T p^{-1} W_j||_2, relative to ||p^{-1}||_2;
    zero exactly on the parallel set.
    """
    pinv = np.linalg.inv(p.mat)
    scale = np.linalg.norm(pinv, 2)
    worst = 0.0
    nb = len(spec.blocks)
    for i in range(nb):
        for j in range(i + 1, nb):
            r = np.linalg.norm(spec.blocks[i].T @ pinv @ spec.blocks[j], 2)
            worst = max(worst, r / scale)
    return float(worst)


def _block_clean(mat, mask):
    out = sym(mat).copy()
    out[~mask] = 0.0
    return out


def point_on(spec, block_spd):
    """Point of the parallel set with the given block-diagonal coordinate."""
    t = spec.adapted
    d = np.asarray(block_spd, dtype=float)
    det = float(np.linalg.det(d))
    d = d / det ** (1.0 / spec.n)
    return Point(sym(t @ d @ t.T), validate=False)


def project_to_parallel_set(
    x,
    spec,
    grad_tol=PROJECTION_GRAD_TOL,
    max_iter=PROJECTION_MAX_ITER,
    initial=None,
):
    """Nearest-point projection of x to the parallel set, with distance.

    Riemannian gradient descent with Armijo backtracking in the adapted
    block coordinate; the squared distance is geodesically convex there, so
    the minimum is unique and two-start agreement certifies convergence.
    """
    t = spec.adapted
    tinv = np.linalg.inv(t)
    mask = spec.block_mask()
    if initial is None:
        d = _block_clean(tinv @ x.mat @ tinv.T, mask)
    else:
        d = _block_clean(initial, mask)
    d = d / np.linalg.det(d) ** (1.0 / spec.n)

    def dist2_and_log(dcur):
        r = t @ _block_clean(spd_sqrt(dcur), mask)
        y = np.linalg.solve(r, x.mat)
        c = sym(np.linalg.solve(r, y.T).T)
        lg = spd_log(c)
        return float(np.sum(lg * lg)), lg

    f, lg = dist2_and_log(d)
    gn = float("inf")
    for _ in range(max_iter):
        grad = _block_clean(lg, mask)
        gn = float(np.linalg.norm(grad))
        if gn < grad_tol:
            return Point(sym(t @ d @ t.T), validate=False), float(np.sqrt(f))
        dh = _block_clean(spd_sqrt(d), mask)
        floor = 1e-15 * max(1.0, f)  # round-off level of the objective
        step, progressed = 1.0, False
        while step > 1e-14:
            dn = _block_clean(dh @ sym_exp(step * grad) @ dh, mask)
            fn, lgn = dist2_and_log(dn)
            if fn <= f - max(1e-4 * step * gn * gn, floor):
                d, f, lg = dn, fn, lgn
                progressed = True
                break
            step *= 0.5
        if not progressed:
            # the objective is at its double-precision floor; the gradient
            # cannot reach an absolute 1e-8 when the distance is order one,
            # so accept the iterate if the gradient is small on that scale
            if gn <= 1e3 * grad_tol * max(1.0, np.sqrt(f)):
                return Point(sym(t @ d @ t.T), validate=False), float(np.sqrt(f))
            break
    raise NoConvergence(
        "projection did not reach the gradient tolerance",
        best=Point(sym(t @ d @ t.T), validate=False),
        residual=gn,
    )


@dataclass(frozen=True)
class ConeReport:
    """What the segment from the cone tip to the query looks like."""

    cartan: object
    margin: float
    in_theta: bool
    flag_dist: float | None
    flag_matches: bool | None


def in_theta_cone(x, tau, y, theta, margin_floor=MARGIN_FLOOR, flag_tol=GEOM_TOL):
    """Whether y lies in the cone at x over the Theta-star of tau.

    Requires the segment's unit type to be inside the Theta set and the
    segment's shadow to reproduce tau.
    """
    a = cartan_vector(x, y)
    if a.norm() < 1e-12:
        raise DegenerateSegment("cone membership of the tip itself is trivial")
    margin = regularity_margin(a, tau.face)
    in_theta = theta_contains(theta, a)
    flag_dist, matches = None, None
    if margin > margin_floor:
        shadow = flag_shadow(x, y, tau.face, margin_floor)
        flag_dist = flag_distance(shadow, tau)
        matches = flag_dist <= flag_tol
    report = ConeReport(a, margin, in_theta, flag_dist, matches)
    return bool(in_theta and matches), report


@dataclass(frozen=True)
class DiamondReport:
    distance: float
    cone_plus_ok: bool
    cone_minus_ok: bool
    cone_plus: ConeReport | None
    cone_minus: ConeReport | None


def in_diamond(
    x_minus,
    x_plus,
    y,
    theta,
    max_distance,
    margin_floor=MARGIN_FLOOR,
    flag_tol=GEOM_TOL,
    tip_tol=1e-7,
):
    """Whether y is within `max_distance` of the diamond of a regular segment.

    Projects y to the parallel set spanned by the segment's two shadows and
    requires the projection to pass both cone tests; projections landing on
    a tip count as members of that tip's cone.
    """
    a = cartan_vector(x_minus, x_plus)
    if not theta_contains(theta, a):
        raise NotThetaRegular(
            f"segment type has margin below the Theta margin {theta.margin}"
        )
    face = theta.face
    tau_plus = flag_shadow(x_minus, x_plus, face, margin_floor)
    tau_minus = flag_shadow(x_plus, x_minus, face, margin_floor)
    spec = parallel_set(tau_minus, tau_plus)
    ybar, dist = project_to_parallel_set(y, spec)

    def cone_ok(tip, target):
        if riemannian_distance(ybar, tip) <= tip_tol:
            return True, None
        return in_theta_cone(tip, target, ybar, theta, margin_floor, flag_tol)

    plus_ok, plus_rep = cone_ok(x_minus, tau_plus)
    minus_ok, minus_rep = cone_ok(x_plus, tau_minus)
    report = DiamondReport(dist, plus_ok, minus_ok, plus_rep, minus_rep)
    return bool(dist <= max_distance and plus_ok and minus_ok), report


def angle_distance_surrogate(x, tau_minus, tau_plus, zeta):
    """pi minus the gauge angle between the two flags seen from x.

    Vanishes exactly on the parallel set and grows monotonically with the
    distance to it near the set; used for zero-set and monotonicity
    assertions only.
    """
    from .flags import angle_zeta

    ok, margin = is_opposite(tau_minus, tau_plus)
    if not ok:
        raise NotOpposite(f"flags are not transverse (margin {margin:.3e})")
    return np.pi - angle_zeta(x, tau_minus, tau_plus, zeta)
