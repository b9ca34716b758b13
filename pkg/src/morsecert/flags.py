"""Partial flags, segment shadows, opposition tests and angle gauges.

A flag of a given face type is stored as a full orthonormal frame; only the
column-prefix spans at the face's dimensions are meaningful.  Directions at
a point x are expressed in the chart translated to the identity by
x^{-1/2}, where the metric is the plain trace form; this keeps every angle
computation a single trace.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import (
    eigh_desc,
    frame_from,
    principal_cosines,
    spd_inv_sqrt,
    spd_sqrt,
    sym,
    sym_exp,
)
from .cartan import (
    GEOM_TOL,
    LINALG_TOL,
    CartanVector,
    FaceType,
    Point,
    cartan_vector,
    iota,
    regularity_margin,
)
from .errors import (
    DegenerateSegment,
    FaceMismatch,
    NearSingularMargin,
    NotASubface,
)

# Frame orthonormality tolerance for Flag construction.
FRAME_TOL = 1e-8
# Default floor on the chamber-wall margin below which shadows refuse.
MARGIN_FLOOR = 1e-6
# Two points closer than this are treated as coincident.
COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True)
class Flag:
    """Partial flag: orthonormal frame plus the set of meaningful dims."""

    frame: np.ndarray
    face: FaceType

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=float)
        object.__setattr__(self, "frame", f)
        n = self.face.n
        if f.shape != (n, n):
            raise FaceMismatch(f"frame shape {f.shape} does not match n={n}")
        if np.max(np.abs(f.T @ f - np.eye(n))) > FRAME_TOL:
            raise ValueError("frame columns are not orthonormal")

    @property
    def n(self):
        return self.face.n

    def subspace(self, k):
        """Orthonormal basis of the k-dimensional member subspace."""
        return self.frame[:, :k]

    def complement(self, k):
        """Orthonormal basis of the orthogonal complement of the k-subspace."""
        return self.frame[:, k:]


@dataclass(frozen=True)
class ZetaType:
    """Interior unit type used as the angle gauge for a face.

    Constant on the blocks cut out by the face, strictly decreasing across
    them, unit-norm and symmetric under the chamber involution.
    """

    weights: CartanVector
    face: FaceType

    def __post_init__(self):
        w = self.weights.entries
        if w.size != self.face.n:
            raise FaceMismatch("weights length does not match face")
        if abs(np.linalg.norm(w) - 1.0) > LINALG_TOL * w.size:
            raise ValueError("weights must have unit norm")
        if np.max(np.abs(w + w[::-1])) > LINALG_TOL * w.size:
            raise ValueError("weights must be symmetric under the involution")
        cuts = (0,) + self.face.dims + (self.face.n,)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if np.max(w[lo:hi]) - np.min(w[lo:hi]) > LINALG_TOL * w.size:
                raise ValueError("weights must be constant on face blocks")
        if regularity_margin(self.weights, self.face) <= 0.0:
            raise ValueError("weights must strictly decrease across face blocks")

    def block_values(self):
        """One weight value per block, descending."""
        cuts = (0,) + self.face.dims
        return np.array([self.weights.entries[c] for c in cuts])


def canonical_zeta(face):
    """The coweight-barycenter type of an involution-invariant face.

    Normalized sum over the face's dimensions k of the fundamental coweight
    (1,...,1,0,...,0) - k/n; symmetric by construction.
    """
    face.require_iota_invariant()
    n = face.n
    w = np.zeros(n)
    for k in face.dims:
        cw = -np.full(n, k / n)
        cw[:k] += 1.0
        w += cw
    w = 0.5 * (w - w[::-1])  # exact symmetry under reverse-negate
    w /= np.linalg.norm(w)
    return ZetaType(CartanVector(w), face)


def flag_shadow(p, q, face, margin_floor=MARGIN_FLOOR):
    """Flag of type `face` read off the direction of the segment p -> q.

    Eigen-filtration of log(p^{-1/2} q p^{-1/2}), transported back to p;
    computed from the relative factor, so stored point factors keep it
    stable far from the identity.  Refuses when the segment's wall margin
    is at or below `margin_floor`.
    """
    from .cartan import point_factor, relative_factor

    k = relative_factor(p, q)
    u, s, _ = np.linalg.svd(k)
    lw = 2.0 * np.log(s)
    lw = lw - lw.mean()
    if np.linalg.norm(lw) < COINCIDENCE_TOL:
        raise DegenerateSegment("coincident points span no direction")
    a = CartanVector(lw)
    margin = regularity_margin(a, face)
    if margin <= margin_floor:
        raise NearSingularMargin(
            f"segment margin {margin:.3e} at or below floor {margin_floor:.3e}"
        )
    frame = frame_from(point_factor(p) @ u)
    return Flag(frame, face)


def group_shadow(g, basepoint, face, margin_floor=MARGIN_FLOOR):
    """Shadow of the orbit segment basepoint -> g . basepoint."""
    from .cartan import ensure_factor

    base = ensure_factor(basepoint)
    try:
        return flag_shadow(base, g.apply(base), face, margin_floor)
    except DegenerateSegment:
        raise NearSingularMargin(
            "element moves the basepoint by a near-isometry of singular values"
        ) from None


def apply_to_flag(g, tau):
    """Image flag under the linear action on subspaces."""
    return Flag(frame_from(g.mat @ tau.frame), tau.face)


def _mirror_dims(face):
    return tuple(sorted(face.n - k for k in face.dims))


def is_opposite(tau1, tau2, tol=GEOM_TOL):
    """Transversality test with margin.

    Checks V_k(tau1) + V_{n-k}(tau2) = R^n for every k; the margin is the
    minimum over k of the smallest singular value of the pairing between
    V_k(tau1) and the orthogonal complement of V_{n-k}(tau2).  Returns
    (margin > tol, margin).
    """
    if tau1.n != tau2.n or tau2.face.dims != _mirror_dims(tau1.face):
        raise FaceMismatch(
            f"faces {tau1.face.dims} and {tau2.face.dims} are not mirror types"
        )
    n = tau1.n
    margin = 1.0
    for k in tau1.face.dims:
        a = tau1.subspace(k)
        c = tau2.complement(n - k)  # k-dimensional
        s = np.linalg.svd(c.T @ a, compute_uv=False)
        margin = min(margin, float(s[-1]))
    return margin > tol, margin


def face_of(tau, sub):
    """Forgetful projection onto a smaller face type."""
    if sub.n != tau.n or not set(sub.dims).issubset(tau.face.dims):
        raise NotASubface(f"{sub.dims} is not a subface of {tau.face.dims}")
    return Flag(tau.frame, sub)


def flag_distance(tau1, tau2):
    """Max over the face's dims of the largest principal angle between
    corresponding subspaces.  A metric on flags of one face type."""
    if tau1.face != tau2.face:
        raise FaceMismatch(f"faces {tau1.face.dims} vs {tau2.face.dims}")
    worst = 0.0
    for k in tau1.face.dims:
        c = principal_cosines(tau1.subspace(k), tau2.subspace(k))
        worst = max(worst, float(np.arccos(c[-1])))
    return worst


def pulled_frame(x, tau):
    """Frame of the flag translated to the identity by x^{-1/2}."""
    return frame_from(spd_inv_sqrt(x.mat) @ tau.frame)


def star_direction(x, tau, weights):
    """Unit direction at x toward the star of tau with the given type.

    `weights` is any descending zero-sum vector with positive gaps at the
    face's crossing indices.  Expressed in the x^{-1/2}-translated chart;
    the segment from x along the result shadows back to tau.
    """
    g = pulled_frame(x, tau)
    w = np.asarray(weights, dtype=float)
    a = sym(g @ np.diag(w) @ g.T)
    return a / np.linalg.norm(a)


def zeta_direction(x, tau, zeta):
    """Unit direction at x of the ray toward the zeta-point of tau."""
    if tau.face != zeta.face:
        raise FaceMismatch(f"faces {tau.face.dims} vs {zeta.face.dims}")
    return star_direction(x, tau, zeta.weights.entries)


def geodesic_point(x, direction, t):
    """Point at parameter t on the geodesic from x with the given chart
    direction (symmetric, traceless)."""
    if x.factor is None:
        half = spd_sqrt(x.mat)
    else:
        u, s, _ = np.linalg.svd(x.factor)
        half = (u * s) @ u.T
    factor = half @ sym_exp(0.5 * t * np.asarray(direction))
    return Point(sym(factor @ factor.T), validate=False, factor=factor)


def log_direction(x, y):
    """Unit chart direction at x toward y, plus the distance d(x, y)."""
    from ._linalg import relative_log_pair

    lw, u = relative_log_pair(x.mat, y.mat)
    lw = lw - lw.mean()
    dist = float(np.linalg.norm(lw))
    if dist < COINCIDENCE_TOL:
        raise DegenerateSegment("coincident points span no direction")
    return sym(u @ np.diag(lw) @ u.T) / dist, dist


def angle_zeta(x, tau1, tau2, zeta):
    """Angle at x between the rays toward the zeta-points of two flags."""
    a1 = zeta_direction(x, tau1, zeta)
    a2 = zeta_direction(x, tau2, zeta)
    return float(np.arccos(np.clip(np.trace(a1 @ a2), -1.0, 1.0)))


def angle_zeta_point(x, tau, y, zeta):
    """Angle at x between the ray toward the zeta-point of tau and the
    segment x -> y."""
    a = zeta_direction(x, tau, zeta)
    b, _ = log_direction(x, y)
    return float(np.arccos(np.clip(np.trace(a @ b), -1.0, 1.0)))


def extract_flag(direction, face, basepoint=None):
    """Flag read off a symmetric chart direction at a point (identity by
    default): the eigen-filtration of the direction, transported back."""
    w, u = eigh_desc(np.asarray(direction))
    a = CartanVector(w - w.mean())
    if regularity_margin(a, face) <= 0.0:
        raise NearSingularMargin("direction is on a wall for this face")
    if basepoint is None:
        return Flag(frame_from(u), face)
    return Flag(frame_from(spd_sqrt(basepoint.mat) @ u), face)


def random_flag(rng, face):
    """Seeded random flag (Haar-ish frame)."""
    return Flag(frame_from(rng.standard_normal((face.n, face.n))), face)


def standard_flag(face):
    return Flag(np.eye(face.n), face)


def reversed_flag(face):
    """Coordinate flag in the reversed basis; opposite to the standard one."""
    mirror = FaceType(face.n, _mirror_dims(face))
    return Flag(np.eye(face.n)[:, ::-1], mirror)
