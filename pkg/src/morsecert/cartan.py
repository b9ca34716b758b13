"""Weyl-chamber arithmetic for the unimodular positive definite matrix space.

The model: points are symmetric positive definite n x n matrices of
determinant 1, and n x n real matrices of determinant 1 act on them by
p -> g p g^T.  The vector-valued distance between two points is the
descending eigenvalue vector of log(p^{-1/2} q p^{-1/2}); its Euclidean
norm is the Riemannian distance for the trace-form metric.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import relative_log_pair, sym
from .errors import DegenerateVector, NotIotaInvariant, NotPositiveDefinite

# Residual tolerance for linear-algebra invariants (symmetry, determinant,
# frame orthonormality) on freshly constructed values.
LINALG_TOL = 1e-9
# Tolerance for geometric comparisons (flag equality, margins, angles).
GEOM_TOL = 1e-6


@dataclass(frozen=True)
class CartanVector:
    """Weakly descending real n-vector summing to zero.

    Values of the vector-valued distance live here; the zero vector is the
    distance from a point to itself.
    """

    entries: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.entries, dtype=float).reshape(-1)
        object.__setattr__(self, "entries", v)
        n = v.size
        if n < 2:
            raise ValueError("need at least 2 entries")
        if np.any(v[:-1] < v[1:] - LINALG_TOL * n):
            raise ValueError(f"entries not weakly descending: {v}")
        if abs(float(v.sum())) > LINALG_TOL * n:
            raise ValueError(f"entries sum to {v.sum():.3e}, not 0")

    @property
    def n(self):
        return self.entries.size

    def norm(self):
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class FaceType:
    """Subset of {1,...,n-1} naming the meaningful subspace dimensions."""

    n: int
    dims: tuple

    def __post_init__(self):
        dims = tuple(sorted(int(k) for k in self.dims))
        object.__setattr__(self, "dims", dims)
        if len(set(dims)) != len(dims):
            raise ValueError(f"repeated dimension in {dims}")
        if not dims:
            raise ValueError("empty face type")
        if dims[0] < 1 or dims[-1] > self.n - 1:
            raise ValueError(f"dims {dims} not inside 1..{self.n - 1}")

    @property
    def is_iota_invariant(self):
        return all((self.n - k) in self.dims for k in self.dims)

    def require_iota_invariant(self):
        if not self.is_iota_invariant:
            raise NotIotaInvariant(
                f"face {self.dims} of n={self.n} is not closed under k -> n-k"
            )

    def block_sizes(self):
        """Sizes of the successive gaps 0 < k_1 < ... < k_m < n."""
        cuts = (0,) + self.dims + (self.n,)
        return tuple(cuts[i + 1] - cuts[i] for i in range(len(cuts) - 1))


@dataclass(frozen=True)
class ThetaSet:
    """Compact convex set of regular unit types, cut out by a root margin.

    A unit vector belongs to the set when every simple-root value at the
    face's crossing indices is at least `margin`.
    """

    face: FaceType
    margin: float

    def __post_init__(self):
        if not self.margin > 0.0:
            raise ValueError(f"margin must be positive, got {self.margin}")

    def weaken(self, delta):
        """Same face with the margin lowered by `delta` (slack variant)."""
        return ThetaSet(self.face, self.margin - delta)


@dataclass(frozen=True)
class Point:
    """Symmetric positive definite matrix of determinant 1.

    `factor` is an optional matrix C with mat = C C^T.  Points far from the
    identity are much better conditioned through their factor (half the
    log-eccentricity), so relative-position computations prefer it when
    both operands carry one.  It is a trusted numerical accelerator, not
    part of the value.
    """

    mat: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)
    factor: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float)
        object.__setattr__(self, "mat", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotPositiveDefinite(f"expected a square matrix, got {m.shape}")
        if not self.validate:
            return
        n = m.shape[0]
        if np.max(np.abs(m - m.T)) > LINALG_TOL * max(1.0, np.max(np.abs(m))):
            raise NotPositiveDefinite("matrix is not symmetric")
        w = np.linalg.eigvalsh(sym(m))
        if w[0] <= 0.0:
            raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= 0")
        logdet = float(np.sum(np.log(w)))
        if abs(logdet) > LINALG_TOL * n * 10:
            raise NotPositiveDefinite(f"log-determinant {logdet:.3e} != 0")

    @property
    def n(self):
        return self.mat.shape[0]


@dataclass(frozen=True)
class GroupElement:
    """Real matrix of determinant 1, acting by p -> g p g^T."""

    mat: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float)
        object.__setattr__(self, "mat", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got {m.shape}")
        if not self.validate:
            return
        n = m.shape[0]
        det = float(np.linalg.det(m))
        if abs(det - 1.0) > LINALG_TOL * n * 100:
            raise ValueError(f"determinant {det!r} is not 1")

    @property
    def n(self):
        return self.mat.shape[0]

    def inverse(self):
        return GroupElement(np.linalg.inv(self.mat), validate=False)

    def apply(self, p):
        """Image of a point under the p -> g p g^T action."""
        factor = None if p.factor is None else self.mat @ p.factor
        return Point(sym(self.mat @ p.mat @ self.mat.T), validate=False, factor=factor)


def identity_point(n):
    return Point(np.eye(n), validate=False, factor=np.eye(n))


def point_factor(p):
    """A matrix C with p = C C^T: the stored factor, or the SPD square root."""
    if p.factor is not None:
        return p.factor
    from ._linalg import spd_sqrt

    return spd_sqrt(p.mat)


def ensure_factor(p):
    """The same point, guaranteed to carry a factor."""
    if p.factor is not None:
        return p
    return Point(p.mat, validate=False, factor=point_factor(p))


def relative_factor(p, q):
    """Matrix K with singular values exp(cartan_vector(p, q) / 2).

    Uses the stored factors when both points carry them, which keeps the
    computation conditioned like the factors rather than like the points.
    """
    if p.factor is not None and q.factor is not None:
        return np.linalg.solve(p.factor, q.factor)
    from ._linalg import spd_inv_sqrt, spd_sqrt

    return spd_inv_sqrt(p.mat) @ spd_sqrt(q.mat)


def cartan_vector(p, q):
    """Vector-valued distance from p to q.

    The descending eigenvalue vector of log(p^{-1/2} q p^{-1/2}); its
    Euclidean norm equals the Riemannian distance d(p, q).
    """
    if p.factor is not None and q.factor is not None:
        s = np.linalg.svd(relative_factor(p, q), compute_uv=False)
        lw = 2.0 * np.log(s)
    else:
        lw, _ = relative_log_pair(p.mat, q.mat)
    # the log-eigenvalues sum to log det = 0; clean up round-off
    lw = lw - lw.mean()
    return CartanVector(lw)


def iota(a):
    """The chamber involution: reverse the entries and negate them."""
    return CartanVector(-a.entries[::-1])


def regularity_margin(a, face):
    """Euclidean distance from `a` to the walls attached to `face`.

    For a weakly descending vector this is min over crossing indices k of
    (a_k - a_{k+1}) / sqrt(2), the distance to the union of hyperplanes
    {a_k = a_{k+1}}.
    """
    v = a.entries
    gaps = np.array([v[k - 1] - v[k] for k in face.dims])
    return float(np.min(gaps)) / np.sqrt(2.0)


def theta_contains(theta, a):
    """Whether the unit type of `a` lies in the Theta set.

    Every simple root value (a_k - a_{k+1}) / |a| at a crossing index of the
    face must be at least the margin.
    """
    v = a.entries
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DegenerateVector("zero vector has no type")
    gaps = np.array([v[k - 1] - v[k] for k in theta.face.dims]) / norm
    return bool(np.min(gaps) >= theta.margin)


def riemannian_distance(p, q):
    """Distance under the trace-form metric: norm of the vector distance."""
    return cartan_vector(p, q).norm()
