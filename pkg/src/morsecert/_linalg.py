"""Small numpy helpers for symmetric-matrix calculus.

Everything here works on plain ndarrays; the typed wrappers live in
`cartan` and `flags`.
"""

import numpy as np

from .errors import NotPositiveDefinite


def sym(a):
    """Symmetrize, killing round-off skewness."""
    return 0.5 * (a + a.T)


def eigh_desc(a):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Ties are broken by numpy's (stable) internal ordering reversed, so the
    output is deterministic for identical input.
    """
    w, u = np.linalg.eigh(sym(a))
    return w[::-1].copy(), u[:, ::-1].copy()


def spd_apply(a, fn):
    """Apply a scalar function to the spectrum of an SPD matrix."""
    w, u = np.linalg.eigh(sym(a))
    if w[0] <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} is not positive")
    return u @ np.diag(fn(w)) @ u.T


def spd_sqrt(a):
    return spd_apply(a, np.sqrt)


def spd_inv_sqrt(a):
    return spd_apply(a, lambda w: 1.0 / np.sqrt(w))


def spd_log(a):
    return spd_apply(a, np.log)


def sym_exp(a):
    """Exponential of a symmetric matrix (always SPD)."""
    w, u = np.linalg.eigh(sym(a))
    return u @ np.diag(np.exp(w)) @ u.T


def frame_from(a):
    """Orthonormal frame whose column prefixes span the prefixes of `a`.

    QR with the sign convention that the diagonal of R is positive, which
    makes the output deterministic.
    """
    q, r = np.linalg.qr(a)
    s = np.sign(np.diag(r))
    s[s == 0.0] = 1.0
    return q * s


def relative_log_pair(p, q):
    """Spectral data of log(p^{-1/2} q p^{-1/2}) for SPD p, q.

    Returns (descending log-eigenvalues, eigenvector matrix in the
    p^{-1/2}-translated chart at the identity).
    """
    ihalf = spd_inv_sqrt(p)
    m = sym(ihalf @ q @ ihalf)
    w, u = np.linalg.eigh(m)
    if w[0] <= 0.0:
        raise NotPositiveDefinite(
            f"relative position has non-positive eigenvalue {w[0]:.3e}"
        )
    lw = np.log(w)
    return lw[::-1].copy(), u[:, ::-1].copy()


def principal_cosines(a, b):
    """Singular values of a^T b for orthonormal bases a, b (clipped to [0,1])."""
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def largest_principal_angle(a, b):
    """Largest principal angle between equal-dimension column spaces."""
    c = principal_cosines(a, b)
    return float(np.arccos(c[-1]))


def rng_orthogonal(rng, n):
    """Haar-ish random orthogonal matrix from a seeded generator."""
    return frame_from(rng.standard_normal((n, n)))
