"""Independent cross-checks used by the tests.

Everything here recomputes quantities along a different route than the
library (scipy matrix functions, finite differences, brute force), so a
test that compares against these really is a two-sided check.
"""

import itertools

import numpy as np
import scipy.linalg as sla

import morsecert as mc
from morsecert._linalg import frame_from
from morsecert.dynamics import _lower_positions
from morsecert.flags import apply_to_flag


def cartan_vector_scipy(p, q):
    """log(p^{-1/2} q p^{-1/2}) spectrum via scipy matrix functions."""
    ihalf = np.real(sla.fractional_matrix_power(p.mat, -0.5))
    m = ihalf @ q.mat @ ihalf
    lg = np.real(sla.logm(0.5 * (m + m.T)))
    w = np.sort(np.linalg.eigvalsh(0.5 * (lg + lg.T)))[::-1]
    return w - w.mean()


def wall_distance_opt(a, face):
    """Distance from a vector to the face's walls by generic projection."""
    best = np.inf
    v = a.entries
    n = v.size
    for k in face.dims:
        c = np.zeros(n)
        c[k - 1], c[k] = 1.0, -1.0
        best = min(best, abs(c @ v) / np.linalg.norm(c))
    return best


def comparison_angle(x, y1, y2, h=1e-3):
    """Riemannian angle at x between the segments to y1, y2 by the law of
    cosines on short pieces of the two geodesics."""
    from morsecert.flags import log_direction

    d1, _ = log_direction(x, y1)
    d2, _ = log_direction(x, y2)
    p1 = mc.flags.geodesic_point(x, d1, h)
    p2 = mc.flags.geodesic_point(x, d2, h)
    d12 = mc.riemannian_distance(p1, p2)
    cos = (2 * h * h - d12 * d12) / (2 * h * h)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def chart_coordinates(base_flag, other_flag, face):
    """Chart coordinate of a flag near `base_flag` by block LU."""
    m = base_flag.frame.T @ other_flag.frame
    n = face.n
    cuts = (0,) + face.dims + (n,)
    low = np.eye(n)
    u = m.copy()
    for j in range(len(cuts) - 1):
        s = slice(cuts[j], cuts[j + 1])
        below = slice(cuts[j + 1], n)
        if cuts[j + 1] < n:
            fac = u[below, s] @ np.linalg.inv(u[s, s])
            low[below, s] = fac
            u[below, :] -= fac @ u[s, :]
    nil = low - np.eye(n)
    z = np.zeros_like(nil)
    p = nil.copy()
    k = 1
    while np.any(p) and k <= n:
        z += ((-1) ** (k + 1) / k) * p
        p = p @ nil
        k += 1
    return z


def fd_differential_singvals(g, tau, h=1e-6):
    """Singular values of the flag-action differential by central finite
    differences in the exp-chart."""
    face = tau.face
    pos = _lower_positions(face)
    n = face.n
    img = apply_to_flag(g, tau)
    cols = []
    for (r, s) in pos:
        acc = np.zeros(len(pos))
        for sign in (+1, -1):
            z = np.zeros((n, n))
            z[r, s] = sign * h
            pert = mc.Flag(frame_from(tau.frame @ sla.expm(z)), face)
            moved = apply_to_flag(g, pert)
            zc = chart_coordinates(img, moved, face)
            acc = acc + sign * np.array([zc[a, b] for (a, b) in pos])
        cols.append(acc / (2 * h))
    return np.linalg.svd(np.array(cols).T, compute_uv=False)


def brute_force_reduced_words(rank, length):
    """All reduced words by filtering every string over the alphabet."""
    from morsecert.repio import alphabet, inverse_letter

    letters = alphabet(rank)
    out = []
    for tup in itertools.product(letters, repeat=length):
        if all(b != inverse_letter(a) for a, b in zip(tup[:-1], tup[1:])):
            out.append("".join(tup))
    return out


def isometric_interval(g):
    """Isometric-circle footprint of a Moebius map on the boundary line."""
    c, d = g[1, 0], g[1, 1]
    if abs(c) < 1e-12:
        return None
    center, radius = -d / c, 1.0 / abs(c)
    return (center - radius, center + radius)


def pingpong_free(mats):
    """Classical criterion: the isometric disks of the generators and their
    inverses are pairwise disjoint."""
    intervals = []
    for m in mats:
        for g in (m, np.linalg.inv(m)):
            iv = isometric_interval(g)
            if iv is None:
                return False
            intervals.append(iv)
    intervals.sort()
    return all(lo2 > hi1 for (_, hi1), (lo2, _) in zip(intervals[:-1], intervals[1:]))


def spearman_exact(xs, ys):
    """1.0 iff the two samples are identically ordered (no ties)."""
    rx = np.argsort(np.argsort(xs))
    ry = np.argsort(np.argsort(ys))
    return 1.0 if np.array_equal(rx, ry) else float(np.corrcoef(rx, ry)[0, 1])
