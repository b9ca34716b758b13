"""Differentials of the flag-manifold action and expansion diagnostics.

The tangent space to a partial flag manifold at a flag is the sum of the
strictly-lower block rectangles in the flag's adapted frame; the metric is
the Frobenius norm there (invariant under the orthogonal group).  The
differential of a matrix action is computed blockwise from the QR factor
of the moved frame, which keeps it exact for transvections and leaves
finite differences as a genuinely independent cross-check.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import frame_from
from .cartan import CartanVector
from .errors import NearSingularMargin
from .flags import Flag, MARGIN_FLOOR, apply_to_flag, flag_distance, group_shadow, random_flag

OPPOSITION_FLOOR = 0.1  # probe flags must clear this margin in diagnostics


def _block_index(face):
    """blk[i] = index of the face block containing coordinate i."""
    n = face.n
    blk = np.zeros(n, dtype=int)
    for k in face.dims:
        blk[k:] += 1
    return blk


def _lower_positions(face):
    blk = _block_index(face)
    n = face.n
    return [(r, s) for s in range(n) for r in range(n) if blk[r] > blk[s]]


def tangent_dim(face):
    return len(_lower_positions(face))


def flag_differential(g, tau):
    """Matrix of the differential of the g-action at tau, plus g . tau.

    Chart: flags near a flag with frame F are spanned by the column
    prefixes of F exp(Z) with Z strictly lower-block-triangular; the
    differential sends Z to the lower-block part of R Z R^{-1} where R is
    the (block upper triangular) matrix of g between the two frames.
    """
    moved = g.mat @ tau.frame
    frame = frame_from(moved)
    image = Flag(frame, tau.face)
    r = frame.T @ moved
    rinv = np.linalg.inv(r)
    pos = _lower_positions(tau.face)
    rows = np.array([p[0] for p in pos])
    cols = np.array([p[1] for p in pos])
    # L[(r2,s2),(r1,s1)] = R[r2, r1] * Rinv[s1, s2]
    mat = r[np.ix_(rows, rows)] * rinv[np.ix_(cols, cols)].T
    return mat, image


def expansion_factor(g, tau):
    """Smallest singular value of the differential of g at tau.

    Equals 1 for orthogonal g; accurate for moderately conditioned g (use
    `expansion_report` for long words, which composes per-letter
    differentials instead).
    """
    mat, _ = flag_differential(g, tau)
    s = np.linalg.svd(mat, compute_uv=False)
    return float(s[-1])


def transvection_spectrum(a, face):
    """Eigenvalues of the differential of exp(diag a) at the standard flag.

    One value exp(-(a_i - a_j)) per matrix position crossing the face's
    block structure (i in an earlier block than j), returned ascending.
    """
    v = a.entries
    vals = [float(np.exp(v[r] - v[s])) for r, s in _lower_positions(face)]
    return sorted(vals)


@dataclass(frozen=True)
class ExpansionReport:
    """Per-prefix expansion of inverse word products at the ray's limit flag."""

    series: list  # (n, log expansion factor of the inverse prefix)
    slope: float
    intercept: float
    monotone: bool
    tau_distance: float  # caller's flag vs the ray's own limit flag


def _suffix_shadow(mats, letters, basepoint, face, margin_floor, window=24):
    """Limit-flag estimate for the ray starting at the given letters.

    Scaled products keep arbitrarily long windows in range; returns None
    when even the full window stays below the margin floor (isometric
    rays have no shadow).
    """
    from ._linalg import spd_inv_sqrt, spd_sqrt
    from .cartan import CartanVector, regularity_margin

    hp = spd_sqrt(basepoint.mat)
    ip = spd_inv_sqrt(basepoint.mat)
    eps = np.finfo(float).eps
    product = np.eye(face.n)
    best = None
    prev = None
    for j, letter in enumerate(letters[:window], start=1):
        product = product @ mats[letter].mat
        product = product / np.linalg.norm(product)
        k = ip @ product @ hp
        u, s, _ = np.linalg.svd(k)
        if s[-1] <= 0.0:
            break
        gaps = [s[kk - 1] - s[kk] for kk in face.dims]
        if min(gaps) <= 0.0 or eps * max(s[0] / g for g in gaps) > 1e-8:
            break  # longer windows would only lose subspace accuracy
        logs = np.log(s)
        a = CartanVector(logs - logs.mean())
        if regularity_margin(a, face) <= margin_floor:
            continue
        flag = Flag(frame_from(hp @ u), face)
        if prev is not None and flag_distance(flag, prev) < 1e-9:
            return flag
        prev, best = flag, flag
    return best


def expansion_report(generators, word_ray, tau, basepoint=None, margin_floor=MARGIN_FLOOR):
    """Log expansion factors of rho(prefix)^{-1} along a reduced ray.

    The expansion is evaluated at the ray's own limit flag by composing
    per-letter differentials; each factor is taken at the shifted ray's
    limit flag (what the exact pullback of the limit flag equals), so flag
    errors stay bounded instead of compounding exponentially with the
    expansion itself.  `tau` is the caller's limit-flag estimate; its
    distance to the internally computed one is reported.
    """
    from .cartan import identity_point
    from .repio import inverse_letter, is_reduced, letter_matrices

    letters = list(word_ray)
    if not is_reduced(letters):
        raise ValueError("word ray must be reduced")
    if basepoint is None:
        basepoint = identity_point(tau.face.n)
    mats = letter_matrices(generators)
    face = tau.face

    # extend the itinerary periodically when the wrap-around stays reduced,
    # so late suffixes still see a long window
    extended = list(letters)
    if letters[0] != inverse_letter(letters[-1]):
        while len(extended) < 2 * len(letters) + 32:
            extended.extend(letters)

    shadow0 = _suffix_shadow(mats, extended, basepoint, face, margin_floor)
    tau_distance = float("nan") if shadow0 is None else flag_distance(tau, shadow0)

    d = tangent_dim(face)
    acc = np.eye(d)
    log_scale = 0.0
    psi = shadow0 if shadow0 is not None else tau
    series = []
    for n, letter in enumerate(letters, start=1):
        g = mats[letter]
        nxt = _suffix_shadow(mats, extended[n:], basepoint, face, margin_floor)
        psi = nxt if nxt is not None else apply_to_flag(g.inverse(), psi)
        step, _ = flag_differential(g, psi)
        acc = acc @ step
        norm = np.linalg.norm(acc, 2)
        log_scale += np.log(norm)
        acc = acc / norm
        # the composed differential has operator norm exp(log_scale); the
        # inverse prefix expands by its reciprocal
        series.append((n, -log_scale))
    ns = np.array([p[0] for p in series], dtype=float)
    ys = np.array([p[1] for p in series])
    slope, intercept = np.polyfit(ns, ys, 1)
    monotone = bool(np.all(np.diff(ys) >= -1e-9))
    return ExpansionReport(series, float(slope), float(intercept), monotone, tau_distance)


@dataclass(frozen=True)
class ContractionRow:
    index: int
    image_diameter: float | None
    shadow_agreement: float | None
    error: str | None


def contraction_diagnostic(
    elements,
    face,
    basepoint,
    probes,
    seed=0,
    margin_floor=MARGIN_FLOOR,
    opposition_floor=OPPOSITION_FLOOR,
):
    """Empirical contraction picture of a sequence of group elements.

    For each element, probe flags well opposite to the inverse's shadow are
    mapped forward; the rows record how small the image cluster is and how
    close it sits to the element's own shadow.  Elements failing the margin
    floor are recorded, not fatal.
    """
    from .flags import is_opposite

    face.require_iota_invariant()
    rng = np.random.default_rng(seed)
    rows = []
    for idx, g in enumerate(elements):
        try:
            tau_rep = group_shadow(g.inverse(), basepoint, face, margin_floor)
            tau_att = group_shadow(g, basepoint, face, margin_floor)
        except NearSingularMargin as exc:
            rows.append(ContractionRow(idx, None, None, str(exc)))
            continue
        sampled = []
        attempts = 0
        while len(sampled) < probes and attempts < 200 * probes:
            attempts += 1
            probe = random_flag(rng, face)
            ok, margin = is_opposite(tau_rep, probe)
            if ok and margin >= opposition_floor:
                sampled.append(probe)
        images = [apply_to_flag(g, f) for f in sampled]
        diam = 0.0
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                diam = max(diam, flag_distance(images[i], images[j]))
        agree = max(flag_distance(f, tau_att) for f in images)
        rows.append(ContractionRow(idx, float(diam), float(agree), None))
    return rows
