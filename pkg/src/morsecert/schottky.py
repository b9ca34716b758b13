"""Constructive free-group search: axis genericity, separation geometry,
power sweep, and flag limit-set sampling with a transversality audit.

Axis flags are read off high powers rather than eigenvectors: the shadow of
g^N stabilizes exponentially fast and sidesteps the conditioning of
non-symmetric eigenproblems.  Powers are accumulated with scalar rescaling,
which leaves the shadows unchanged and avoids overflow.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import frame_from, spd_inv_sqrt, spd_sqrt
from .cartan import CartanVector, cartan_vector, regularity_margin, riemannian_distance
from .errors import (
    DegenerateSegment,
    FaceMismatch,
    InputError,
    NearSingularMargin,
    PowerStabilizationFailed,
)
from .flags import (
    MARGIN_FLOOR,
    Flag,
    angle_zeta,
    flag_distance,
    flag_shadow,
    is_opposite,
)
from .morse import COND_CAP, Certificate, certify_action, midpoint

STABILIZATION_TOL = 1e-6
MERGE_TOL = 1e-4


def _scaled_power_shadow(g, basepoint, face, margin_floor, tol, max_power):
    """Shadow of g^N for the smallest power-of-two N at which it stabilizes.

    Works on a rescaled power (shadows are scale-invariant), so arbitrarily
    large N stay inside floating-point range.
    """
    hp = spd_sqrt(basepoint.mat)
    ip = spd_inv_sqrt(basepoint.mat)

    def shadow_of(m):
        k = ip @ m @ hp
        u, s, _ = np.linalg.svd(k)
        logs = np.log(s)
        a = CartanVector(logs - logs.mean())
        margin = regularity_margin(a, face)
        if margin <= margin_floor:
            raise NearSingularMargin(
                f"power shadow margin {margin:.3e} at or below floor"
            )
        return Flag(frame_from(hp @ u), face)

    m = np.asarray(g.mat, dtype=float)
    m = m / np.linalg.norm(m)
    prev = None
    power = 1
    last_err = None
    while power <= max_power:
        try:
            current = shadow_of(m)
        except NearSingularMargin as exc:
            last_err = exc
            current = None
        if current is not None and prev is not None:
            if flag_distance(current, prev) < tol:
                return current, power
        prev = current
        m = m @ m
        m = m / np.linalg.norm(m)
        power *= 2
    if prev is None:
        raise last_err or NearSingularMargin("no power cleared the margin floor")
    raise PowerStabilizationFailed(
        f"axis shadow did not stabilize to {tol:.1e} within power {max_power}"
    )


@dataclass(frozen=True)
class GenericityReport:
    """Pairwise opposition margins of the four axis flags."""

    flags: dict  # "+a", "-a", "+b", "-b" -> Flag
    margins: dict  # pair label -> float
    powers: dict  # flag label -> stabilizing power
    passed: bool

    @property
    def min_margin(self):
        return min(self.margins.values())


def genericity_check(
    alpha,
    beta,
    face,
    basepoint,
    margin_floor=MARGIN_FLOOR,
    stabilization_tol=STABILIZATION_TOL,
    max_power=64,
    opposition_tol=None,
):
    """Pairwise opposition of the four axis flags of a candidate pair."""
    from .cartan import GEOM_TOL

    face.require_iota_invariant()
    if opposition_tol is None:
        opposition_tol = GEOM_TOL
    flags, powers = {}, {}
    for label, g in (("+a", alpha), ("-a", alpha.inverse()), ("+b", beta), ("-b", beta.inverse())):
        flags[label], powers[label] = _scaled_power_shadow(
            g, basepoint, face, margin_floor, stabilization_tol, max_power
        )
    margins = {}
    labels = ["+a", "-a", "+b", "-b"]
    for i in range(4):
        for j in range(i + 1, 4):
            _, margin = is_opposite(flags[labels[i]], flags[labels[j]])
            margins[f"{labels[i]}|{labels[j]}"] = margin
    passed = all(m > opposition_tol for m in margins.values())
    return GenericityReport(flags, margins, powers, passed)


@dataclass(frozen=True)
class QuadrupleGeometryReport:
    separations: dict
    min_separation: float
    min_unit_gap: float
    theta_ok: bool
    max_angle_defect: float


def quadruple_geometry(alpha, beta, m, n, basepoint, theta, zeta, margin_floor=MARGIN_FLOOR):
    """Separation and alignment of the four half-way points of a pair.

    The four midpoints of the segments to alpha^{+-m} and beta^{+-n} of the
    basepoint must be far apart, the six connecting segments regular, and
    from each midpoint the other three must be seen at a small gauge angle
    to the basepoint direction.
    """
    if m < 1 or n < 1:
        raise DegenerateSegment("powers must be at least 1")
    from .cartan import ensure_factor

    face = theta.face
    x = ensure_factor(basepoint)
    corners = {
        "+a": midpoint(x, _power(alpha, m).apply(x)),
        "-a": midpoint(x, _power(alpha, -m).apply(x)),
        "+b": midpoint(x, _power(beta, n).apply(x)),
        "-b": midpoint(x, _power(beta, -n).apply(x)),
    }
    labels = list(corners)
    separations = {}
    min_gap = float("inf")
    theta_ok = True
    for i in range(4):
        for j in range(i + 1, 4):
            p, q = corners[labels[i]], corners[labels[j]]
            a = cartan_vector(p, q)
            separations[f"{labels[i]}|{labels[j]}"] = a.norm()
            v = a.entries / a.norm()
            gap = min(v[k - 1] - v[k] for k in face.dims)
            min_gap = min(min_gap, gap)
            if gap < theta.margin:
                theta_ok = False
    max_defect = 0.0
    for i in range(4):
        p = corners[labels[i]]
        tau_x = flag_shadow(p, x, face, margin_floor)
        for j in range(4):
            if i == j:
                continue
            tau_q = flag_shadow(p, corners[labels[j]], face, margin_floor)
            max_defect = max(max_defect, angle_zeta(p, tau_q, tau_x, zeta))
    return QuadrupleGeometryReport(
        separations,
        min(separations.values()),
        float(min_gap),
        theta_ok,
        float(max_defect),
    )


def _power(g, k):
    from .cartan import GroupElement

    return GroupElement(np.linalg.matrix_power(g.mat, k), validate=False)


@dataclass(frozen=True)
class PowerSearchResult:
    m: int
    n: int
    certificate: Certificate
    genericity: GenericityReport


@dataclass(frozen=True)
class PowerSearchNotFound:
    max_power: int
    attempts: int
    best_m: int | None
    best_n: int | None
    best_defect: float | None
    genericity: GenericityReport


def power_search(alpha, beta, basepoint, params, zeta, max_power, jobs=1, margin_floor=MARGIN_FLOOR):
    """Smallest powers (m, n) whose generated pair certifies at `params`.

    Diagonal sweep ordered by max(m, n), then m, then n — the first passing
    pair in this order is returned with its certificate.
    """
    face = params.theta.face
    gen = genericity_check(alpha, beta, face, basepoint, margin_floor)
    if not gen.passed:
        raise InputError(
            f"axis flags are not pairwise transverse (min margin {gen.min_margin:.3e})"
        )
    pairs = sorted(
        ((m, n) for m in range(1, max_power + 1) for n in range(1, max_power + 1)),
        key=lambda p: (max(p), p[0], p[1]),
    )
    best = (None, None, None)
    attempts = 0
    for m, n in pairs:
        attempts += 1
        gens = [_power(alpha, m), _power(beta, n)]
        outcome = certify_action(
            gens, 2, face, [params], basepoint, zeta=zeta, jobs=jobs, margin_floor=margin_floor
        )
        if isinstance(outcome, Certificate):
            return PowerSearchResult(m, n, outcome, gen)
        if outcome.witness_report is not None:
            defect = outcome.witness_report.worst_angle_defect
            if defect is not None and (best[2] is None or defect < best[2]):
                best = (m, n, defect)
    return PowerSearchNotFound(max_power, attempts, best[0], best[1], best[2], gen)


@dataclass(frozen=True)
class LimitSetSample:
    """Deduplicated shadow flags of all words of one length."""

    samples: list  # (word, Flag, margin)
    merged: int
    skipped: list  # (word, reason)
    rescued: int = 0  # shadows taken from the deepest numerically sound prefix

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def limit_set_sample(
    generators,
    face,
    basepoint,
    max_word_length,
    merge_tol=MERGE_TOL,
    margin_floor=MARGIN_FLOOR,
):
    """Shadows of all reduced words of exactly `max_word_length`.

    Flags closer than `merge_tol` are merged onto the lexicographically
    first representative.  Products are rescaled per letter (shadows are
    scale invariant).  When a word's singular-gap structure stops
    supporting the merge tolerance in double precision, its shadow is
    taken from the deepest prefix that still does: by then the remaining
    letters can move the shadow by far less than the merge tolerance, so
    the sample stays sound.  Words below the margin floor at every depth
    are recorded and skipped.
    """
    from .repio import letter_matrices, reduced_words

    rank = len(generators)
    mats = {k: g.mat for k, g in letter_matrices(generators).items()}
    hp = spd_sqrt(basepoint.mat)
    ip = spd_inv_sqrt(basepoint.mat)
    ks = list(face.dims)
    eps = np.finfo(float).eps
    gate = 0.1 * merge_tol

    reps = []  # (word, Flag, margin)
    proj_stack = []  # per rep: (len(ks), n, n) projector stack
    merged = 0
    rescued = 0
    skipped = []

    fro_gate = np.sqrt(2.0 * max(ks)) * np.sin(min(merge_tol, np.pi / 2))

    def projectors(flag):
        out = np.empty((len(ks), face.n, face.n))
        for i, k in enumerate(ks):
            b = flag.subspace(k)
            out[i] = b @ b.T
        return out

    def emit(word, sound, sound_depth):
        nonlocal merged, rescued
        if sound is None:
            skipped.append((word, "no prefix clears the accuracy guard"))
            return
        u, s = sound
        logs = np.log(s)
        a = CartanVector(logs - logs.mean())
        margin = regularity_margin(a, face)
        if margin <= margin_floor:
            skipped.append((word, f"margin {margin:.3e} at or below floor"))
            return
        if sound_depth < len(word):
            rescued += 1
        flag = Flag(frame_from(hp @ u), face)
        pr = projectors(flag)
        if reps:
            stack = np.asarray(proj_stack)
            diff = stack - pr[None, :, :, :]
            fro = np.linalg.norm(diff, axis=(2, 3)).max(axis=1)
            for idx in np.nonzero(fro < fro_gate)[0]:
                if flag_distance(reps[idx][1], flag) < merge_tol:
                    merged += 1
                    return
        reps.append((word, flag, margin))
        proj_stack.append(pr)

    from .repio import LETTERS, inverse_letter

    alphabet = LETTERS[: 2 * rank]

    def walk(word, product, sound, sound_depth):
        depth = len(word)
        if depth == max_word_length:
            emit(word, sound, sound_depth)
            return
        for letter in alphabet:
            if word and letter == inverse_letter(word[-1]):
                continue
            nxt = product @ mats[letter]
            nxt = nxt / np.linalg.norm(nxt)
            k = ip @ nxt @ hp
            u, s, _ = np.linalg.svd(k)
            ok = s[-1] > 0.0
            if ok:
                gaps = [s[kk - 1] - s[kk] for kk in ks]
                ok = min(gaps) > 0.0 and eps * max(s[0] / g for g in gaps) <= gate
            if ok:
                walk(word + letter, nxt, (u, s), depth + 1)
            else:
                walk(word + letter, nxt, sound, sound_depth)

    walk("", np.eye(face.n), None, 0)
    return LimitSetSample(reps, merged, skipped, rescued)


def antipodality_audit(flags, tol=None):
    """Exact pairwise minimum opposition margin over a flag list.

    Returns (min margin, offending index pair or None); a pair offends when
    its margin does not clear the tolerance.
    """
    from .cartan import GEOM_TOL

    if tol is None:
        tol = GEOM_TOL
    if len(flags) < 2:
        raise ValueError("need at least two flags")
    face = flags[0].face
    for f in flags:
        if f.face != face:
            raise FaceMismatch("flags have mixed face types")
    worst = float("inf")
    offender = None
    for i in range(len(flags)):
        for j in range(i + 1, len(flags)):
            _, margin = is_opposite(flags[i], flags[j])
            if margin < worst:
                worst = margin
                offender = (i, j)
    return worst, (offender if worst <= tol else None)
