"""Straightness and spacing checks, the quadruple condition, and the
semi-decision certification loop for free-group actions.

Certification enumerates all reduced words of length three times the
current scale, maps them to orbit paths, and requires the midpoint triple
of every equally-spaced index quadruple to be regular, nearly aligned and
well separated.  A passing schedule entry yields a Certificate recording
the parameters and the worst margins seen; the logical step from those
parameters to the global Morse property is supplied by the theory, not
re-derived here, which is why the schedule is explicit and reported.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import frame_from, spd_inv_sqrt, spd_sqrt, sym
from .cartan import (
    GEOM_TOL,
    Point,
    cartan_vector,
    regularity_margin,
    theta_contains,
)
from .cones import in_diamond, in_theta_cone, parallel_set, project_to_parallel_set
from .errors import (
    DegenerateSegment,
    InputError,
    NearSingularMargin,
    NotThetaRegular,
    NumericalBlowup,
    PathTooShort,
)
from .flags import (
    MARGIN_FLOOR,
    Flag,
    angle_zeta,
    canonical_zeta,
    flag_shadow,
)

COND_CAP = 1e14  # circuit breaker for word products


@dataclass(frozen=True)
class OrbitPath:
    """Ordered orbit points, optionally with the letters that produced them."""

    points: tuple
    labels: tuple | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if not pts:
            raise ValueError("a path needs at least one point")
        for a, b in zip(pts[:-1], pts[1:]):
            if np.max(np.abs(a.mat - b.mat)) <= 1e-9:
                raise ValueError("consecutive path points coincide")

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class StraightnessParams:
    """One certification schedule entry."""

    theta: object
    eps: float
    spacing: float
    scale: int

    def __post_init__(self):
        if not 0.0 < self.eps < math.pi:
            raise ValueError(f"eps must be in (0, pi), got {self.eps}")
        if not self.spacing > 0.0:
            raise ValueError("spacing must be positive")
        if int(self.scale) < 1:
            raise ValueError("scale must be a positive integer")
        object.__setattr__(self, "scale", int(self.scale))


def default_schedule(face, max_index, scale_cap=None):
    """Geometric fallback schedule: margin 1/i, eps 0.2/i, spacing 2i, scale 2i.

    `scale_cap` clamps the scale while margins keep loosening; strongly
    regular generators need that, since long coarsening windows cross the
    condition breaker long before the margin entry that admits them.
    """
    from .cartan import ThetaSet

    return [
        StraightnessParams(
            ThetaSet(face, 1.0 / i),
            0.2 / i,
            2.0 * i,
            2 * i if scale_cap is None else min(2 * i, scale_cap),
        )
        for i in range(1, max_index + 1)
    ]


@dataclass(frozen=True)
class Certificate:
    """Record of a passing schedule entry.

    The schedule is empirical (chosen by the caller or the default), so the
    certificate names it in full next to the worst margins observed.
    """

    params: StraightnessParams
    schedule_index: int
    words_checked: int
    worst_angle_defect: float
    worst_margin: float
    worst_spacing: float
    rank: int = 0
    n: int = 0
    empirical_schedule: bool = True


@dataclass(frozen=True)
class NotCertified:
    """Outcome of an exhausted schedule, with the last failing witness."""

    witness_word: str | None
    witness_report: object | None
    entries_tried: int
    words_checked: int
    truncated_words: int = 0
    first_truncated: str | None = None

    @property
    def budget_exhausted(self):
        return True


@dataclass
class CheckReport:
    """Worst-case aggregation of a straightness / quadruple run."""

    passed: bool
    worst_angle_defect: float | None
    worst_margin: float | None
    worst_spacing: float | None
    details: list = field(default_factory=list)
    reason: str | None = None


def midpoint(p, q):
    """Geodesic midpoint of two points.

    Computed from the relative factor: with p = C C^T and K the relative
    factor, the midpoint is C (K K^T)^{1/2} C^T, and C U S^{1/2} (from the
    SVD of K) is carried as the midpoint's own factor.
    """
    from .cartan import point_factor, relative_factor

    k = relative_factor(p, q)
    u, s, _ = np.linalg.svd(k)
    factor = (point_factor(p) @ u) * np.sqrt(s)
    return Point(sym(factor @ factor.T), validate=False, factor=factor)


def midpoint_triples(path, s):
    """Midpoints of consecutive s-spaced coarse points of the path."""
    npts = len(path)
    if npts < 2 * s + 1:
        raise PathTooShort(f"need at least {2 * s + 1} points, have {npts}")
    coarse = [path.points[i] for i in range(0, npts, s)]
    mids = [midpoint(a, b) for a, b in zip(coarse[:-1], coarse[1:])]
    return OrbitPath(tuple(mids))


def _segment_stats(x, y, face):
    a = cartan_vector(x, y)
    length = a.norm()
    unit_gap = float("-inf")
    if length > 0.0:
        v = a.entries / length
        unit_gap = min(v[k - 1] - v[k] for k in face.dims)
    return length, unit_gap, a


def is_straight(path, theta, eps, spacing, zeta, margin_floor=MARGIN_FLOOR):
    """Check that a path is regular, nearly aligned and spaced.

    Every segment's unit type must clear the Theta margin and the gauge
    angle at every interior point between its neighbours must be within
    `eps` of pi.  Sub-floor wall margins are recorded as failures, not
    raised; only coincident points raise.
    """
    face = theta.face
    pts = path.points
    details = []
    worst_gap = float("inf")
    worst_len = float("inf")
    worst_defect = 0.0
    passed = True
    for i in range(len(pts) - 1):
        length, unit_gap, _ = _segment_stats(pts[i], pts[i + 1], face)
        theta_ok = unit_gap >= theta.margin
        if length < spacing or not theta_ok:
            passed = False
        worst_gap = min(worst_gap, unit_gap)
        worst_len = min(worst_len, length)
        details.append(
            {"segment": i, "length": length, "unit_gap": unit_gap, "theta_ok": theta_ok}
        )
    for i in range(1, len(pts) - 1):
        try:
            back = flag_shadow(pts[i], pts[i - 1], face, margin_floor)
            fwd = flag_shadow(pts[i], pts[i + 1], face, margin_floor)
        except NearSingularMargin:
            passed = False
            details.append({"vertex": i, "defect": None, "reason": "margin"})
            continue
        defect = math.pi - angle_zeta(pts[i], back, fwd, zeta)
        if defect > eps:
            passed = False
        worst_defect = max(worst_defect, defect)
        details.append({"vertex": i, "defect": defect})
    return CheckReport(passed, worst_defect, worst_gap, worst_len, details)


def quadruple_check(path, params, zeta, all_gaps=False, margin_floor=MARGIN_FLOOR):
    """Midpoint-triple straightness over index quadruples of the path.

    By default only quadruples with gaps exactly `params.scale` are
    enumerated (the coarsified sequence); `all_gaps` switches to every
    quadruple with gaps at least the scale, for stress testing.
    """
    s = params.scale
    top = len(path) - 1
    if top < 3 * s:
        raise PathTooShort(f"need {3 * s + 1} points, have {len(path)}")
    if all_gaps:
        quads = [
            (t1, t2, t3, t4)
            for t1 in range(top + 1)
            for t2 in range(t1 + s, top + 1)
            for t3 in range(t2 + s, top + 1)
            for t4 in range(t3 + s, top + 1)
        ]
    else:
        quads = [(t, t + s, t + 2 * s, t + 3 * s) for t in range(top - 3 * s + 1)]
    mids = {}

    def mid(i, j):
        if (i, j) not in mids:
            mids[(i, j)] = midpoint(path.points[i], path.points[j])
        return mids[(i, j)]

    agg = CheckReport(True, 0.0, float("inf"), float("inf"))
    for quad in quads:
        triple = [mid(a, b) for a, b in zip(quad[:-1], quad[1:])]
        if any(
            np.max(np.abs(a.mat - b.mat)) <= 1e-9
            for a, b in zip(triple[:-1], triple[1:])
        ):
            # midpoints collapsed: spacing fails outright
            rep = CheckReport(False, None, float("-inf"), 0.0)
        else:
            rep = is_straight(
                OrbitPath(tuple(triple)), params.theta, params.eps, params.spacing, zeta, margin_floor
            )
        agg.passed = agg.passed and rep.passed
        if rep.worst_angle_defect is not None:
            agg.worst_angle_defect = max(agg.worst_angle_defect, rep.worst_angle_defect)
        agg.worst_margin = min(agg.worst_margin, rep.worst_margin)
        agg.worst_spacing = min(agg.worst_spacing, rep.worst_spacing)
        agg.details.append({"quadruple": quad, "passed": rep.passed})
        if not rep.passed and agg.reason is None:
            agg.reason = f"quadruple {quad}"
    return agg


@dataclass
class FitReport:
    """Outcome of fitting a path against a parallel set."""

    passed: bool
    max_distance: float
    distances: list
    forward_cone_ok: list
    backward_cone_ok: list
    tau_minus: object
    tau_plus: object


def morse_lemma_fit(path, theta_prime, delta, margin_floor=MARGIN_FLOOR, flag_tol=1e-4):
    """Project the path to the parallel set of its outermost segments.

    Verifies all projection distances are at most `delta` and that the
    projected points march through nested cones of type `theta_prime` in
    both directions.

    Each point is handled in its own translated chart (the whole
    configuration moved so that point sits at the identity), with the
    charts linked through factors rebased at the path's middle point.
    Distances and cone memberships are isometry invariant, so this changes
    nothing semantically but keeps the arithmetic conditioned like single
    path segments rather than like whole orbit points.
    """
    from .cartan import identity_point, point_factor

    face = theta_prime.face
    pts = path.points
    npts = len(pts)
    factors = [point_factor(p) for p in pts]
    mid = npts // 2
    rebased = [np.linalg.solve(factors[mid], c) for c in factors]

    # outermost segment shadows, in the global chart for the report
    tau_plus = flag_shadow(pts[0], pts[-1], face, margin_floor)
    tau_minus = flag_shadow(pts[-1], pts[0], face, margin_floor)
    # and in the chart rebased at the middle, for the per-point work
    plus_mid = frame_from(np.linalg.solve(factors[mid], tau_plus.frame))
    minus_mid = frame_from(np.linalg.solve(factors[mid], tau_minus.frame))

    base = identity_point(face.n)
    dists, proj, flags_i = [], [], []
    for i in range(npts):
        tp = Flag(frame_from(np.linalg.solve(rebased[i], plus_mid)), face)
        tm = Flag(frame_from(np.linalg.solve(rebased[i], minus_mid)), face)
        spec = parallel_set(tm, tp)
        q, d = project_to_parallel_set(base, spec)
        dists.append(d)
        proj.append(q)
        flags_i.append((tm, tp))
    fwd, bwd = [], []
    for i in range(npts - 1):
        # transport the next projection into chart i (one path segment)
        w = np.linalg.solve(rebased[i], rebased[i + 1])
        nxt = Point(sym(w @ proj[i + 1].mat @ w.T), validate=False)
        tm, tp = flags_i[i]
        try:
            ok_f, _ = in_theta_cone(proj[i], tp, nxt, theta_prime, margin_floor, flag_tol)
        except DegenerateSegment:
            ok_f = False
        try:
            ok_b, _ = in_theta_cone(nxt, tm, proj[i], theta_prime, margin_floor, flag_tol)
        except DegenerateSegment:
            ok_b = False
        fwd.append(bool(ok_f))
        bwd.append(bool(ok_b))
    max_d = float(max(dists))
    passed = max_d <= delta and all(fwd) and all(bwd)
    return FitReport(passed, max_d, dists, fwd, bwd, tau_minus, tau_plus)


def check_path_morse(path, quasi_l, quasi_a, theta, max_distance, margin_floor=MARGIN_FLOOR, pair_stride=1):
    """Quasigeodesic bounds plus diamond closeness over index pairs.

    For every sampled pair (i, j) the in-between points must lie within
    `max_distance` of the diamond spanned by the pair; pairs whose segment
    is not Theta-regular fail the diamond check.
    """
    pts = path.points
    npts = len(pts)
    dist = {}
    qg_violations = []
    for i in range(npts):
        for j in range(i + 1, npts):
            d = cartan_vector(pts[i], pts[j]).norm()
            dist[(i, j)] = d
            gap = j - i
            if d > quasi_l * gap + quasi_a or d < gap / quasi_l - quasi_a:
                qg_violations.append((i, j, d))
    worst_diamond = 0.0
    diamond_failures = []
    for i in range(0, npts, pair_stride):
        for j in range(i + 2, npts, pair_stride):
            try:
                for k in range(i + 1, j):
                    ok, rep = in_diamond(
                        pts[i], pts[j], pts[k], theta, max_distance, margin_floor
                    )
                    worst_diamond = max(worst_diamond, rep.distance)
                    if not ok:
                        diamond_failures.append((i, k, j))
            except (NotThetaRegular, NearSingularMargin):
                diamond_failures.append((i, None, j))
    passed = not qg_violations and not diamond_failures
    return CheckReport(
        passed,
        None,
        None,
        worst_diamond,
        details=[{"qg_violations": qg_violations, "diamond_failures": diamond_failures}],
    )


# ---------------------------------------------------------------------------
# certification


def _triple_check_factored(windows, theta, eps, spacing, zeta_weights):
    """Quadruple condition on one certification word, from window factors.

    `windows` are the three scale-length sub-products of the word,
    conjugated into the basepoint chart.  The midpoint triple's relative
    factors come out of the windows' SVDs in closed form, so nothing more
    eccentric than a single window is ever factorized; this is what keeps
    the power sweep stable when it passes through very proximal pairs.
    """
    face = theta.face
    svds = [np.linalg.svd(k) for k in windows]

    # relative factors between consecutive geodesic midpoints, based at the
    # middle one:  D_1^{-1} D_0 and D_1^{-1} D_2 for D_j = C_j U_j S_j^{1/2}
    u1, s1, vt1 = svds[1]
    s0, vt0 = svds[0][1], svds[0][2]
    u2, s2 = svds[2][0], svds[2][1]
    r10 = (1.0 / np.sqrt(s1))[:, None] * (u1.T @ vt0.T) * (1.0 / np.sqrt(s0))
    r12 = np.sqrt(s1)[:, None] * (vt1 @ u2) * np.sqrt(s2)

    passed = True
    worst_gap = float("inf")
    worst_len = float("inf")
    frames = []
    for r in (r10, r12):
        u, s, _ = np.linalg.svd(r)
        logs = 2.0 * np.log(s)
        logs = logs - logs.mean()
        length = float(np.linalg.norm(logs))
        if length < 1e-12:
            return CheckReport(False, None, float("-inf"), 0.0, reason="collapsed midpoints")
        unit = logs / length
        gap = min(unit[k - 1] - unit[k] for k in face.dims)
        if length < spacing or gap < theta.margin:
            passed = False
        worst_gap = min(worst_gap, gap)
        worst_len = min(worst_len, length)
        frames.append(frame_from(u))
    a_back = sym(frames[0] @ np.diag(zeta_weights) @ frames[0].T)
    a_fwd = sym(frames[1] @ np.diag(zeta_weights) @ frames[1].T)
    defect = math.pi - float(
        np.arccos(np.clip(np.trace(a_back @ a_fwd), -1.0, 1.0))
    )
    if defect > eps:
        passed = False
    return CheckReport(passed, defect, worst_gap, worst_len)


def _subtree_check(gen_mats, basepoint_mat, rank, params, zeta, prefix, margin_floor, cond_cap):
    """Check all reduced-word completions of `prefix` at one schedule entry.

    Deterministic depth-first enumeration with prefix-shared window
    products; stops at the first failing word.  Prefix products crossing
    the condition breaker are counted as truncated.
    """
    from .repio import LETTERS, inverse_letter

    s = params.scale
    length = 3 * s
    alphabet = LETTERS[: 2 * rank]
    mats = {}
    for i in range(rank):
        mats[alphabet[2 * i]] = gen_mats[i]
        mats[alphabet[2 * i + 1]] = np.linalg.inv(gen_mats[i])
    bp_half = spd_sqrt(basepoint_mat)
    bp_ihalf = spd_inv_sqrt(basepoint_mat)
    zeta_weights = zeta.weights.entries

    stats = {
        "checked": 0,
        "truncated": 0,
        "first_truncated": None,
        "witness": None,
        "witness_report": None,
        "defect": 0.0,
        "margin": float("inf"),
        "spacing": float("inf"),
    }

    def leaves_below(depth_left):
        return (2 * rank - 1) ** depth_left if depth_left > 0 else 1

    def check_leaf(word, windows):
        stats["checked"] += 1
        rep = _triple_check_factored(
            windows, params.theta, params.eps, params.spacing, zeta_weights
        )
        if rep.worst_angle_defect is not None:
            stats["defect"] = max(stats["defect"], rep.worst_angle_defect)
        stats["margin"] = min(stats["margin"], rep.worst_margin)
        stats["spacing"] = min(stats["spacing"], rep.worst_spacing)
        if not rep.passed:
            stats["witness"] = word
            stats["witness_report"] = rep

    def descend(word, window, done):
        # the breaker guards the window products (the only matrices this
        # check factorizes); the quadruple data is isometry-invariant, so
        # the absolute prefix may be arbitrarily eccentric without harm
        depth = len(word)
        if stats["witness"] is not None:
            return
        if depth == length:
            check_leaf(word, done)
            return
        for letter in alphabet:
            if word and letter == inverse_letter(word[-1]):
                continue
            nxt_win = window @ mats[letter]
            if np.linalg.cond(nxt_win) > cond_cap:
                stats["truncated"] += leaves_below(length - depth - 1)
                if stats["first_truncated"] is None:
                    stats["first_truncated"] = word + letter
                continue
            if (depth + 1) % s == 0:
                k = bp_ihalf @ nxt_win @ bp_half
                descend(word + letter, np.eye(len(k)), done + [k])
            else:
                descend(word + letter, nxt_win, done)
            if stats["witness"] is not None:
                return

    # walk the given prefix first
    n = basepoint_mat.shape[0]
    window = np.eye(n)
    done = []
    ok = True
    for i, letter in enumerate(prefix):
        window = window @ mats[letter]
        if np.linalg.cond(window) > cond_cap:
            stats["truncated"] += leaves_below(length - len(prefix))
            stats["first_truncated"] = prefix
            ok = False
            break
        if (i + 1) % s == 0:
            done.append(bp_ihalf @ window @ bp_half)
            window = np.eye(n)
    if ok:
        descend(prefix, window, done)
    return stats


def _entry_prefixes(rank, scale, jobs):
    """Disjoint word prefixes covering the entry, in canonical order."""
    from .repio import reduced_words

    length = 3 * scale
    if jobs <= 1 or length < 2:
        depth = min(1, length)
    else:
        depth = min(2, length)
    return list(reduced_words(rank, depth))


def certify_action(
    generators,
    rank,
    face,
    schedule,
    basepoint=None,
    zeta=None,
    jobs=1,
    margin_floor=MARGIN_FLOOR,
    cond_cap=COND_CAP,
):
    """Semi-decision certification of a free-group action.

    Runs the quadruple condition over all reduced words of length three
    times each schedule entry's scale and returns a Certificate at the
    first entry where every word passes; otherwise NotCertified with the
    last failing witness.  Words whose products cross the condition-number
    breaker are reported as truncated and block certification of that
    entry.
    """
    from .repio import word_count

    if rank < 1 or len(generators) != rank:
        raise InputError(f"expected {rank} generators, got {len(generators)}")
    n = generators[0].n
    for g in generators:
        det = float(np.linalg.det(g.mat))
        # the determinant of an eccentric matrix is conditioning-limited;
        # scale the tolerance so legitimate high powers are not rejected
        tol = max(1e-5, 50 * np.finfo(float).eps * np.linalg.cond(g.mat))
        if abs(det - 1.0) > tol:
            raise InputError(f"generator determinant {det!r} is not 1")
    if not schedule:
        raise InputError("schedule must be non-empty")
    scales = [p.scale for p in schedule]
    if any(b < a for a, b in zip(scales[:-1], scales[1:])):
        raise InputError("schedule scales must be non-decreasing")
    face.require_iota_invariant()
    if zeta is None:
        zeta = canonical_zeta(face)
    if basepoint is None:
        from .cartan import identity_point

        basepoint = identity_point(n)
    gen_mats = [np.asarray(g.mat, dtype=float) for g in generators]

    witness, witness_report = None, None
    total_checked = 0
    total_truncated = 0
    first_truncated = None
    for index, params in enumerate(schedule, start=1):
        prefixes = _entry_prefixes(rank, params.scale, jobs)
        results = _run_prefixes(
            gen_mats, basepoint.mat, rank, params, zeta, prefixes, margin_floor, cond_cap, jobs
        )
        entry_checked = 0
        entry_truncated = 0
        entry_witness = None
        entry_report = None
        defect, margin, spacing = 0.0, float("inf"), float("inf")
        for stats in results:  # canonical prefix order
            entry_checked += stats["checked"]
            entry_truncated += stats["truncated"]
            if stats["first_truncated"] and first_truncated is None:
                first_truncated = stats["first_truncated"]
            defect = max(defect, stats["defect"])
            margin = min(margin, stats["margin"])
            spacing = min(spacing, stats["spacing"])
            if stats["witness"] is not None:
                entry_witness = stats["witness"]
                entry_report = stats["witness_report"]
                break
        total_checked += entry_checked
        total_truncated += entry_truncated
        if entry_witness is not None:
            witness, witness_report = entry_witness, entry_report
            continue
        if entry_truncated:
            continue
        expected = word_count(rank, 3 * params.scale)
        assert entry_checked == expected, (entry_checked, expected)
        return Certificate(
            params=params,
            schedule_index=index,
            words_checked=entry_checked,
            worst_angle_defect=defect,
            worst_margin=margin,
            worst_spacing=spacing,
            rank=rank,
            n=n,
        )
    return NotCertified(
        witness_word=witness,
        witness_report=witness_report,
        entries_tried=len(schedule),
        words_checked=total_checked,
        truncated_words=total_truncated,
        first_truncated=first_truncated,
    )


def _run_prefixes(gen_mats, base_mat, rank, params, zeta, prefixes, margin_floor, cond_cap, jobs):
    """Run subtree checks, serially or in a process pool.

    Results are consumed in canonical prefix order either way, so the
    merged outcome is independent of scheduling.
    """
    if jobs <= 1:
        out = []
        for prefix in prefixes:
            stats = _subtree_check(
                gen_mats, base_mat, rank, params, zeta, prefix, margin_floor, cond_cap
            )
            out.append(stats)
            if stats["witness"] is not None:
                break
        return out
    from concurrent.futures import ProcessPoolExecutor

    args = [
        (gen_mats, base_mat, rank, params, zeta, prefix, margin_floor, cond_cap)
        for prefix in prefixes
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_subtree_worker, args))
    out = []
    for stats in results:
        out.append(stats)
        if stats["witness"] is not None:
            break
    return out


def _subtree_worker(args):
    return _subtree_check(*args)
