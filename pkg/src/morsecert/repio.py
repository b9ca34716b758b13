"""Representation plumbing: word enumeration, orbit paths, input schema.

Words over a rank-r free group use the alphabet a, A, b, B, ... where the
uppercase letter is the inverse of its lowercase partner; enumeration is
depth-first in that alphabet order.  Products are always accumulated left
to right from the identity so that results are bit-reproducible across
thread schedules.
"""

import json
import string
from dataclasses import dataclass, field

import numpy as np

from ._linalg import sym
from .cartan import FaceType, GroupElement, Point, identity_point
from .errors import NumericalBlowup, SchemaError
from .morse import COND_CAP, OrbitPath

TOOL_VERSION = "morsecert 0.1.0"

# Alphabet interleaves generators with their inverses: a A b B c C ...
LETTERS = "".join(
    lo + hi for lo, hi in zip(string.ascii_lowercase, string.ascii_uppercase)
)

# Generators may miss determinant 1 by this much and be silently rescaled
# (slightly above the documented 1e-6 boundary to absorb decimal round-off).
DET_RENORM_TOL = 1.05e-6


def inverse_letter(letter):
    return letter.swapcase()


def alphabet(rank):
    if rank < 1 or rank > 26:
        raise ValueError(f"rank must be in 1..26, got {rank}")
    return LETTERS[: 2 * rank]


def is_reduced(word):
    return all(a != inverse_letter(b) for a, b in zip(word[:-1], word[1:]))


def word_count(rank, length):
    """Number of reduced words of exactly the given length."""
    if length == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (length - 1)


def reduced_words(rank, length):
    """All reduced words of exactly `length`, lexicographic in the alphabet."""
    letters = alphabet(rank)
    if length == 0:
        yield ""
        return

    def extend(word):
        if len(word) == length:
            yield word
            return
        for letter in letters:
            if word and letter == inverse_letter(word[-1]):
                continue
            yield from extend(word + letter)

    yield from extend("")


def letter_matrices(generators):
    """Map from letter to acting GroupElement, inverses included."""
    out = {}
    for i, g in enumerate(generators):
        out[LETTERS[2 * i]] = g
        out[LETTERS[2 * i + 1]] = g.inverse()
    return out


@dataclass
class RepresentationInput:
    """Validated input: matrix size, free-group rank, generators, face."""

    n: int
    rank: int
    generators: list
    face: FaceType
    basepoint: Point
    seed: int
    notes: list = field(default_factory=list)


def orbit_path(rep, word, cond_cap=COND_CAP):
    """Orbit of the basepoint under the prefix products of a reduced word.

    Association order is fixed (left to right from the identity).  Raises
    when an intermediate product crosses the condition-number breaker.
    """
    from ._linalg import spd_sqrt

    if not is_reduced(word):
        raise ValueError(f"word {word!r} is not reduced")
    mats = {k: g.mat for k, g in letter_matrices(rep.generators).items()}
    base = rep.basepoint.mat
    base_half = spd_sqrt(base)
    points = [Point(base, validate=False, factor=base_half)]
    product = np.eye(rep.n)
    for i, letter in enumerate(word):
        if letter not in mats:
            raise ValueError(f"letter {letter!r} outside rank-{rep.rank} alphabet")
        product = product @ mats[letter]
        cond = np.linalg.cond(product)
        if cond > cond_cap:
            raise NumericalBlowup(
                f"prefix {word[: i + 1]!r} has condition {cond:.3e} > {cond_cap:.1e}"
            )
        points.append(
            Point(
                sym(product @ base @ product.T),
                validate=False,
                factor=product @ base_half,
            )
        )
    return OrbitPath(tuple(points), labels=tuple(word))


# ---------------------------------------------------------------------------
# document schema


def _require(doc, key, kind, context="document"):
    if key not in doc:
        raise SchemaError(f"{context}: missing field {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{context}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(f"{context}: field {key!r} must be {kind.__name__}")
    return value


def load_representation(data):
    """Parse and validate a representation document (JSON bytes or str)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: line {exc.lineno}, {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    n = _require(doc, "n", int)
    rank = _require(doc, "rank", int)
    gens_raw = _require(doc, "generators", list)
    face_raw = _require(doc, "face", list)
    seed = _require(doc, "seed", int)
    if n < 2:
        raise SchemaError(f"field 'n' must be at least 2, got {n}")
    if rank < 1:
        raise SchemaError(f"field 'rank' must be at least 1, got {rank}")
    if len(gens_raw) != rank:
        raise SchemaError(
            f"field 'generators' has {len(gens_raw)} entries, expected rank={rank}"
        )
    notes = []
    generators = []
    for idx, flat in enumerate(gens_raw):
        label = f"generators[{idx}]"
        if not isinstance(flat, list) or len(flat) != n * n:
            raise SchemaError(f"{label}: expected {n * n} row-major floats")
        try:
            mat = np.array(flat, dtype=float).reshape(n, n)
        except (TypeError, ValueError):
            raise SchemaError(f"{label}: entries must be numbers") from None
        det = float(np.linalg.det(mat))
        if det <= 0.0 or abs(det - 1.0) > DET_RENORM_TOL:
            raise SchemaError(f"{label}: determinant {det!r} is not 1")
        if det != 1.0:
            mat = mat / det ** (1.0 / n)
            notes.append(f"{label}: determinant {det!r} renormalized")
        generators.append(GroupElement(mat, validate=False))
    try:
        face = FaceType(n, tuple(int(k) for k in face_raw))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field 'face': {exc}") from None
    if "basepoint" in doc and doc["basepoint"] is not None:
        rows = doc["basepoint"]
        if not isinstance(rows, list) or len(rows) != n:
            raise SchemaError(f"field 'basepoint': expected {n} rows")
        try:
            bp = np.array(rows, dtype=float).reshape(n, n)
        except (TypeError, ValueError):
            raise SchemaError("field 'basepoint': entries must be numbers") from None
        try:
            basepoint = Point(bp)
        except Exception as exc:
            raise SchemaError(f"field 'basepoint': {exc}") from None
    else:
        basepoint = identity_point(n)
    return RepresentationInput(n, rank, generators, face, basepoint, seed, notes)


def representation_dict(rep):
    """Canonical plain-dict form of a representation input."""
    return {
        "n": rep.n,
        "rank": rep.rank,
        "generators": [list(map(float, g.mat.reshape(-1))) for g in rep.generators],
        "face": list(rep.face.dims),
        "basepoint": [list(map(float, row)) for row in rep.basepoint.mat],
        "seed": rep.seed,
    }


def save_report(report):
    """Canonical JSON bytes: sorted keys, no whitespace, UTF-8."""
    return json.dumps(report, sort_keys=True, separators=(",", ":")).encode("utf-8")


def canonical_representation_bytes(rep):
    return save_report(representation_dict(rep))


def certificate_dict(cert):
    return {
        "status": "certified",
        "tool": TOOL_VERSION,
        "schedule_index": cert.schedule_index,
        "params": {
            "theta_margin": cert.params.theta.margin,
            "eps": cert.params.eps,
            "spacing": cert.params.spacing,
            "scale": cert.params.scale,
        },
        "words_checked": cert.words_checked,
        "worst_angle_defect": cert.worst_angle_defect,
        "worst_margin": cert.worst_margin,
        "worst_spacing": cert.worst_spacing,
        "rank": cert.rank,
        "n": cert.n,
        "empirical_schedule": cert.empirical_schedule,
    }


def not_certified_dict(res):
    if res.witness_word is not None:
        reason = "failed_check"
    elif res.truncated_words:
        reason = "truncated"
    else:
        reason = "budget_exhausted"
    return {
        "status": "not_certified",
        "tool": TOOL_VERSION,
        "reason": reason,
        "budget_exhausted": True,
        "witness_word": res.witness_word,
        "entries_tried": res.entries_tried,
        "words_checked": res.words_checked,
        "truncated_words": res.truncated_words,
        "first_truncated": res.first_truncated,
    }


def limit_set_csv(samples):
    """CSV rows: word, subspace dim k, n*k basis floats (column-major), margin."""
    lines = []
    for word, flag, margin in samples:
        n = flag.n
        for k in flag.face.dims:
            basis = flag.subspace(k)
            floats = [repr(float(v)) for v in basis.reshape(-1, order="F")]
            lines.append(",".join([word, str(k)] + floats + [repr(float(margin))]))
    return "\n".join(lines) + "\n"


def expansion_series_csv(report):
    lines = ["n,log_expansion"]
    for n, value in report.series:
        lines.append(f"{n},{value!r}")
    return "\n".join(lines) + "\n"
