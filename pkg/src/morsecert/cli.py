"""Command-line surface: certify, schottky-search, limitset,
expansion-report, check-path.

Exit codes: 0 success, 1 malformed input, 2 check budget exhausted.  JSON
and CSV outputs are deterministic for a fixed seed and budget; worker
count only affects wall time.
"""

import argparse
import os
import sys

import numpy as np

from .cartan import ThetaSet, cartan_vector
from .errors import MorsecertError, SchemaError
from .flags import canonical_zeta, group_shadow
from .morse import Certificate, StraightnessParams, certify_action, check_path_morse
from .repio import (
    alphabet,
    certificate_dict,
    expansion_series_csv,
    inverse_letter,
    limit_set_csv,
    load_representation,
    not_certified_dict,
    orbit_path,
    save_report,
)
from .schottky import PowerSearchResult, antipodality_audit, limit_set_sample, power_search

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2


def _load(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    rep = load_representation(data)
    env_seed = os.environ.get("MORSECERT_SEED")
    if env_seed is not None:
        rep.seed = int(env_seed)
    for note in rep.notes:
        print(f"note: {note}")
    return rep


def _write_out(path, payload):
    if path is None:
        return
    mode = "wb" if isinstance(payload, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(payload)


def _schedule(rep, args):
    from .morse import default_schedule

    return default_schedule(rep.face, args.schedule_max, scale_cap=args.scale_cap)


def cmd_certify(args):
    rep = _load(args.rep_file)
    face = rep.face
    if args.face:
        from .cartan import FaceType

        face = FaceType(rep.n, tuple(int(k) for k in args.face.split(",")))
    sched = _schedule(rep, args)
    outcome = certify_action(
        rep.generators, rep.rank, face, sched, rep.basepoint, jobs=args.jobs
    )
    if isinstance(outcome, Certificate):
        doc = certificate_dict(outcome)
        doc["seed"] = rep.seed
        doc["schedule_entries"] = len(sched)
        _write_out(args.out, save_report(doc))
        print(
            f"certified at schedule index {outcome.schedule_index} "
            f"(theta margin {outcome.params.theta.margin:g}, eps {outcome.params.eps:g}, "
            f"spacing {outcome.params.spacing:g}, scale {outcome.params.scale}); "
            f"{outcome.words_checked} words, worst angle defect "
            f"{outcome.worst_angle_defect:.3e}"
        )
        return EXIT_OK
    doc = not_certified_dict(outcome)
    doc["seed"] = rep.seed
    doc["schedule_entries"] = len(sched)
    _write_out(args.out, save_report(doc))
    if outcome.witness_word is not None:
        print(
            f"not certified: witness word {outcome.witness_word!r} after "
            f"{outcome.words_checked} words over {outcome.entries_tried} schedule entries "
            "(budget exhausted)"
        )
    else:
        print(
            f"not certified: {outcome.truncated_words} words hit the condition "
            f"breaker over {outcome.entries_tried} schedule entries (budget exhausted)"
        )
    return EXIT_BUDGET


def cmd_schottky_search(args):
    rep = _load(args.rep_file)
    if rep.rank != 2:
        raise SchemaError(f"schottky search needs rank 2, document has {rep.rank}")
    theta = ThetaSet(rep.face, args.theta_margin)
    params = StraightnessParams(theta, args.eps, args.spacing, args.scale)
    zeta = canonical_zeta(rep.face)
    result = power_search(
        rep.generators[0],
        rep.generators[1],
        rep.basepoint,
        params,
        zeta,
        args.max_power,
        jobs=args.jobs,
    )
    if isinstance(result, PowerSearchResult):
        doc = certificate_dict(result.certificate)
        doc["status"] = "found"
        doc["m"] = result.m
        doc["n_power"] = result.n
        doc["seed"] = rep.seed
        _write_out(args.out, save_report(doc))
        print(
            f"found powers (m, n) = ({result.m}, {result.n}); certificate with "
            f"worst angle defect {result.certificate.worst_angle_defect:.3e}"
        )
        return EXIT_OK
    doc = {
        "status": "not_found",
        "budget_exhausted": True,
        "max_power": result.max_power,
        "attempts": result.attempts,
        "best_m": result.best_m,
        "best_n": result.best_n,
        "best_defect": result.best_defect,
        "seed": rep.seed,
    }
    _write_out(args.out, save_report(doc))
    print(
        f"no certified powers up to {result.max_power} "
        f"({result.attempts} pairs tried; budget exhausted)"
    )
    return EXIT_BUDGET


def cmd_limitset(args):
    rep = _load(args.rep_file)
    sample = limit_set_sample(
        rep.generators, rep.face, rep.basepoint, args.length
    )
    csv_text = limit_set_csv(sample.samples)
    _write_out(args.out, csv_text)
    print(
        f"{len(sample.samples)} limit flags at word length {args.length} "
        f"({sample.merged} merged, {len(sample.skipped)} skipped)"
    )
    if len(sample.samples) >= 2:
        margin, offender = antipodality_audit([f for _, f, _ in sample.samples])
        verdict = "pass" if offender is None else f"FAIL at pair {offender}"
        print(f"antipodality audit: min pairwise margin {margin:.6f} ({verdict})")
    return EXIT_OK


def _ray_letters(rep, word, steps):
    letters = list(word)
    for letter in letters:
        if letter not in alphabet(rep.rank):
            raise SchemaError(f"--ray letter {letter!r} outside the rank alphabet")
    ray = []
    while len(ray) < steps:
        ray.extend(letters)
    ray = ray[:steps]
    for a, b in zip(ray[:-1], ray[1:]):
        if b == inverse_letter(a):
            raise SchemaError(f"--ray repeats into a non-reduced word at {a}{b}")
    return ray


def cmd_expansion_report(args):
    from .dynamics import expansion_report
    from .morse import COND_CAP

    rep = _load(args.rep_file)
    ray = _ray_letters(rep, args.ray, args.steps)
    # limit flag approximated by the longest prefix under the breaker
    from .repio import letter_matrices

    mats = {k: g.mat for k, g in letter_matrices(rep.generators).items()}
    product = np.eye(rep.n)
    safe = None
    for letter in ray:
        nxt = product @ mats[letter]
        if np.linalg.cond(nxt) > COND_CAP:
            break
        product = nxt
        safe = product
    if safe is None:
        raise SchemaError("first ray letter already crosses the condition breaker")
    from .cartan import GroupElement

    tau = group_shadow(GroupElement(safe, validate=False), rep.basepoint, rep.face)
    report = expansion_report(rep.generators, ray, tau, rep.basepoint)
    _write_out(args.out, expansion_series_csv(report))
    mono = "monotone" if report.monotone else "NON-MONOTONE"
    print(
        f"expansion series over {args.steps} steps: slope {report.slope:.6f}, "
        f"intercept {report.intercept:.6f} ({mono})"
    )
    return EXIT_OK


def cmd_check_path(args):
    rep = _load(args.rep_file)
    word = args.word
    path = orbit_path(rep, word)
    theta = ThetaSet(rep.face, args.theta_margin)
    if args.quasi_l is None:
        steps = [
            cartan_vector(a, b).norm()
            for a, b in zip(path.points[:-1], path.points[1:])
        ]
        quasi_l = max(max(steps), 1.0)
    else:
        quasi_l = args.quasi_l
    report = check_path_morse(path, quasi_l, args.quasi_a, theta, args.max_distance)
    detail = report.details[0]
    print(
        f"quasigeodesic violations: {len(detail['qg_violations'])}; "
        f"diamond failures: {len(detail['diamond_failures'])}; "
        f"worst diamond distance {report.worst_spacing:.3e}"
    )
    print("check-path: PASS" if report.passed else "check-path: FAIL")
    return EXIT_OK if report.passed else EXIT_BUDGET


def build_parser():
    parser = argparse.ArgumentParser(
        prog="morsecert",
        description="Certify free-group matrix actions and inspect their flag dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="run the quadruple-condition schedule")
    cert.add_argument("rep_file")
    cert.add_argument("--face", default=None, help="comma-separated dims override")
    cert.add_argument("--schedule-max", type=int, default=6, dest="schedule_max")
    cert.add_argument("--scale-cap", type=int, default=None, dest="scale_cap")
    cert.add_argument("--jobs", type=int, default=1)
    cert.add_argument("--out", default=None)
    cert.set_defaults(func=cmd_certify)

    sch = sub.add_parser("schottky-search", help="sweep generator powers")
    sch.add_argument("rep_file")
    sch.add_argument("--max-power", type=int, default=32, dest="max_power")
    sch.add_argument("--theta-margin", type=float, default=0.25, dest="theta_margin")
    sch.add_argument("--eps", type=float, default=0.2)
    sch.add_argument("--spacing", type=float, default=1.0)
    sch.add_argument("--scale", type=int, default=1)
    sch.add_argument("--jobs", type=int, default=1)
    sch.add_argument("--out", default=None)
    sch.set_defaults(func=cmd_schottky_search)

    lim = sub.add_parser("limitset", help="sample and audit the flag limit set")
    lim.add_argument("rep_file")
    lim.add_argument("--length", type=int, default=6)
    lim.add_argument("--out", default=None)
    lim.set_defaults(func=cmd_limitset)

    exp = sub.add_parser("expansion-report", help="inverse-prefix expansion along a ray")
    exp.add_argument("rep_file")
    exp.add_argument("--ray", required=True, help="word repeated to fill the ray")
    exp.add_argument("--steps", type=int, default=20)
    exp.add_argument("--out", default=None)
    exp.set_defaults(func=cmd_expansion_report)

    chk = sub.add_parser("check-path", help="diamond closeness of one orbit path")
    chk.add_argument("rep_file")
    chk.add_argument("--word", required=True)
    chk.add_argument("--theta-margin", type=float, default=0.25, dest="theta_margin")
    chk.add_argument("--D", type=float, default=0.5, dest="max_distance")
    chk.add_argument("--L", type=float, default=None, dest="quasi_l")
    chk.add_argument("--A", type=float, default=0.0, dest="quasi_a")
    chk.set_defaults(func=cmd_check_path)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (SchemaError, MorsecertError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
