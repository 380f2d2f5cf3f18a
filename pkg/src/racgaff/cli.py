"""Command-line front end: every pipeline behind one subcommand.

Reports are canonical JSON (CSV or SVG where per-pair records exist),
assembled single-threaded after the parallel parts finish, so identical
configs and seeds produce byte-identical output.  Exit codes: 0 when
every verdict passes, 2 when some verdict fails, 3 for configuration
mistakes, 4 when a numerical certificate refuses.

Rationals arrive on the command line as "p/q" strings — never floats —
so the exact pipeline stays exact.  The cosh-ratio coloring pipeline is
float-valued anyway and takes plain decimals too ("0.3" and "3/10" both
parse).
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

from .coloring import (
    build_120cell,
    build_disjoint_walls,
    build_kgon,
    lipschitz_ratio_sweep,
    margulis_demo,
    polytope_to_json,
)
from .coxeter import CoxeterGraph, check_word, enumerate_ball
from .errors import ConfigError, RacgaffError
from .exact import rational
from .gram import (
    GramFamily,
    exceptional_intervals,
    far_left_sample,
    perron,
    represent,
    require_same_segment,
    signature_profile,
)
from .hpq import random_lie_element
from .normalize import CocycleTable, build_normalizer
from .reports import canonical_json, csv_text, envelope, svg_scatter
from .verify import (
    estimate_spacelike_lipschitz,
    estimate_vf_lipschitz,
    properness_probe_affine,
    properness_probe_group,
    quadric_expansion_check,
    sample_orbit,
    spacelike_escape_check,
)

PASS_VERDICTS = frozenset({"pass", "contracting", "vacuous"})


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 3).

    The widened negative-number matcher lets values like ``-19/10`` or
    ``-4/1:-1/1`` follow an option without being mistaken for flags.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # argparse stores this on the instance, so a class attribute
        # would be shadowed
        self._negative_number_matcher = re.compile(
            r"^-\d+([./]\d+)?(:-?\d+([./]\d+)?)?$")

    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# argument coercion
# ---------------------------------------------------------------------------

def _parse_rational(text):
    try:
        return rational(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError("not a rational 'p/q': %r" % (text,)) from None


def _rational_arg(text):
    try:
        return _parse_rational(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_arg(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("not a number: %r" % (text,)) \
            from None


def _word_arg(text):
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(piece) for piece in text.split("."))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "words are dot-separated generator indices like 1.2.1, got %r"
            % (text,)) from None


def _word_string(word):
    return ".".join(str(g) for g in word)


def _add_graph_arguments(sub):
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", metavar="NAME",
                       help="free(k), cycle(k) or complete2(k)")
    group.add_argument("--graph", metavar="FILE",
                       help='graph JSON {"k": .., "infinite_edges": [[i, j], ..]}')


def _add_output_arguments(sub, formats=("json",)):
    sub.add_argument("--out", metavar="FILE",
                     help="write the report here instead of stdout")
    if len(formats) > 1:
        sub.add_argument("--format", choices=formats, default="json")


def _load_graph(args):
    if args.preset:
        return CoxeterGraph.preset(args.preset)
    try:
        data = json.loads(Path(args.graph).read_text())
    except OSError as exc:
        raise ConfigError("cannot read graph file: %s" % exc) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("graph file is not JSON: %s" % exc) from None
    if isinstance(data, dict) and "k" not in data and "graph" in data:
        data = data["graph"]      # a full export bundle round-trips
    return CoxeterGraph.from_json(data)


def _emit(args, text):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _verdict_exit(*verdicts):
    return 0 if all(v in PASS_VERDICTS for v in verdicts) else 2


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_profile(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    if args.range:
        pieces = args.range.split(":")
        if len(pieces) != 2:
            raise ConfigError("--range wants 'lo:hi' rationals, got %r"
                              % (args.range,))
        lo, hi = (_parse_rational(piece) for piece in pieces)
    else:
        lo, hi = far_left_sample(fam), Fraction(-1)
    prof = signature_profile(fam, lo, hi)
    ray = exceptional_intervals(fam)
    segments = [{"interval": [str(a), str(b)], "signature": [pos, neg]}
                for (a, b), (pos, neg) in prof.segments]
    body = {
        "ray_exceptional": [[str(a), str(b)] for a, b in ray],
        "exceptional_intervals": [[str(a), str(b)]
                                  for a, b in prof.exceptional_intervals],
        "segments": segments,
        "suggested_interval": segments[0]["interval"] if segments else None,
    }
    config = {"command": "profile", "graph": graph.to_json(),
              "range": [str(lo), str(hi)]}
    _emit(args, canonical_json(envelope("profile", config, body)))
    return 0


def cmd_rep(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    check_word(graph, args.word)
    mat = represent(fam, args.word, args.t)
    body = {
        "word": _word_string(args.word),
        "matrix": [[str(x) for x in row] for row in mat],
        "matrix_float": [[float(x) for x in row] for row in mat],
    }
    config = {"command": "rep", "graph": graph.to_json(), "t": str(args.t),
              "word": _word_string(args.word)}
    _emit(args, canonical_json(envelope("rep", config, body)))
    return 0


def cmd_perron(args):
    graph = _load_graph(args)
    per = perron(GramFamily(graph))
    body = {
        "lambda": per.lambda_pf,
        "residual": per.residual,
        "vector": [float(x) for x in per.v_pf],
        "lambda_exact": None if per.lambda_exact is None
        else str(per.lambda_exact),
        "vector_exact": None if per.v_exact is None
        else [str(x) for x in per.v_exact],
    }
    config = {"command": "perron", "graph": graph.to_json()}
    _emit(args, canonical_json(envelope("perron", config, body)))
    return 0


def cmd_orbit(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    orb = sample_orbit(fam, args.t, args.len, workers=args.workers)
    sphere = Counter(len(w) for w, _ in orb.points)
    body = {
        "count": len(orb.points),
        "sphere_sizes": {str(n): sphere[n] for n in sorted(sphere)},
        "base_word": _word_string(orb.base_word),
        "points": [{"word": _word_string(w),
                    "lift": [float(c) for c in lift]}
                   for w, lift in orb.points],
    }
    config = {"command": "orbit", "graph": graph.to_json(), "t": str(args.t),
              "max_length": args.len}
    _emit(args, canonical_json(envelope("orbit", config, body)))
    return 0


def cmd_cocycle(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    norm = build_normalizer(fam, args.t)
    table = CocycleTable(fam, norm)
    if args.words:
        words = args.words
    else:
        words = sorted(set(enumerate_ball(graph, args.len)),
                       key=lambda w: (len(w), w))
    for w in words:
        check_word(graph, w)
        table.u(w)
    body = {"word_count": len(words), "table": table.to_json()}
    config = {"command": "cocycle", "graph": graph.to_json(),
              "t": str(args.t),
              "words": [_word_string(w) for w in words] if args.words
              else None,
              "max_length": None if args.words else args.len}
    _emit(args, canonical_json(envelope("cocycle", config, body)))
    return 0


def cmd_verify(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    t, s = args.t, args.s
    require_same_segment(fam, t, s)
    if t > s:
        raise ConfigError("need t <= s inside the segment, got t = %s > s = %s"
                          % (t, s))
    warnings = []
    if t == s:
        warnings.append("t = s: the squeeze map is the identity and every "
                        "spacelike ratio is 1")

    orb = sample_orbit(fam, t, args.len, workers=args.workers)
    map_report = estimate_spacelike_lipschitz(
        fam, t, s, orb, threshold=args.threshold, workers=args.workers)
    field_report = estimate_vf_lipschitz(
        fam, t, orb, threshold=args.threshold, workers=args.workers)
    escape = spacelike_escape_check(fam, t, orb)
    quadric = quadric_expansion_check(fam, t, args.quadric_samples,
                                      seed=args.seed)
    norm_t = build_normalizer(fam, t)
    norm_s = build_normalizer(fam, s)
    probe_words = sorted(set(enumerate_ball(graph, args.probe_len)),
                         key=lambda w: (len(w), w))
    group = properness_probe_group(norm_t, norm_s, probe_words)
    rng = random.Random(args.seed)
    y_samples = [random_lie_element(norm_t.form, rng, scale=0.5)
                 for _ in range(args.y_count)]
    affine = properness_probe_affine(norm_t, CocycleTable(fam, norm_t), orb,
                                     y_samples, seed=args.seed,
                                     workers=args.workers)

    verdicts = {
        "map": map_report.verdict,
        "field": field_report.verdict,
        "escape": escape.verdict,
        "quadric": quadric.verdict,
        "group": group.verdict,
        "affine": affine.verdict,
    }
    overall = "pass" if all(v in PASS_VERDICTS for v in verdicts.values()) \
        else "fail"
    config = {
        "command": "verify", "graph": graph.to_json(),
        "t": str(t), "s": str(s), "max_length": args.len,
        "threshold": args.threshold, "quadric_samples": args.quadric_samples,
        "probe_length": args.probe_len, "y_count": args.y_count,
        "seed": args.seed,
    }
    if args.format == "csv":
        _emit(args, csv_text(map_report.csv_rows()))
    elif args.format == "svg":
        slope, intercept = map_report.fitted
        _emit(args, svg_scatter(
            map_report.before, map_report.after,
            lines=((1.0, 0.0, "ratio 1"),
                   (slope, intercept, "fit %.4f x + %.4f"
                    % (slope, intercept))),
            title="spacelike pairs, t=%s vs s=%s" % (t, s),
            xlabel="d(x, y)", ylabel="d(f x, f y)"))
    else:
        body = {
            "orbit": {"count": len(orb.points), "max_length": args.len,
                      "base_word": _word_string(orb.base_word)},
            "map": map_report.to_json(),
            "field": field_report.to_json(),
            "escape": escape.to_json(),
            "quadric": quadric.to_json(),
            "group": group.to_json(),
            "affine": affine.to_json(),
            "verdicts": verdicts,
            "verdict": overall,
            "warnings": warnings,
        }
        _emit(args, canonical_json(envelope("verify", config, body)))
    return 0 if overall == "pass" else 2


def _coloring_counts(poly):
    degree = Counter()
    for i, j in poly.adjacency:
        degree[i] += 1
        degree[j] += 1
    return {
        "faces": poly.k,
        "p": poly.p,
        "colors": poly.m + 1,
        "edges": len(poly.adjacency),
        "degrees": sorted(set(degree.values())) if degree else [0],
        "class_sizes": sorted(Counter(poly.coloring).values()),
    }


def cmd_coloring(args):
    if (args.t is None) != (args.s is None):
        raise ConfigError("--t and --s come together")
    sweep = None
    if args.kgon is not None:
        poly = build_kgon(args.kgon)
        mode = "kgon"
        extra = {}
        verdict = "pass"
    elif args.cell120:
        poly = build_120cell(exact=not args.float_normals)
        mode = "120cell"
        counts = _coloring_counts(poly)
        checks = {
            "cells": poly.k == 120,
            "twelve_regular": counts["degrees"] == [12],
            "edges": counts["edges"] == 720,
            "five_colors": sorted(set(poly.coloring)) == [0, 1, 2, 3, 4],
            "classes_of_24": counts["class_sizes"] == [24] * 5,
            "proper": all(poly.coloring[i] != poly.coloring[j]
                          for i, j in poly.adjacency),
        }
        extra = {"checks": checks}
        verdict = "pass" if all(checks.values()) else "fail"
    else:
        t = 0.3 if args.t is None else args.t
        s = 0.4 if args.s is None else args.s
        report = margulis_demo(args.margulis, t=t, s=s, pairs=args.pairs,
                               seed=args.seed, workers=args.workers)
        poly = build_disjoint_walls(args.margulis)
        mode = "margulis"
        extra = {"margulis": report.to_json()}
        verdict = report.verdict
    body = {"mode": mode, "polytope": _coloring_counts(poly)}
    body.update(extra)
    if args.dump:
        body["normals"] = polytope_to_json(poly)
    if mode != "margulis" and args.t is not None:
        sweep = lipschitz_ratio_sweep(poly, args.t, args.s, pairs=args.pairs,
                                      seed=args.seed, workers=args.workers)
        body["sweep"] = sweep.to_json()
        if verdict == "pass":
            verdict = sweep.verdict
    body["verdict"] = verdict
    config = {
        "command": "coloring", "mode": mode,
        "kgon": args.kgon, "margulis": args.margulis,
        "exact": not args.float_normals,
        "t": args.t, "s": args.s, "pairs": args.pairs, "seed": args.seed,
    }
    _emit(args, canonical_json(envelope("coloring", config, body)))
    return _verdict_exit(verdict)


def cmd_export(args):
    graph = _load_graph(args)
    fam = GramFamily(graph)
    norm = build_normalizer(fam, args.t)
    table = CocycleTable(fam, norm)
    words = sorted(set(enumerate_ball(graph, args.len)),
                   key=lambda w: (len(w), w))
    reps = {}
    for w in words:
        table.u(w)
        reps[_word_string(w)] = [[str(x) for x in row]
                                 for row in represent(fam, w, args.t)]
    body = {
        "graph": graph.to_json(),
        "t": str(args.t),
        "representation": reps,
        "cocycle": table.to_json(),
    }
    config = {"command": "export", "graph": graph.to_json(),
              "t": str(args.t), "max_length": args.len}
    _emit(args, canonical_json(envelope("export", config, body)))
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(
        prog="racgaff",
        description="Affine deformations of right-angled Coxeter groups: "
                    "exact Gram families, contraction diagnostics, polytope "
                    "colorings.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="SUBCOMMAND")

    profile = sub.add_parser(
        "profile", help="exceptional set and signature segments on a range")
    _add_graph_arguments(profile)
    profile.add_argument("--range", metavar="LO:HI",
                         help="rational range, e.g. -4/1:-1/1 "
                              "(default: from far left up to -1)")
    _add_output_arguments(profile)
    profile.set_defaults(func=cmd_profile)

    rep = sub.add_parser("rep", help="exact reflection-representation matrix")
    _add_graph_arguments(rep)
    rep.add_argument("--t", type=_rational_arg, required=True)
    rep.add_argument("--word", type=_word_arg, default=(),
                     help="dot-separated generators, e.g. 1.2.1 "
                          "(default: identity)")
    _add_output_arguments(rep)
    rep.set_defaults(func=cmd_rep)

    per = sub.add_parser("perron", help="Perron-Frobenius data of N")
    _add_graph_arguments(per)
    _add_output_arguments(per)
    per.set_defaults(func=cmd_perron)

    orbit = sub.add_parser("orbit", help="orbit sample of the Perron point")
    _add_graph_arguments(orbit)
    orbit.add_argument("--t", type=_rational_arg, required=True)
    orbit.add_argument("--len", type=int, default=3,
                       help="word-length radius (default 3)")
    orbit.add_argument("--workers", type=int, default=1)
    _add_output_arguments(orbit)
    orbit.set_defaults(func=cmd_orbit)

    coc = sub.add_parser("cocycle", help="translation-part cocycle table")
    _add_graph_arguments(coc)
    coc.add_argument("--t", type=_rational_arg, required=True)
    coc.add_argument("--len", type=int, default=2,
                     help="fill all normal forms up to this length")
    coc.add_argument("--words", type=_word_arg, nargs="+", metavar="WORD",
                     help="explicit words instead of a ball")
    _add_output_arguments(coc)
    coc.set_defaults(func=cmd_cocycle)

    verify = sub.add_parser(
        "verify", help="full contraction/properness bundle at (t, s)")
    _add_graph_arguments(verify)
    verify.add_argument("--t", type=_rational_arg, required=True)
    verify.add_argument("--s", type=_rational_arg, required=True)
    verify.add_argument("--len", type=int, default=4,
                        help="orbit word-length radius (default 4)")
    verify.add_argument("--threshold", type=_float_arg, default=1.0,
                        help="distance floor for ratio statistics")
    verify.add_argument("--quadric-samples", type=int, default=200)
    verify.add_argument("--probe-len", type=int, default=4,
                        help="word length for the eigenvalue-gauge probe")
    verify.add_argument("--y-count", type=int, default=2,
                        help="Killing fields for the affine probe")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--workers", type=int, default=1)
    _add_output_arguments(verify, formats=("json", "csv", "svg"))
    verify.set_defaults(func=cmd_verify)

    coloring = sub.add_parser(
        "coloring", help="colored-polytope pipeline (kgon | 120cell | "
                         "margulis)")
    which = coloring.add_mutually_exclusive_group(required=True)
    which.add_argument("--kgon", type=int, metavar="K",
                       help="right-angled k-gon with the parity coloring")
    which.add_argument("--120cell", action="store_true", dest="cell120",
                       help="the right-angled 120-cell, quaternionic "
                            "5-coloring")
    which.add_argument("--margulis", type=int, metavar="K",
                       help="k disjoint walls, single color, o(2,1) cocycle")
    coloring.add_argument("--t", type=_float_arg, default=None)
    coloring.add_argument("--s", type=_float_arg, default=None)
    coloring.add_argument("--pairs", type=int, default=2000,
                          help="sample pairs for the ratio sweep")
    coloring.add_argument("--seed", type=int, default=0)
    coloring.add_argument("--workers", type=int, default=1)
    coloring.add_argument("--float-normals", action="store_true",
                          help="decide the 120-cell neighbor graph with a "
                               "float band instead of exact arithmetic")
    coloring.add_argument("--dump", action="store_true",
                          help="include the full normals table")
    _add_output_arguments(coloring)
    coloring.set_defaults(func=cmd_coloring)

    export = sub.add_parser(
        "export", help="representation and cocycle dumps for a word ball")
    _add_graph_arguments(export)
    export.add_argument("--t", type=_rational_arg, required=True)
    export.add_argument("--len", type=int, default=2)
    _add_output_arguments(export)
    export.set_defaults(func=cmd_export)

    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def main(argv=None):
    try:
        return run(argv)
    except RacgaffError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
