"""Command-line frontend.

Subcommands: validate, analyze, classify, faces, witness, lift, expand,
oracle, example.  Reports go to standard output, structured JSON with
``--json``, a fixed-order human rendering otherwise; identical
invocations produce byte-identical output.

Exit codes: 0 success; 1 invalid input, validation failure or an
unsatisfiable request (for instance a witness for an unfaced end);
2 internal consistency violation; 3 inconclusive (partially marked
classes, insufficient depth, or an exhausted vertex budget).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report as rpt
from .ball import MappedBallPair, ball_to_dot, expand_pair, pair_to_dot
from .classify import parse_endspec, realize_ray, sigma_verdict
from .corpus import corpus_names, load_example
from .errors import (BallBudgetExceeded, BallTooShallow, ConsistencyViolation,
                     EndNotFaced, InconclusiveMarking, SigmatreeError)
from .lifting import base_type_over, lift_initials, lift_ray, q_fiber_singleton
from .model import applicability_check, local_properties, validate_document
from .oracle import (brute_connectivity_check, brute_face_scan,
                     same_preimage_component, unfaced_vertices)
from .witness import disconnection_witness

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONSISTENT = 2
EXIT_INCONCLUSIVE = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sigmatree",
        description="classify the sigma-1 set of a tree quotient map from "
                    "finite quotient-level data",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, needs_file=True):
        sp = sub.add_parser(name, help=help_)
        if needs_file:
            sp.add_argument("file", help="tree-pair document (JSON)")
        sp.add_argument("--json", action="store_true", help="structured output")
        return sp

    add("validate", "parse a document and check every invariant")
    add("analyze", "local properties and applicability of the map")

    sp = add("classify", "full sigma-1 verdict with certificates")
    sp.add_argument("--assume-fn-stabilizers", action="store_true",
                    help="add the conditional sigma-n note for the candidate end")

    sp = add("faces", "is a given end faced by a collapsing pair?")
    sp.add_argument("--end", required=True,
                    help="end as 'prefix;cycle', comma-separated class ids, "
                         "optional #index")

    sp = add("witness", "construct and verify a disconnection witness")
    sp.add_argument("--end", required=True)
    sp.add_argument("--lag", type=int, default=1)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--omega-cap", type=int, default=4)
    sp.add_argument("--budget", type=int, default=4_000_000)
    sp.add_argument("--dot", metavar="PATH", help="write a DOT rendering")

    sp = add("lift", "enumerate lifts of a concrete ray")
    sp.add_argument("--ray", required=True, help="ray as 'prefix;cycle'")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--omega-cap", type=int, default=4)
    sp.add_argument("--budget", type=int, default=4_000_000)

    sp = add("expand", "materialize the ball pair and report its shape")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--omega-cap", type=int, default=4)
    sp.add_argument("--budget", type=int, default=4_000_000)
    sp.add_argument("--dot", metavar="PATH", help="write a DOT rendering")

    sp = add("oracle", "brute-force cone scan and horoball connectivity")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--end", help="also check horoball preimage connectivity")
    sp.add_argument("--lag", type=int, default=2,
                    help="connectivity checked for r in [-lag, lag]")
    sp.add_argument("--omega-cap", type=int, default=4)
    sp.add_argument("--budget", type=int, default=4_000_000)

    sp = sub.add_parser("example", help="print a built-in document")
    sp.add_argument("name", nargs="?", help="entry name; omit to list")
    sp.add_argument("--json", action="store_true")
    return p


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SigmatreeError(f"cannot read {path}: {exc}") from exc
    ptp, report = validate_document(text)
    return ptp, report


def _emit(report: dict, as_json: bool) -> None:
    sys.stdout.write(rpt.to_json(report) if as_json else rpt.to_text(report))


def _default_end_base(ptp) -> str:
    return ptp.vertex_map[sorted(ptp.upstairs.vertex_types)[0]]


def _cmd_validate(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is not None:
        out["stars"] = rpt.stars_section(ptp)
    _emit(out, args.json)
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_analyze(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    out.update(rpt.analysis_sections(ptp))
    _emit(out, args.json)
    return EXIT_OK


def _cmd_classify(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    out.update(rpt.analysis_sections(ptp))
    verdict = sigma_verdict(ptp, fn_stabilizers_assumed=args.assume_fn_stabilizers)
    out.update(rpt.verdict_sections(verdict))
    _emit(out, args.json)
    c = verdict.classification
    if c.consistency_violation:
        return EXIT_INCONSISTENT
    if c.cause == "partial_marks":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cmd_faces(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    spec = parse_endspec(args.end, _default_end_base(ptp), ptp)
    from .classify import end_is_faced

    faced = end_is_faced(ptp, spec)
    singleton = None
    if local_properties(ptp).locally_surjective:
        singleton = q_fiber_singleton(ptp, spec)
    out["faces"] = {
        "end": spec.render(),
        "base_type": spec.base_type,
        "faced": faced,
        "fiber_singleton": singleton,
    }
    _emit(out, args.json)
    return EXIT_OK


def _cmd_witness(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    spec = parse_endspec(args.end, _default_end_base(ptp), ptp)
    w = disconnection_witness(ptp, spec, lag=args.lag, depth=args.depth,
                              omega_cap=args.omega_cap)
    doc = w.as_doc()
    doc["end"] = spec.render()
    doc["probes_separated"] = not same_preimage_component(
        w.pair, w.tau, -args.lag, *w.probes
    )
    out["witness"] = doc
    if args.dot:
        marked = {w.image_edge}
        spine = set(w.tau.edges)
        Path(args.dot).write_text(
            ball_to_dot(w.pair.down, "witness_down", marked=marked, spine=spine)
        )
        out["witness"]["dot"] = args.dot
    _emit(out, args.json)
    return EXIT_OK if w.verified else EXIT_INCONSISTENT


def _cmd_lift(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    spec = parse_endspec(args.ray, _default_end_base(ptp), ptp)
    pair = MappedBallPair(ptp, base_type_over(ptp, spec.base_type),
                          args.omega_cap, args.budget)
    pair.down.expand_uniformly(1)
    ray = realize_ray(pair.down, spec, args.depth)
    pair.expand_to_radius(1)
    per_initial = []
    total = 0
    for initial in lift_initials(pair, ray.edges[0]):
        tree = lift_ray(pair, ray, initial, args.depth)
        per_initial.append({
            "initial": int(initial),
            "branch_counts": list(tree.branch_counts),
            "lifts": len(tree.lifts),
        })
        total += len(tree.lifts)
    out["lift"] = {
        "ray": spec.render(),
        "depth": args.depth,
        "initial_count": len(per_initial),
        "per_initial": per_initial,
        "total_lifts": total,
    }
    _emit(out, args.json)
    return EXIT_OK


def _cmd_expand(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    base = sorted(ptp.upstairs.vertex_types)[0]
    pair = expand_pair(ptp, base, args.depth, args.omega_cap, args.budget)
    out["expand"] = {
        "base_type": base,
        "up": {
            "vertices": pair.up.n_vertices,
            "edges": pair.up.n_edges,
            "radius": pair.up.radius,
            "truncated": pair.up.truncated,
        },
        "down": {
            "vertices": pair.down.n_vertices,
            "edges": pair.down.n_edges,
            "radius": pair.down.radius,
        },
    }
    if args.dot:
        Path(args.dot).write_text(pair_to_dot(pair))
        out["expand"]["dot"] = args.dot
    _emit(out, args.json)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    ptp, report = _load(args.file)
    out = rpt.base_report(ptp.name if ptp else Path(args.file).stem, args.file)
    out["validation"] = report.as_doc()
    if ptp is None:
        _emit(out, args.json)
        return EXIT_INVALID
    base = sorted(ptp.upstairs.vertex_types)[0]
    pair = expand_pair(ptp, base, args.depth, args.omega_cap, args.budget)
    rep = brute_face_scan(pair, args.depth)
    # vertex facedness is only asserted where the ball certainly contains
    # the facing pair: marks recur within the worst clean-deletion round
    from .classify import clean_pairs_detailed, marked_classes

    _, death = clean_pairs_detailed(ptp, marked_classes(ptp))
    margin = max(death.values(), default=0)
    vertex_bound = max(args.depth - margin - 1, 0)
    oracle_doc = {
        "cones": rep.as_doc(),
        "vertex_scan_depth": vertex_bound,
        "unfaced_vertices": unfaced_vertices(pair, vertex_bound),
    }
    if args.end:
        spec = parse_endspec(args.end, _default_end_base(ptp), ptp)
        tau = realize_ray(pair.down, spec, args.depth)
        rows = []
        for r in range(-args.lag, args.lag + 1):
            rows.append({
                "r": r,
                "connected": brute_connectivity_check(pair, tau, r),
            })
        oracle_doc["end"] = spec.render()
        oracle_doc["connectivity"] = rows
    out["oracle"] = oracle_doc
    _emit(out, args.json)
    return EXIT_OK


def _cmd_example(args) -> int:
    if not args.name:
        listing = {"examples": corpus_names()}
        if args.json:
            sys.stdout.write(rpt.to_json(listing))
        else:
            sys.stdout.write("\n".join(corpus_names()) + "\n")
        return EXIT_OK
    entry = load_example(args.name)
    sys.stdout.write(entry.document)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "analyze": _cmd_analyze,
    "classify": _cmd_classify,
    "faces": _cmd_faces,
    "witness": _cmd_witness,
    "lift": _cmd_lift,
    "expand": _cmd_expand,
    "oracle": _cmd_oracle,
    "example": _cmd_example,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InconclusiveMarking, BallTooShallow, BallBudgetExceeded) as exc:
        sys.stderr.write(f"inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE
    except ConsistencyViolation as exc:
        sys.stderr.write(f"consistency violation: {exc}\n")
        return EXIT_INCONSISTENT
    except (SigmatreeError, EndNotFaced) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
