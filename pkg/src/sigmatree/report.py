"""Stable structured reports for the command-line frontend.

Reports are plain dicts with deterministic content; the JSON form is
rendered with sorted keys so identical invocations produce byte-identical
output.  The human-readable form is a fixed-order line rendering of the
same data.
"""

from __future__ import annotations

import json

from . import __version__
from .classify import Verdict
from .model import PTP, ValidationReport, local_properties
from .multiplicity import mult_to_doc


def base_report(name: str, source: str) -> dict:
    return {
        "tool": {"name": "sigmatree", "version": __version__},
        "input": {"name": name, "source": source},
    }


def validation_section(report: ValidationReport) -> dict:
    return report.as_doc()


def stars_section(ptp: PTP) -> dict:
    return {
        "upstairs": {
            t: mult_to_doc(ptp.upstairs.star_size(t))
            for t in ptp.upstairs.vertex_types
        },
        "downstairs": {
            t: mult_to_doc(ptp.downstairs.star_size(t))
            for t in ptp.downstairs.vertex_types
        },
    }


def analysis_sections(ptp: PTP) -> dict:
    from .model import applicability_check

    return {
        "stars": stars_section(ptp),
        "local_properties": local_properties(ptp).as_doc(),
        "applicability": applicability_check(ptp).as_doc(),
    }


def verdict_sections(verdict: Verdict) -> dict:
    doc = verdict.as_doc()
    doc["viability_digraph"] = verdict.digraph.as_doc()
    return doc


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _sigma_line(report: dict) -> str:
    sigma = report.get("sigma1")
    if sigma == "empty":
        return "sigma-1: Σ¹ = ∅ (every end is faced by a collapsing pair)"
    if sigma == "at_most_one":
        cand = report["candidate"]["text"]
        return f"sigma-1: Σ¹ ⊆ {{E₀}} with E₀ = {cand} (the unique unfaced end)"
    return "sigma-1: Σ¹ = unknown (hypotheses not satisfied or inconclusive)"


def to_text(report: dict) -> str:
    """Fixed-order human-readable rendering of a report."""
    lines = [
        f"sigmatree {report['tool']['version']} — {report['input']['name']} "
        f"({report['input']['source']})"
    ]
    if "validation" in report:
        v = report["validation"]
        lines.append(f"validation: {'ok' if v['ok'] else 'FAILED'}")
        for item in v.get("violations", []):
            lines.append(f"  violation [{item['code']}]: {item['message']}")
        for w in v.get("warnings", []):
            lines.append(f"  warning: {w}")
    if "stars" in report:
        ups = ", ".join(f"{t}={s}" for t, s in report["stars"]["upstairs"].items())
        dns = ", ".join(f"{t}={s}" for t, s in report["stars"]["downstairs"].items())
        lines.append(f"stars: upstairs {ups}; downstairs {dns}")
    if "local_properties" in report:
        lp = report["local_properties"]
        lines.append(
            f"local properties: locally_surjective={lp['locally_surjective']} "
            f"locally_injective={lp['locally_injective']} "
            f"collapsing_cells={len(lp['collapsing_cells'])}"
        )
    if "applicability" in report:
        ap = report["applicability"]
        lines.append(
            "applicability: "
            + " ".join(f"{k}={v}" for k, v in sorted(ap.items()))
        )
    if "marked" in report:
        marks = ", ".join(
            f"({m['vertex_type']},{m['class']})={m['status']}"
            for m in report["marked"] if m["status"] != "unmarked"
        ) or "none"
        lines.append(f"marked classes: {marks}")
    if "clean" in report:
        lines.append(
            "clean pairs: "
            + (", ".join(f"({v},{c})" for v, c in report["clean"]) or "none")
        )
    if "classification" in report:
        c = report["classification"]
        extra = ""
        if "candidate" in c:
            extra = f" candidate={c['candidate']['text']}"
        if "reason" in c:
            extra += f" reason={c['reason']}"
        lines.append(f"classification: {c['kind']}{extra}")
        if c.get("consistency_violation"):
            lines.append("  CONSISTENCY VIOLATION: see notes")
    if "sigma1" in report:
        lines.append(_sigma_line(report))
    for n in report.get("notes", []):
        lines.append(f"note: {n}")
    if "faces" in report:
        f = report["faces"]
        lines.append(
            f"end {f['end']}: faced={f['faced']} fiber_singleton={f['fiber_singleton']}"
        )
    if "lift" in report:
        li = report["lift"]
        lines.append(
            f"lift of {li['ray']} to depth {li['depth']}: "
            f"{li['total_lifts']} lifts from {li['initial_count']} initial edges"
        )
        for entry in li["per_initial"]:
            lines.append(
                f"  initial {entry['initial']}: counts {entry['branch_counts']}"
            )
    if "expand" in report:
        ex = report["expand"]
        lines.append(
            f"balls: up {ex['up']['vertices']} vertices (radius {ex['up']['radius']}"
            + (", truncated" if ex["up"]["truncated"] else "")
            + f"), down {ex['down']['vertices']} vertices"
        )
        if ex.get("dot"):
            lines.append(f"  dot written to {ex['dot']}")
    if "oracle" in report:
        o = report["oracle"]
        lines.append(
            f"oracle cone scan at depth {o['cones']['depth']}: "
            f"{o['cones']['cones']} cones, unfaced {o['cones']['unfaced']}"
            + (" [truncated ball: negatives not exhaustive]"
               if o["cones"]["truncated"] else "")
        )
        if "unfaced_vertices" in o:
            lines.append(f"  unfaced vertices <= depth: {o['unfaced_vertices']}")
        for row in o.get("connectivity", []):
            lines.append(
                f"  horoball preimage r={row['r']}: "
                + ("connected" if row["connected"] else "DISCONNECTED")
            )
    if "witness" in report:
        w = report["witness"]
        lines.append(
            f"witness (lag {w['lag']}): verified={w['verified']} "
            f"apex_busemann={w['apex']['image_busemann']} "
            f"image_class={w['image_edge']['class']}"
        )
        lines.append(
            "  probes separated in horoball preimage: "
            f"{w['probes_separated']}"
        )
    return "\n".join(lines) + "\n"
