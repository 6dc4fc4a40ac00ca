"""Quotient-level description of a pair of trees and the map between them.

A tree pair is given entirely at the orbit level: vertex types, directed
edge classes with multiplicities (how many star edges of each class a
vertex of the source type carries), and star-map cells describing how the
upstairs star at each vertex type collapses onto the downstairs star.
Everything downstream (classification, balls, witnesses) consumes the
validated structure defined here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import PTPValidationError
from .multiplicity import OMEGA, Mult, is_omega, mult_sum, mult_to_doc, parse_mult

_TOP_FIELDS = {"name", "upstairs", "downstairs", "q"}
_GRAPH_FIELDS = {"vertex_types", "edge_classes"}
_CLASS_FIELDS = {"id", "from", "to", "reverse", "mult"}
_Q_FIELDS = {"vertex_map", "cells"}
_CELL_FIELDS = {"at", "target", "coverage", "sources"}
_SOURCE_FIELDS = {"class", "fiber"}


@dataclass(frozen=True)
class EdgeClass:
    """One orbit of directed edges: all star edges of this class share a
    source vertex type, a target vertex type and a reversal partner."""

    id: str
    src: str
    dst: str
    reverse: str
    mult: Mult


@dataclass(frozen=True)
class TypedGraph:
    """Vertex types plus directed edge classes; the quotient of a tree."""

    vertex_types: tuple[str, ...]
    classes: dict[str, EdgeClass]

    def star(self, vtype: str) -> list[EdgeClass]:
        """Outgoing edge classes at a vertex of this type, sorted by id."""
        return [c for _, c in sorted(self.classes.items()) if c.src == vtype]

    def star_size(self, vtype: str) -> Mult:
        return mult_sum(c.mult for c in self.star(vtype))

    def reverse_of(self, class_id: str) -> EdgeClass:
        return self.classes[self.classes[class_id].reverse]


@dataclass(frozen=True)
class Cell:
    """Star-map record at one upstairs vertex type.

    The sources (upstairs classes with fiber sizes) collapse onto
    ``coverage`` distinct downstairs edges of the target class, each
    covered edge receiving ``fiber`` preimages from each source class.
    """

    at: str
    target: str
    coverage: int
    sources: tuple[tuple[str, Mult], ...]

    def preimage_count(self) -> Mult:
        """Preimages per covered target edge; >= 2 means collapsing."""
        return mult_sum(f for _, f in self.sources)

    def is_collapsing(self) -> bool:
        return self.preimage_count() >= 2

    def key(self) -> tuple[str, str]:
        """Canonical identity of the cell within its tree pair."""
        return (self.at, self.sources[0][0] if self.sources else self.target)


@dataclass(frozen=True)
class PTP:
    """A validated periodic tree pair: T-upstairs, T-downstairs, and the
    star-map cells realizing the quotient map between them."""

    name: str
    upstairs: TypedGraph
    downstairs: TypedGraph
    vertex_map: dict[str, str]
    cells: tuple[Cell, ...]
    warnings: tuple[str, ...] = ()
    cell_of_source: dict[str, Cell] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.cell_of_source:
            lookup = {}
            for cell in self.cells:
                for cls_id, _ in cell.sources:
                    lookup[cls_id] = cell
            object.__setattr__(self, "cell_of_source", lookup)

    def __eq__(self, other):
        if not isinstance(other, PTP):
            return NotImplemented
        return (
            self.name == other.name
            and self.upstairs == other.upstairs
            and self.downstairs == other.downstairs
            and self.vertex_map == other.vertex_map
            and set(self.cells) == set(other.cells)
        )

    def __hash__(self):
        return hash((self.name, self.upstairs.vertex_types, frozenset(self.cells)))

    def cells_at(self, up_type: str) -> list[Cell]:
        return sorted(
            (c for c in self.cells if c.at == up_type), key=lambda c: c.key()
        )

    def cells_targeting(self, down_class: str) -> list[Cell]:
        """All cells (across upstairs types) collapsing onto this class."""
        return sorted(
            (c for c in self.cells if c.target == down_class), key=lambda c: c.key()
        )

    def fiber_of(self, up_class: str) -> Mult:
        cell = self.cell_of_source[up_class]
        for cls_id, f in cell.sources:
            if cls_id == up_class:
                return f
        raise KeyError(up_class)


@dataclass
class Violation:
    code: str
    message: str


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation]
    warnings: list[str]

    def as_doc(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "message": v.message} for v in self.violations
            ],
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class LocalProperties:
    locally_surjective: bool
    deficiencies: tuple[tuple[str, str], ...]
    locally_injective: bool
    collapsing_cells: tuple[Cell, ...]

    def as_doc(self) -> dict:
        return {
            "locally_surjective": self.locally_surjective,
            "deficiencies": [list(d) for d in self.deficiencies],
            "locally_injective": self.locally_injective,
            "collapsing_cells": [
                {"at": c.at, "target": c.target, "preimage_count": mult_to_doc(c.preimage_count())}
                for c in self.collapsing_cells
            ],
        }


@dataclass(frozen=True)
class ApplicabilityReport:
    upstairs_minimal: bool
    downstairs_locally_finite: bool
    locally_surjective: bool
    not_locally_injective: bool
    main_theorem_applies: bool

    def as_doc(self) -> dict:
        return {
            "upstairs_minimal": self.upstairs_minimal,
            "downstairs_locally_finite": self.downstairs_locally_finite,
            "locally_surjective": self.locally_surjective,
            "not_locally_injective": self.not_locally_injective,
            "main_theorem_applies": self.main_theorem_applies,
        }


def _is_identifier(value) -> bool:
    return isinstance(value, str) and value != "" and not any(ch.isspace() for ch in value)


def _parse_graph(doc, side, bad):
    if not isinstance(doc, dict):
        bad("malformed", f"{side} must be an object")
        return None
    unknown = set(doc) - _GRAPH_FIELDS
    if unknown:
        bad("malformed", f"{side} has unknown fields: {sorted(unknown)}")
    vts = doc.get("vertex_types")
    ecs = doc.get("edge_classes")
    if not isinstance(vts, list) or not all(_is_identifier(v) for v in vts):
        bad("malformed", f"{side}.vertex_types must be a list of identifiers")
        return None
    if len(set(vts)) != len(vts):
        bad("malformed", f"{side}.vertex_types contains duplicates")
        return None
    if not isinstance(ecs, list):
        bad("malformed", f"{side}.edge_classes must be a list")
        return None
    classes = {}
    for entry in ecs:
        if not isinstance(entry, dict) or set(entry) - _CLASS_FIELDS:
            bad("malformed", f"{side} edge class entries must have fields {sorted(_CLASS_FIELDS)}")
            return None
        missing = _CLASS_FIELDS - set(entry)
        if missing:
            bad("malformed", f"{side} edge class missing fields: {sorted(missing)}")
            return None
        cid = entry["id"]
        if not _is_identifier(cid):
            bad("malformed", f"{side} edge class id {cid!r} is not an identifier")
            return None
        if cid in classes:
            bad("malformed", f"{side} duplicate edge class id {cid!r}")
            return None
        try:
            mult = parse_mult(entry["mult"])
        except ValueError as exc:
            bad("malformed", f"{side} class {cid}: {exc}")
            return None
        for fld in ("from", "to", "reverse"):
            if not _is_identifier(entry[fld]):
                bad("malformed", f"{side} class {cid}: field {fld} is not an identifier")
                return None
        classes[cid] = EdgeClass(
            id=cid, src=entry["from"], dst=entry["to"], reverse=entry["reverse"], mult=mult
        )
    if not classes:
        bad("malformed", f"{side} has no edge classes (the tree would be finite)")
        return None
    graph = TypedGraph(vertex_types=tuple(sorted(vts)), classes=classes)
    tset = set(vts)
    for c in classes.values():
        if c.src not in tset or c.dst not in tset:
            bad("malformed", f"{side} class {c.id} references unknown vertex types")
            return None
        if c.reverse not in classes:
            bad("involution", f"{side} class {c.id}: reverse {c.reverse!r} does not exist")
            return None
    for c in classes.values():
        r = classes[c.reverse]
        if r.reverse != c.id:
            bad("involution", f"{side} reverse is not an involution on {c.id}/{r.id}")
        if r.src != c.dst or r.dst != c.src:
            bad("involution", f"{side} class {c.id}: reverse {r.id} does not flip endpoints")
        if c.reverse == c.id and c.src != c.dst:
            bad("involution", f"{side} class {c.id} is self-paired but not a loop class")
    return graph


def _check_connected(graph: TypedGraph, side, bad):
    seen = {graph.vertex_types[0]}
    frontier = [graph.vertex_types[0]]
    while frontier:
        v = frontier.pop()
        for c in graph.classes.values():
            if c.src == v and c.dst not in seen:
                seen.add(c.dst)
                frontier.append(c.dst)
    missing = set(graph.vertex_types) - seen
    if missing:
        bad(
            "connectivity",
            f"{side} type graph is disconnected (quotients of trees are connected); "
            f"unreachable types: {sorted(missing)}",
        )


def validate_document(text: str) -> tuple[Optional[PTP], ValidationReport]:
    """Parse a tree-pair document and check every structural invariant.

    Returns the validated pair together with a report; the pair is None
    whenever the report lists violations.  Warnings never block analysis
    but are carried on the pair and propagated into verdicts as caveats.
    """
    violations: list[Violation] = []
    warnings: list[str] = []

    def bad(code, message):
        violations.append(Violation(code, message))

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        bad("malformed", f"not valid JSON: {exc}")
        return None, ValidationReport(False, violations, warnings)

    if not isinstance(doc, dict):
        bad("malformed", "document root must be an object")
        return None, ValidationReport(False, violations, warnings)
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        bad("malformed", f"unknown top-level fields: {sorted(unknown)}")
    missing = _TOP_FIELDS - set(doc)
    if missing:
        bad("malformed", f"missing top-level fields: {sorted(missing)}")
        return None, ValidationReport(False, violations, warnings)
    if not isinstance(doc["name"], str) or not doc["name"]:
        bad("malformed", "name must be a nonempty string")

    upstairs = _parse_graph(doc["upstairs"], "upstairs", bad)
    downstairs = _parse_graph(doc["downstairs"], "downstairs", bad)
    if upstairs is None or downstairs is None or violations:
        return None, ValidationReport(False, violations, warnings)

    for c in downstairs.classes.values():
        if is_omega(c.mult):
            bad("downstairs_omega", f"downstairs class {c.id} has omega multiplicity "
                "(the downstairs tree must be locally finite)")

    q = doc["q"]
    if not isinstance(q, dict) or set(q) - _Q_FIELDS or _Q_FIELDS - set(q):
        bad("malformed", f"q must be an object with fields {sorted(_Q_FIELDS)}")
        return None, ValidationReport(False, violations, warnings)
    vmap = q["vertex_map"]
    if (
        not isinstance(vmap, dict)
        or set(vmap) != set(upstairs.vertex_types)
        or not all(v in set(downstairs.vertex_types) for v in vmap.values())
    ):
        bad("malformed", "q.vertex_map must map every upstairs type to a downstairs type")
        return None, ValidationReport(False, violations, warnings)

    cells_doc = q["cells"]
    if not isinstance(cells_doc, list):
        bad("malformed", "q.cells must be a list")
        return None, ValidationReport(False, violations, warnings)
    cells: list[Cell] = []
    for entry in cells_doc:
        if (
            not isinstance(entry, dict)
            or set(entry) - _CELL_FIELDS
            or _CELL_FIELDS - set(entry)
        ):
            bad("malformed", f"cells must have exactly the fields {sorted(_CELL_FIELDS)}")
            return None, ValidationReport(False, violations, warnings)
        at, target = entry["at"], entry["target"]
        if at not in set(upstairs.vertex_types):
            bad("malformed", f"cell at unknown upstairs type {at!r}")
            continue
        if target not in downstairs.classes:
            bad("malformed", f"cell targets unknown downstairs class {target!r}")
            continue
        try:
            coverage = parse_mult(entry["coverage"])
        except ValueError as exc:
            bad("malformed", f"cell at {at}: {exc}")
            continue
        sources = []
        src_ok = True
        if not isinstance(entry["sources"], list) or not entry["sources"]:
            bad("malformed", f"cell at {at} targeting {target} must list sources")
            continue
        for s in entry["sources"]:
            if not isinstance(s, dict) or set(s) != _SOURCE_FIELDS:
                bad("malformed", f"cell sources must have fields {sorted(_SOURCE_FIELDS)}")
                src_ok = False
                break
            if s["class"] not in upstairs.classes:
                bad("malformed", f"cell source references unknown upstairs class {s['class']!r}")
                src_ok = False
                break
            try:
                fiber = parse_mult(s["fiber"])
            except ValueError as exc:
                bad("malformed", f"cell source {s['class']}: {exc}")
                src_ok = False
                break
            sources.append((s["class"], fiber))
        if not src_ok:
            continue
        if is_omega(coverage):
            bad("coverage_overflow", f"cell at {at} targeting {target}: coverage cannot be omega "
                "(covered edges live in a locally finite star)")
            continue
        cells.append(Cell(at=at, target=target, coverage=coverage, sources=tuple(sources)))

    if violations:
        return None, ValidationReport(False, violations, warnings)

    # star-map totality: each upstairs class in exactly one cell
    seen_sources: dict[str, Cell] = {}
    for cell in cells:
        for cls_id, _ in cell.sources:
            if cls_id in seen_sources:
                bad("malformed", f"upstairs class {cls_id} appears in more than one cell")
            seen_sources[cls_id] = cell
    for cls_id in upstairs.classes:
        if cls_id not in seen_sources:
            bad("malformed", f"upstairs class {cls_id} is not a source of any cell "
                "(the star map must be total)")

    for cell in cells:
        tgt = downstairs.classes[cell.target]
        if vmap[cell.at] != tgt.src:
            bad("malformed", f"cell at {cell.at} targets {cell.target}, whose source type "
                f"{tgt.src} is not the image of {cell.at}")
        for cls_id, fiber in cell.sources:
            c = upstairs.classes[cls_id]
            if c.src != cell.at:
                bad("malformed", f"cell at {cell.at} lists source {cls_id} based at {c.src}")
            elif vmap[c.dst] != tgt.dst:
                bad("malformed", f"source {cls_id} of cell at {cell.at}: its endpoint type "
                    f"{c.dst} does not map onto the target endpoint type {tgt.dst}")
            product = cell.coverage * fiber if not is_omega(fiber) else OMEGA
            if product != c.mult:
                bad("product_law", f"source {cls_id}: coverage {cell.coverage} x fiber "
                    f"{mult_to_doc(fiber)} != mult {mult_to_doc(c.mult)}")

    # coverage bound per (upstairs type, downstairs class)
    totals: dict[tuple[str, str], int] = {}
    for cell in cells:
        key = (cell.at, cell.target)
        totals[key] = totals.get(key, 0) + cell.coverage
    for (at, target), total in sorted(totals.items()):
        m = downstairs.classes[target].mult
        if total > m:
            bad("coverage_overflow", f"cells at {at} cover {total} edges of class {target}, "
                f"which has only {m}")

    # reversal compatibility of the star map
    cell_of = seen_sources
    for cls_id, cell in sorted(cell_of.items()):
        rev = upstairs.classes[cls_id].reverse
        if rev in cell_of:
            want = downstairs.classes[cell.target].reverse
            got = cell_of[rev].target
            if got != want:
                bad("reversal_compatibility", f"class {cls_id} maps over {cell.target} but its "
                    f"reverse {rev} maps over {got}, not {want}")

    _check_connected(upstairs, "upstairs", bad)
    _check_connected(downstairs, "downstairs", bad)

    if violations:
        return None, ValidationReport(False, violations, warnings)

    # non-fatal observations
    for side, graph in (("upstairs", upstairs), ("downstairs", downstairs)):
        leaves = [v for v in graph.vertex_types if graph.star_size(v) < 2]
        if leaves:
            warnings.append(f"{side} has leaf types {leaves}; the tree is not leafless")
    if all(
        not is_omega(upstairs.star_size(v)) and upstairs.star_size(v) == 2
        for v in upstairs.vertex_types
    ):
        warnings.append("upstairs stars all have size exactly 2 (degenerate line)")

    ptp = PTP(
        name=doc["name"],
        upstairs=upstairs,
        downstairs=downstairs,
        vertex_map=dict(sorted(vmap.items())),
        cells=tuple(sorted(cells, key=lambda c: c.key())),
        warnings=(),
    )

    # partial-marking caveat: collapsing coverage strictly between 0 and mult
    partial = _partial_marks(ptp)
    for v, d in partial:
        warnings.append(f"class {d} at type {v} is only partially marked "
                        "(collapsing coverage below multiplicity); exact classification "
                        "will be inconclusive")

    # star conservation is implied by the product law and totality; recheck
    for vtype in upstairs.vertex_types:
        total = mult_sum(
            cell.coverage * f if not is_omega(f) else OMEGA
            for cell in ptp.cells_at(vtype)
            for _, f in cell.sources
        )
        if total != upstairs.star_size(vtype):
            bad("malformed", f"star conservation failed at {vtype} (internal)")
    if violations:
        return None, ValidationReport(False, violations, warnings)

    ptp = PTP(
        name=ptp.name,
        upstairs=ptp.upstairs,
        downstairs=ptp.downstairs,
        vertex_map=ptp.vertex_map,
        cells=ptp.cells,
        warnings=tuple(warnings),
    )
    return ptp, ValidationReport(True, [], warnings)


def _partial_marks(ptp: PTP) -> list[tuple[str, str]]:
    out = []
    for d_id, d in sorted(ptp.downstairs.classes.items()):
        total = sum(c.coverage for c in ptp.cells_targeting(d_id) if c.is_collapsing())
        if 0 < total != d.mult:
            out.append((d.src, d_id))
    return out


def parse_and_validate(text: str) -> PTP:
    """Parse a document, raising PTPValidationError when any invariant fails."""
    ptp, report = validate_document(text)
    if ptp is None:
        raise PTPValidationError(report)
    return ptp


def serialize_ptp(ptp: PTP) -> str:
    """Canonical document form; parse_and_validate inverts this exactly."""

    def graph_doc(g: TypedGraph) -> dict:
        return {
            "vertex_types": list(g.vertex_types),
            "edge_classes": [
                {
                    "id": c.id,
                    "from": c.src,
                    "to": c.dst,
                    "reverse": c.reverse,
                    "mult": mult_to_doc(c.mult),
                }
                for _, c in sorted(g.classes.items())
            ],
        }

    doc = {
        "name": ptp.name,
        "upstairs": graph_doc(ptp.upstairs),
        "downstairs": graph_doc(ptp.downstairs),
        "q": {
            "vertex_map": dict(sorted(ptp.vertex_map.items())),
            "cells": [
                {
                    "at": cell.at,
                    "target": cell.target,
                    "coverage": cell.coverage,
                    "sources": [
                        {"class": cls_id, "fiber": mult_to_doc(f)}
                        for cls_id, f in cell.sources
                    ],
                }
                for cell in ptp.cells
            ],
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def local_properties(ptp: PTP) -> LocalProperties:
    """Decide local surjectivity/injectivity of the map from the cell tables."""
    deficiencies = []
    for vtype in ptp.upstairs.vertex_types:
        image_type = ptp.vertex_map[vtype]
        covered: dict[str, int] = {}
        for cell in ptp.cells_at(vtype):
            covered[cell.target] = covered.get(cell.target, 0) + cell.coverage
        for d in ptp.downstairs.star(image_type):
            if covered.get(d.id, 0) < d.mult:
                deficiencies.append((vtype, d.id))
    collapsing = tuple(c for c in ptp.cells if c.is_collapsing())
    vmap_onto = set(ptp.vertex_map.values()) == set(ptp.downstairs.vertex_types)
    return LocalProperties(
        locally_surjective=not deficiencies and vmap_onto,
        deficiencies=tuple(deficiencies),
        locally_injective=not collapsing,
        collapsing_cells=collapsing,
    )


def applicability_check(ptp: PTP) -> ApplicabilityReport:
    """The four hypotheses gating the classification, as one report.

    Minimality of the upstairs tree is checked as leaflessness, which is
    equivalent for the cocompact actions on infinite trees that finite
    type data encodes.
    """
    props = local_properties(ptp)
    upstairs_minimal = all(
        ptp.upstairs.star_size(v) >= 2 for v in ptp.upstairs.vertex_types
    )
    downstairs_lf = all(
        not is_omega(c.mult) for c in ptp.downstairs.classes.values()
    )
    applies = (
        upstairs_minimal
        and downstairs_lf
        and props.locally_surjective
        and not props.locally_injective
    )
    return ApplicabilityReport(
        upstairs_minimal=upstairs_minimal,
        downstairs_locally_finite=downstairs_lf,
        locally_surjective=props.locally_surjective,
        not_locally_injective=not props.locally_injective,
        main_theorem_applies=applies,
    )
