"""Type-level classification of ends: marks, clean pairs, viability.

The downstairs classes that are images of collapsing pairs get marked.
An end is "faced" when some vertex's step toward the end is marked; the
classifier decides facedness for all ends at once by computing

* the clean relation (a greatest fixed point): (V, c) is clean when a
  vertex of type V whose parent-ward edge has class c heads a subtree in
  which no marked edge ever points parent-ward, and
* the viability digraph, whose infinite paths correspond exactly to
  unfaced ends: a digraph node is a traveling direction (V, d), and a
  step exists when the next edge is unmarked and every subtree hung at
  the intermediate vertex is clean.

The digraph is finite, so an unfaced end forces a reachable cycle; no
reachable cycle means every end is faced, and exactly one cycle pins the
unique candidate.  Two or more cycles under the applicability hypotheses
would contradict the at-most-one-end property and are flagged as a
consistency violation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .ball import Ball, RayInstance
from .errors import InconclusiveMarking, SigmatreeError
from .model import PTP, applicability_check
from .multiplicity import mult_to_doc


class MarkStatus(enum.Enum):
    UNMARKED = "unmarked"
    PARTIALLY_MARKED = "partially_marked"
    FULLY_MARKED = "fully_marked"


@dataclass(frozen=True)
class MarkedSet:
    """Status per downstairs (vertex type, outgoing class)."""

    status: dict[str, MarkStatus]  # keyed by class id; the type is its source
    ptp: PTP = field(repr=False, compare=False, default=None)

    def of(self, cls_id: str) -> MarkStatus:
        return self.status[cls_id]

    def is_unmarked(self, cls_id: str) -> bool:
        return self.status[cls_id] is MarkStatus.UNMARKED

    def fully_marked(self) -> list[str]:
        return sorted(c for c, s in self.status.items()
                      if s is MarkStatus.FULLY_MARKED)

    def partially_marked(self) -> list[str]:
        return sorted(c for c, s in self.status.items()
                      if s is MarkStatus.PARTIALLY_MARKED)

    def as_doc(self) -> list[dict]:
        return [
            {
                "vertex_type": self.ptp.downstairs.classes[c].src,
                "class": c,
                "status": s.value,
            }
            for c, s in sorted(self.status.items())
        ]


def marked_classes(ptp: PTP) -> MarkedSet:
    """Which downstairs classes are images of collapsing pairs.

    The marked orientation is the target class as an outgoing class at
    its source type: collapsing pairs share their initial vertex, so the
    image edge points away from it.  Fully marked means the collapsing
    cells cover the whole multiplicity; anything strictly between full
    coverage and none is partial, because which concrete edges are
    covered would depend on data the quotient description does not carry.
    """
    status = {}
    for cid, cls in ptp.downstairs.classes.items():
        total = sum(c.coverage for c in ptp.cells_targeting(cid) if c.is_collapsing())
        if total == 0:
            status[cid] = MarkStatus.UNMARKED
        elif total == cls.mult:
            status[cid] = MarkStatus.FULLY_MARKED
        else:
            status[cid] = MarkStatus.PARTIALLY_MARKED
    return MarkedSet(status=status, ptp=ptp)


def clean_pairs(ptp: PTP, marked: MarkedSet) -> frozenset[tuple[str, str]]:
    """Greatest set of (type, parent-ward class) pairs heading subtrees
    with no parent-ward marked edge at any depth.

    Computed by deleting violators until stable; partially marked counts
    as not unmarked (conservative).  The result is the greatest fixed
    point of a monotone operator, hence independent of deletion order.
    """
    alive, _ = clean_pairs_detailed(ptp, marked)
    return alive


def clean_pairs_detailed(
    ptp: PTP, marked: MarkedSet
) -> tuple[frozenset[tuple[str, str]], dict[tuple[str, str], int]]:
    """Clean pairs plus, for each deleted pair, the deletion round.

    A pair deleted at round k has a parent-ward marked edge within depth
    k - 1 of its subtree root; the brute-force checks use this to size
    their balls.
    """
    down = ptp.downstairs
    death: dict[tuple[str, str], int] = {}
    alive = set()
    for cid, cls in sorted(down.classes.items()):
        pair = (cls.src, cid)
        if marked.is_unmarked(cid):
            alive.add(pair)
        else:
            death[pair] = 1
    round_no = 1
    changed = True
    while changed:
        round_no += 1
        changed = False
        for v, cid in sorted(alive):
            ok = True
            for c2 in down.star(v):
                residual = c2.mult - (1 if c2.id == cid else 0)
                if residual >= 1 and (c2.dst, c2.reverse) not in alive:
                    ok = False
                    break
            if not ok:
                alive.discard((v, cid))
                death[(v, cid)] = round_no
                changed = True
    return frozenset(alive), death


# -- eventually periodic ends -------------------------------------------------


@dataclass(frozen=True)
class EndSpec:
    """An eventually periodic end: prefix plus repeating cycle of steps.

    Each step is (class id, instance index).  Index 0 is the default;
    when a step's class is the reverse of the previous step's class, the
    index must be >= 1, because index 0 at the new vertex is the edge
    just traversed and taking it would backtrack.
    """

    base_type: str
    prefix: tuple[tuple[str, int], ...]
    cycle: tuple[tuple[str, int], ...]

    def validate(self, ptp: PTP) -> None:
        down = ptp.downstairs
        if self.base_type not in down.vertex_types:
            raise SigmatreeError(f"unknown downstairs type {self.base_type!r}")
        if not self.cycle:
            raise SigmatreeError("end cycle must be nonempty")
        # the wrap step at the end checks that the cycle closes up
        steps = list(self.prefix) + list(self.cycle) + [self.cycle[0]]
        at = self.base_type
        prev_cls: Optional[str] = None
        for i, (cid, idx) in enumerate(steps):
            if cid not in down.classes:
                raise SigmatreeError(f"unknown downstairs class {cid!r} in end")
            cls = down.classes[cid]
            if cls.src != at:
                raise SigmatreeError(
                    f"end step {i}: class {cid} starts at {cls.src}, not {at}"
                )
            lo = 1 if (prev_cls is not None
                       and down.classes[prev_cls].reverse == cid) else 0
            if idx < lo:
                raise SigmatreeError(f"end step {i}: instance {cid}#{idx} backtracks")
            if idx >= cls.mult:
                raise SigmatreeError(
                    f"end step {i}: instance index {idx} exceeds multiplicity "
                    f"{mult_to_doc(cls.mult)} of {cid}"
                )
            at = cls.dst
            prev_cls = cid

    def step_classes(self, n: int) -> list[tuple[str, int]]:
        """First n steps of the ray."""
        out = list(self.prefix)
        while len(out) < n:
            out.extend(self.cycle)
        return out[:n]

    def render(self) -> str:
        def item(step):
            cid, idx = step
            return cid if idx == 0 else f"{cid}#{idx}"

        return (",".join(item(s) for s in self.prefix) + ";"
                + ",".join(item(s) for s in self.cycle))

    def as_doc(self) -> dict:
        return {
            "base_type": self.base_type,
            "prefix": [[c, i] for c, i in self.prefix],
            "cycle": [[c, i] for c, i in self.cycle],
            "text": self.render(),
        }


def parse_endspec(text: str, base_type: str, ptp: PTP) -> EndSpec:
    """Parse the command-line form ``prefix;cycle`` (comma-separated class
    ids, optional ``#index`` suffixes, prefix possibly empty)."""
    if ";" not in text:
        raise SigmatreeError("end must have the form 'prefix;cycle' (prefix may be empty)")
    pre_s, cyc_s = text.split(";", 1)

    def steps(part: str):
        out = []
        for item in part.split(","):
            item = item.strip()
            if not item:
                continue
            if "#" in item:
                cid, idx_s = item.rsplit("#", 1)
                try:
                    idx = int(idx_s)
                except ValueError:
                    raise SigmatreeError(f"bad instance index in {item!r}") from None
            else:
                cid, idx = item, 0
            out.append((cid, idx))
        return tuple(out)

    spec = EndSpec(base_type=base_type, prefix=steps(pre_s), cycle=steps(cyc_s))
    spec.validate(ptp)
    return canonical_endspec(spec)


def canonical_endspec(spec: EndSpec) -> EndSpec:
    """Minimal prefix and minimal period; the unique normal form of the ray."""
    cycle = list(spec.cycle)
    for p in range(1, len(cycle) + 1):
        if len(cycle) % p == 0 and cycle == cycle[:p] * (len(cycle) // p):
            cycle = cycle[:p]
            break
    prefix = list(spec.prefix)
    while prefix and prefix[-1] == cycle[-1]:
        cycle = [cycle[-1]] + cycle[:-1]
        prefix.pop()
    return EndSpec(spec.base_type, tuple(prefix), tuple(cycle))


def endspec_from_classes(ptp: PTP, base_type: str, prefix_classes: list[str],
                         cycle_classes: list[str]) -> EndSpec:
    """Attach instance indices to a class-level ray description.

    Indices default to 0; a step whose class reverses the previous one
    gets index 1 (a distinct sibling instance).  If the first pass of the
    cycle would need a different index than the steady state, the cycle
    is unrolled once into the prefix.
    """
    down = ptp.downstairs

    def idx_after(prev: Optional[str], cid: str) -> int:
        return 1 if prev is not None and down.classes[prev].reverse == cid else 0

    first_pass = idx_after(prefix_classes[-1] if prefix_classes else None,
                           cycle_classes[0])
    steady = idx_after(cycle_classes[-1], cycle_classes[0])
    if first_pass != steady:
        prefix_classes = list(prefix_classes) + list(cycle_classes)
    prefix_steps = []
    prev = None
    for cid in prefix_classes:
        prefix_steps.append((cid, idx_after(prev, cid)))
        prev = cid
    cycle_steps = [(cycle_classes[0], steady)]
    for prev, cid in zip(cycle_classes, cycle_classes[1:]):
        cycle_steps.append((cid, idx_after(prev, cid)))
    spec = EndSpec(base_type, tuple(prefix_steps), tuple(cycle_steps))
    spec.validate(ptp)
    return canonical_endspec(spec)


def realize_ray(ball: Ball, spec: EndSpec, length: int) -> RayInstance:
    """Walk the end's first ``length`` steps concretely from the ball base.

    Grows the ball along the walk as needed; requires a ball that tracks
    instance slots (down balls do).
    """
    if ball.vertex_type_id(0) != spec.base_type:
        raise SigmatreeError(
            f"ball base has type {ball.vertex_type_id(0)}, end starts at {spec.base_type}"
        )
    verts = [0]
    edges: list[int] = []
    t = ball.tables
    for cid, idx in spec.step_classes(length):
        v = verts[-1]
        ball._expand_plain(v)
        e = ball.instance(v, t.cls_index[cid], idx)
        if e < 0 or (edges and ball.e_rev[edges[-1]] == e):
            raise SigmatreeError(f"end step {cid}#{idx} is not realizable at vertex {v}")
        edges.append(e)
        verts.append(ball.e_dst[e])
    return RayInstance(ball, verts, edges)


# -- the viability digraph -----------------------------------------------------

Node = tuple[str, str]  # (vertex type, outgoing class)


@dataclass
class ViabilityDigraph:
    """Nodes are traveling directions (V, d); infinite paths from a viable
    start correspond exactly to unfaced ends."""

    nodes: list[Node]
    edges: dict[Node, list[Node]]
    starts: list[Node]
    reachable: set[Node]
    cycles: list[list[Node]]

    def as_doc(self) -> dict:
        return {
            "nodes": [list(n) for n in self.nodes],
            "edges": {f"{v}:{d}": [list(n) for n in succ]
                      for (v, d), succ in sorted(self.edges.items())},
            "starts": [list(n) for n in self.starts],
            "reachable": [list(n) for n in sorted(self.reachable)],
            "cycles": [[list(n) for n in cyc] for cyc in self.cycles],
        }

    def to_dot(self) -> str:
        def nid(n):
            return f'"{n[0]}:{n[1]}"'

        lines = ["digraph viability {"]
        cyc_nodes = {n for cyc in self.cycles for n in cyc}
        for n in self.nodes:
            attrs = []
            if n in cyc_nodes:
                attrs.append("color=red")
            if n in self.starts:
                attrs.append("shape=box")
            if n not in self.reachable:
                attrs.append("style=dotted")
            lines.append(f"  {nid(n)} [{', '.join(attrs)}];" if attrs else f"  {nid(n)};")
        for n, succ in sorted(self.edges.items()):
            for m in succ:
                lines.append(f"  {nid(n)} -> {nid(m)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _simple_cycles(nodes: list[Node], edges: dict[Node, list[Node]]) -> list[list[Node]]:
    """All simple cycles, each reported once, rooted at its least node."""
    order = {n: i for i, n in enumerate(sorted(nodes))}
    cycles = []
    for root in sorted(nodes, key=order.get):
        stack = [(root, iter(edges.get(root, ())))]
        path = [root]
        onpath = {root}
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if order[nxt] < order[root]:
                    continue
                if nxt == root:
                    cycles.append(list(path))
                    continue
                if nxt in onpath:
                    continue
                stack.append((nxt, iter(edges.get(nxt, ()))))
                path.append(nxt)
                onpath.add(nxt)
                advanced = True
                break
            if not advanced:
                stack.pop()
                path.pop()
                onpath.discard(node)
    return cycles


def viability_digraph(ptp: PTP, marked: MarkedSet,
                      clean: frozenset[tuple[str, str]]) -> ViabilityDigraph:
    down = ptp.downstairs
    nodes: list[Node] = [
        (cls.src, cid) for cid, cls in sorted(down.classes.items())
    ]
    nodes.sort()

    def step_ok(d: str, d2: str) -> bool:
        """Viable continuation from traveling along d to traveling along d2."""
        cd, cd2 = down.classes[d], down.classes[d2]
        w = cd.dst
        if cd2.src != w:
            return False
        if d2 == cd.reverse and cd2.mult < 2:
            return False  # only the traversed instance exists; backtrack
        if not marked.is_unmarked(d2):
            return False
        for c2 in down.star(w):
            residual = c2.mult - (1 if c2.id == cd.reverse else 0) \
                - (1 if c2.id == d2 else 0)
            if residual >= 1 and (c2.dst, c2.reverse) not in clean:
                return False
        return True

    edges = {
        (v, d): sorted((down.classes[d2].src, d2) for (_, d2) in nodes
                       if step_ok(d, d2))
        for (v, d) in nodes
    }

    starts = []
    for v, d in nodes:
        if not marked.is_unmarked(d):
            continue
        ok = True
        for c2 in down.star(v):
            residual = c2.mult - (1 if c2.id == d else 0)
            if residual >= 1 and (c2.dst, c2.reverse) not in clean:
                ok = False
                break
        if ok:
            starts.append((v, d))

    reachable = set()
    frontier = sorted(starts)
    while frontier:
        n = frontier.pop()
        if n in reachable:
            continue
        reachable.add(n)
        frontier.extend(m for m in edges[n] if m not in reachable)

    sub_edges = {n: [m for m in succ if m in reachable]
                 for n, succ in edges.items() if n in reachable}
    cycles = _simple_cycles(sorted(reachable), sub_edges)
    # canonical rotation: lexicographically least
    canon = []
    for cyc in cycles:
        rots = [cyc[i:] + cyc[:i] for i in range(len(cyc))]
        canon.append(min(rots))
    canon.sort()
    return ViabilityDigraph(
        nodes=nodes, edges=edges, starts=sorted(starts),
        reachable=reachable, cycles=canon,
    )


@dataclass(frozen=True)
class Classification:
    kind: str  # "all_faced" | "unique_candidate" | "inconclusive"
    candidate: Optional[EndSpec] = None
    reason: Optional[str] = None
    cause: Optional[str] = None  # "partial_marks" | "multiple_cycles"
    consistency_violation: bool = False

    def as_doc(self) -> dict:
        doc = {"kind": self.kind}
        if self.candidate is not None:
            doc["candidate"] = self.candidate.as_doc()
        if self.reason is not None:
            doc["reason"] = self.reason
        if self.cause is not None:
            doc["cause"] = self.cause
        if self.consistency_violation:
            doc["consistency_violation"] = True
        return doc


def _entry_ray(ptp: PTP, dg: ViabilityDigraph, cycle: list[Node]) -> EndSpec:
    """Shortest, lexicographically least entry into the cycle, as an end."""
    cyc_set = set(cycle)
    best = None
    for start in dg.starts:
        # BFS over digraph nodes, tracking the class path
        seen = {start}
        layer = [(start, [start[1]])]
        while layer:
            hits = [(path, node) for node, path in layer if node in cyc_set]
            if hits:
                for path, node in hits:
                    key = (len(path), path)
                    cand = (key, start, node, path)
                    if best is None or cand[0] < best[0]:
                        best = cand
                break
            nxt = []
            for node, path in layer:
                for m in dg.edges[node]:
                    if m not in seen:
                        seen.add(m)
                        nxt.append((m, path + [m[1]]))
            layer = nxt
    assert best is not None, "cycle not reachable (internal)"
    _, start, landing, path = best
    i = cycle.index(landing)
    rotated = cycle[i:] + cycle[:i]
    prefix_classes = path[:-1]  # path includes the landing node's class last
    cycle_classes = [d for _, d in rotated]
    return endspec_from_classes(ptp, start[0], prefix_classes, cycle_classes)


def classify_ends(ptp: PTP) -> tuple[Classification, ViabilityDigraph]:
    """Decide whether every end is faced, or exactly one candidate escapes.

    Restricted to nodes reachable from starts compatible with the base
    conditions (every non-spine direction at the base clean).
    """
    marked = marked_classes(ptp)
    clean = clean_pairs(ptp, marked)
    dg = viability_digraph(ptp, marked, clean)
    partial = marked.partially_marked()
    if partial:
        return (
            Classification(
                kind="inconclusive",
                reason="partially marked classes: " + ", ".join(partial),
                cause="partial_marks",
            ),
            dg,
        )
    if not dg.cycles:
        return Classification(kind="all_faced"), dg
    if len(dg.cycles) == 1:
        spec = _entry_ray(ptp, dg, dg.cycles[0])
        return Classification(kind="unique_candidate", candidate=spec), dg
    applies = applicability_check(ptp).main_theorem_applies
    return (
        Classification(
            kind="inconclusive",
            reason=f"{len(dg.cycles)} distinct viability cycles",
            cause="multiple_cycles",
            consistency_violation=applies,
        ),
        dg,
    )


# -- facedness of a single end -------------------------------------------------


def end_facing_violation(ptp: PTP, spec: EndSpec) -> Optional[int]:
    """First step at which the end's walk stops being viable, or None.

    Step 0 means the base conditions fail (some direction hanging at the
    base is not clean, or the first class is marked); step k >= 1 points
    at the transition into the k-th edge.  A violated walk means some
    collapsing pair faces the end.

    Raises InconclusiveMarking when partially marked classes make the
    answer depend on data the quotient description does not carry.
    """
    spec.validate(ptp)
    marked = marked_classes(ptp)
    partial = marked.partially_marked()
    if partial:
        raise InconclusiveMarking(
            [(ptp.downstairs.classes[c].src, c) for c in partial]
        )
    clean = clean_pairs(ptp, marked)
    dg = viability_digraph(ptp, marked, clean)
    classes = [c for c, _ in spec.step_classes(
        len(spec.prefix) + 2 * len(spec.cycle) + 1
    )]
    start: Node = (spec.base_type, classes[0])
    if start not in dg.starts:
        return 0
    node = start
    for k, cid in enumerate(classes[1:], start=1):
        nxt = (ptp.downstairs.classes[node[1]].dst, cid)
        if nxt not in dg.edges[node]:
            return k
        node = nxt
    return None


def end_is_faced(ptp: PTP, spec: EndSpec) -> bool:
    """Whether some collapsing pair faces this end (type level)."""
    return end_facing_violation(ptp, spec) is not None


@dataclass(frozen=True)
class Verdict:
    """The complete classification output with its certificate trail."""

    applicability: object
    marked: MarkedSet
    clean: frozenset
    classification: Classification
    digraph: ViabilityDigraph
    sigma1: str  # "empty" | "at_most_one" | "unknown"
    candidate: Optional[EndSpec]
    notes: tuple[str, ...]

    def as_doc(self) -> dict:
        doc = {
            "applicability": self.applicability.as_doc(),
            "marked": self.marked.as_doc(),
            "clean": [list(p) for p in sorted(self.clean)],
            "classification": self.classification.as_doc(),
            "sigma1": self.sigma1,
            "notes": list(self.notes),
        }
        if self.candidate is not None:
            doc["candidate"] = self.candidate.as_doc()
        return doc


def sigma_verdict(ptp: PTP, fn_stabilizers_assumed: bool = False) -> Verdict:
    """Combine applicability, marks and end classification into the final
    answer about the sigma-1 set."""
    app = applicability_check(ptp)
    marked = marked_classes(ptp)
    clean = clean_pairs(ptp, marked)
    classification, dg = classify_ends(ptp)
    notes = [f"input warning: {w}" for w in ptp.warnings]
    sigma1 = "unknown"
    candidate = None
    if app.main_theorem_applies:
        notes.append(
            "hypotheses hold: every point stabilizer of the downstairs action "
            "is not finitely generated"
        )
        if classification.kind == "all_faced":
            sigma1 = "empty"
        elif classification.kind == "unique_candidate":
            sigma1 = "at_most_one"
            candidate = classification.candidate
    if classification.kind == "unique_candidate":
        candidate = classification.candidate
        period = len(candidate.cycle)
        notes.append(
            f"candidate end has period {period} "
            f"(cycle {','.join(c for c, _ in candidate.cycle)}); the associated "
            "discrete character pairs the end with translation by this period"
        )
        if fn_stabilizers_assumed and app.main_theorem_applies:
            notes.append(
                "assuming all upstairs point stabilizers have type F_n (asserted "
                "by the caller, not verified): the candidate end lies in the "
                "sigma-n set for such n, by the unfaced-end criterion"
            )
    if classification.kind == "inconclusive":
        notes.append(f"inconclusive: {classification.reason}")
        if classification.consistency_violation:
            notes.append(
                "consistency violation: multiple viability cycles contradict "
                "the at-most-one-end property under the hypotheses"
            )
    return Verdict(
        applicability=app,
        marked=marked,
        clean=clean,
        classification=classification,
        digraph=dg,
        sigma1=sigma1,
        candidate=candidate,
        notes=tuple(notes),
    )
