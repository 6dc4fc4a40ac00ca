"""Brute-force ball-level cross-checks.

Everything here recomputes facts concretely, from the realized balls and
the edge map alone, never from the cell tables: collapsing pairs come
from an exhaustive scan of concrete stars, facedness from geodesic
computations.  The type-level classifier is validated against these
scans, which is the whole point of this module.

Omega-capped balls carry a truncation flag; negative findings on capped
balls (an instance not marked, a cone unfaced) are not exhaustive and
the callers treat them accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ball import MappedBallPair, RayInstance, busemann_table, geodesic


@dataclass(frozen=True)
class ConcreteMarks:
    """Collapsing pairs found by star scan, and their image instances."""

    apexes: dict[int, list[tuple[int, ...]]]  # apex vertex -> groups of up edges
    marked_instances: tuple[int, ...]  # sorted down edge ids
    witness_of: dict[int, tuple[int, tuple[int, ...]]]  # down edge -> (apex, up edges)
    truncated: bool


def concrete_collapsing_pairs(pair: MappedBallPair) -> ConcreteMarks:
    """Exhaustive scan: groups of >= 2 up star edges sharing one image."""
    up = pair.up
    n = up.n_edges
    marks = ConcreteMarks(apexes={}, marked_instances=(), witness_of={}, truncated=up.truncated)
    if n == 0:
        return marks
    src = up.np_view(up.e_src)
    img = pair.np_emap()
    order = np.lexsort((img, src))
    s_src = src[order]
    s_img = img[order]
    boundary = np.empty(n, dtype=bool)
    boundary[0] = True
    np.not_equal(s_src[1:], s_src[:-1], out=boundary[1:])
    np.logical_or(boundary[1:], s_img[1:] != s_img[:-1], out=boundary[1:])
    group_ids = np.cumsum(boundary) - 1
    counts = np.bincount(group_ids)
    big = np.nonzero(counts >= 2)[0]
    apexes: dict[int, list[tuple[int, ...]]] = {}
    witness_of: dict[int, tuple[int, tuple[int, ...]]] = {}
    marked = set()
    starts = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    for g in big.tolist():
        lo, hi = int(starts[g]), int(starts[g + 1])
        edges = tuple(sorted(int(order[i]) for i in range(lo, hi)))
        apex = int(s_src[lo])
        image = int(s_img[lo])
        apexes.setdefault(apex, []).append(edges)
        marked.add(image)
        prev = witness_of.get(image)
        if prev is None or apex < prev[0]:
            witness_of[image] = (apex, edges)
    for groups in apexes.values():
        groups.sort()
    return ConcreteMarks(
        apexes=apexes,
        marked_instances=tuple(sorted(marked)),
        witness_of=witness_of,
        truncated=up.truncated,
    )


def _euler_intervals(ball) -> tuple[np.ndarray, np.ndarray]:
    """Entry/exit times of an iterative DFS over the rooted ball."""
    n = ball.n_vertices
    tin = np.zeros(n, dtype=np.int64)
    tout = np.zeros(n, dtype=np.int64)
    clock = 0
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        v, done = stack.pop()
        if done:
            tout[v] = clock
            continue
        tin[v] = clock
        clock += 1
        stack.append((v, True))
        if ball.v_block_start[v] >= 0:
            for e in range(ball.v_block_end[v] - 2, ball.v_block_start[v] - 1, -2):
                stack.append((ball.e_dst[e], False))
    return tin, tout


def _facing_masks(pair: MappedBallPair, marks: ConcreteMarks,
                  targets: np.ndarray, cone: bool) -> tuple[np.ndarray, np.ndarray]:
    """For each target down vertex: is it faced, and by which instance.

    A marked instance faces a vertex when it lies on the geodesic from its
    own source to the vertex (it points toward it).  It faces the CONE of
    the vertex (all ends beyond it, as seen from the ball base) only when
    additionally its source lies outside the vertex's subtree: a mark
    inside the subtree pointing back out faces the vertex but misses the
    ends continuing past its own branch.
    """
    down = pair.down
    tin, tout = _euler_intervals(down)
    t_tin = tin[targets]
    t_tout = tout[targets]
    faced = np.zeros(len(targets), dtype=bool)
    witness = np.full(len(targets), -1, dtype=np.int64)
    for e in marks.marked_instances:
        p, p2 = down.e_src[e], down.e_dst[e]
        if down.parent_of(p) == p2:
            hit = ~((t_tin >= tin[p]) & (t_tin < tout[p]))
        else:
            hit = (t_tin >= tin[p2]) & (t_tin < tout[p2])
        if cone:
            hit &= ~((t_tin <= tin[p]) & (tin[p] < t_tout))
        newly = hit & (witness < 0)
        witness[newly] = e
        faced |= hit
    return faced, witness


@dataclass(frozen=True)
class ConeEntry:
    vertex: int
    faced: bool
    witness: Optional[int]  # a marked down instance pointing toward the cone


@dataclass(frozen=True)
class ConeReport:
    """Facedness of every depth-R cone of the down ball."""

    depth: int
    entries: tuple[ConeEntry, ...]
    unfaced: tuple[int, ...]
    truncated: bool

    def as_doc(self) -> dict:
        return {
            "depth": self.depth,
            "cones": len(self.entries),
            "unfaced": list(self.unfaced),
            "truncated": self.truncated,
        }


def brute_face_scan(pair: MappedBallPair, depth: int) -> ConeReport:
    """Decide facedness of every depth-``depth`` cone by exhaustive scan."""
    if depth > pair.down.radius:
        raise ValueError(
            f"scan depth {depth} exceeds down ball radius {pair.down.radius}"
        )
    marks = concrete_collapsing_pairs(pair)
    targets = np.asarray(pair.down.vertices_at_depth(depth), dtype=np.int64)
    faced, witness = _facing_masks(pair, marks, targets, cone=True)
    entries = tuple(
        ConeEntry(int(v), bool(f), int(w) if w >= 0 else None)
        for v, f, w in zip(targets.tolist(), faced.tolist(), witness.tolist())
    )
    unfaced = tuple(int(v) for v, f in zip(targets.tolist(), faced.tolist()) if not f)
    return ConeReport(depth=depth, entries=entries, unfaced=unfaced,
                      truncated=marks.truncated)


def unfaced_vertices(pair: MappedBallPair, max_depth: int) -> list[int]:
    """Down vertices of depth <= max_depth with no marked instance pointing
    toward them (the every-vertex-faced check runs on this)."""
    marks = concrete_collapsing_pairs(pair)
    depths = pair.down.depths
    targets = np.nonzero(depths <= max_depth)[0]
    faced, _ = _facing_masks(pair, marks, targets, cone=False)
    return [int(v) for v, f in zip(targets.tolist(), faced.tolist()) if not f]


def brute_connectivity_check(pair: MappedBallPair, tau: RayInstance, r: int) -> bool:
    """Is the up-ball subgraph induced on preimages of the horoball connected?

    In a forest the number of components is |S| minus the number of edges
    inside S, so a single mask pass decides it.
    """
    beta_down = busemann_table(pair.down, tau)
    mask = beta_down[pair.np_vmap()] >= r
    n = int(mask.sum())
    if n == 0:
        return True
    up = pair.up
    pe = up.np_view(up.v_parent_edge)
    esrc = up.np_view(up.e_src)
    parent = esrc[np.maximum(pe, 0)]
    inner = int((mask[1:] & mask[parent[1:]]).sum())
    return n - inner == 1


def horoball_preimage_component_count(pair: MappedBallPair, tau: RayInstance,
                                      r: int) -> int:
    beta_down = busemann_table(pair.down, tau)
    mask = beta_down[pair.np_vmap()] >= r
    n = int(mask.sum())
    if n == 0:
        return 0
    up = pair.up
    pe = up.np_view(up.v_parent_edge)
    esrc = up.np_view(up.e_src)
    parent = esrc[np.maximum(pe, 0)]
    inner = int((mask[1:] & mask[parent[1:]]).sum())
    return n - inner


def same_preimage_component(pair: MappedBallPair, tau: RayInstance, r: int,
                            v1: int, v2: int) -> bool:
    """Do two up vertices lie in one component of the horoball preimage?

    In a tree the unique path decides: every vertex on it, endpoints
    included, must map into the horoball.
    """
    beta_down = busemann_table(pair.down, tau)
    vmap = pair.np_vmap()
    path = geodesic(pair.up, v1, v2)
    return all(beta_down[vmap[v]] >= r for v in path.vertices)


def concrete_mark_census(pair: MappedBallPair, max_src_depth: int) -> dict[str, dict[int, int]]:
    """Per marked class: how many instances at each sufficiently interior
    down vertex are concrete pair images (for the fully-marked count check)."""
    marks = concrete_collapsing_pairs(pair)
    down = pair.down
    census: dict[str, dict[int, int]] = {}
    for e in marks.marked_instances:
        p = down.e_src[e]
        if down.v_depth[p] > max_src_depth:
            continue
        cid = down.edge_class_id(e)
        census.setdefault(cid, {}).setdefault(p, 0)
        census[cid][p] += 1
    return census
