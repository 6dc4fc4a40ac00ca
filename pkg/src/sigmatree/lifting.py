"""Lifting downstairs geodesic rays through the map.

Local surjectivity guarantees every geodesic edge ray lifts, step by
step, to a geodesic edge ray upstairs; the number of continuations at
each step is the concrete fiber of the next downstairs edge at the
current tip.  The lift tree enumerates all of them breadth first in
instance order, and the preimage-of-an-end singleton test reduces to
facedness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ball import MappedBallPair, RayInstance
from .classify import EndSpec, end_is_faced, realize_ray
from .errors import ConsistencyViolation, SigmatreeError
from .model import PTP, local_properties


@dataclass
class LiftTree:
    """Complete enumeration of lifts of a down-ball ray prefix.

    ``lifts`` holds every lift of the requested depth as a tuple of up
    edge ids, in breadth-first instance order; ``branch_counts[k]`` is
    the number of partial lifts of length k; ``max_step_branch`` is the
    largest number of continuations any single tip offered.
    """

    pair: MappedBallPair
    ray: RayInstance
    initial: int
    depth: int
    lifts: list[tuple[int, ...]]
    branch_counts: list[int]
    max_step_branch: int


def lift_ray(pair: MappedBallPair, ray: RayInstance, initial: int,
             depth: int) -> LiftTree:
    """All lifts of the ray's first ``depth`` edges starting with ``initial``.

    The up ball grows along the lifts as needed.  Raises when the initial
    edge does not lie over the ray's first edge, or when some partial
    lift has no continuation (the map is not locally surjective there, or
    an omega star was truncated).
    """
    if depth > len(ray.edges):
        raise SigmatreeError(f"depth {depth} exceeds ray length {len(ray.edges)}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    up = pair.up
    if depth == 0:
        return LiftTree(pair, ray, initial, 0, [()], [1], 1)
    if pair.emap[initial] != ray.edges[0]:
        raise SigmatreeError(
            f"initial edge {initial} lies over down edge {pair.emap[initial]}, "
            f"not over the ray's first edge {ray.edges[0]}"
        )
    partials: list[tuple[int, ...]] = [(initial,)]
    branch_counts = [1, 1]
    max_step = 1
    for k in range(1, depth):
        nxt_down = ray.edges[k]
        new_partials: list[tuple[int, ...]] = []
        for lift in partials:
            tip = up.e_dst[lift[-1]]
            pair.expand_up_vertex(tip)
            candidates = sorted(
                (e for e in up.out_edges(tip) if pair.emap[e] == nxt_down),
                key=lambda e: (up.e_cls[e], up.e_idx[e]),
            )
            if not candidates:
                extra = " (omega stars are truncated)" if up.truncated else ""
                raise SigmatreeError(
                    f"lift has no continuation over ray step {k}{extra}; "
                    "the map is not concretely locally surjective here"
                )
            max_step = max(max_step, len(candidates))
            for e in candidates:
                new_partials.append(lift + (e,))
        partials = new_partials
        branch_counts.append(len(partials))
    return LiftTree(pair, ray, initial, depth, partials, branch_counts, max_step)


def lift_initials(pair: MappedBallPair, down_edge: int,
                  at: int | None = 0) -> list[int]:
    """Up instances over a down edge.

    By default only instances at the up base are returned (the canonical
    starting points of a lift census); pass ``at=None`` for instances at
    every currently expanded vertex.
    """
    hits = np.nonzero(pair.np_emap() == down_edge)[0].tolist()
    if at is None:
        return hits
    return [e for e in hits if pair.up.e_src[e] == at]


def lift_vertices(tree: LiftTree, lift: tuple[int, ...]) -> list[int]:
    up = tree.pair.up
    if not lift:
        return []
    verts = [up.e_src[lift[0]]]
    for e in lift:
        verts.append(up.e_dst[e])
    return verts


def base_type_over(ptp: PTP, down_type: str) -> str:
    """Canonical upstairs type over a downstairs one (least id)."""
    for t in sorted(ptp.upstairs.vertex_types):
        if ptp.vertex_map[t] == down_type:
            return t
    raise SigmatreeError(f"no upstairs type maps onto {down_type!r}")


def ray_toward_end(down, tau: RayInstance, v: int, depth: int) -> RayInstance:
    """The geodesic from v into the end represented by tau, within the ball:
    the path up to the merge vertex, then along tau."""
    on_ray = {u: i for i, u in enumerate(tau.vertices)}
    verts = [v]
    edges: list[int] = []
    a = v
    while a not in on_ray:
        e = down.parent_rev_edge(a)
        edges.append(e)
        a = down.e_dst[e]
        verts.append(a)
    m = on_ray[a]
    for k in range(m, min(len(tau.edges), m + depth)):
        edges.append(tau.edges[k])
        verts.append(tau.vertices[k + 1])
    return RayInstance(down, verts, edges)


def q_fiber_singleton(ptp: PTP, spec: EndSpec, cross_check_depth: int = 0,
                      omega_cap: int = 4) -> bool:
    """Is the set of end lifts a singleton?  True exactly when no
    collapsing pair faces the end.

    With ``cross_check_depth`` > 0 the type-level answer is additionally
    validated by enumeration: when the fiber is a singleton, every lift
    of every sampled ray representing the end within the ball must have
    exactly one continuation at each step.  Disagreement raises a
    consistency error.  The type-level criterion is authoritative; the
    enumeration is a bounded sample.
    """
    props = local_properties(ptp)
    if not props.locally_surjective:
        raise SigmatreeError(
            "end lifting requires a locally surjective map; this one is not"
        )
    singleton = not end_is_faced(ptp, spec)
    if cross_check_depth > 0 and singleton:
        worst = _max_sampled_branching(ptp, spec, cross_check_depth, omega_cap)
        if worst > 1:
            raise ConsistencyViolation(
                "type level says the end fiber is a singleton, but a sampled "
                f"lift branches {worst}-fold"
            )
    return singleton


def _max_sampled_branching(ptp: PTP, spec: EndSpec, depth: int,
                           omega_cap: int) -> int:
    pair = MappedBallPair(ptp, base_type_over(ptp, spec.base_type), omega_cap)
    core = min(depth, 3)
    pair.down.expand_uniformly(core)
    tau = realize_ray(pair.down, spec, depth)
    pair.expand_to_radius(core)
    samples = [tau]
    for v in range(1, min(pair.down.n_vertices, 24)):
        if v in tau.vertices:
            continue
        ray = ray_toward_end(pair.down, tau, v, depth)
        if len(ray.edges) >= 2:
            samples.append(ray)
    worst = 1
    for ray in samples:
        for initial in lift_initials(pair, ray.edges[0], at=None):
            tree = lift_ray(pair, ray, initial, min(len(ray.edges), depth))
            worst = max(worst, tree.max_step_branch)
    return worst
