"""Concrete disconnection witnesses for faced ends.

For a faced end and any lag, there is a collapsing pair whose image
points toward the end from far outside the lag horoball.  Lifting the
geodesic ray from the pair's image vertex along both pair edges produces
two rays that meet only at the apex; picking a probe on each ray whose
image is back inside the zero horoball exhibits two points of the
horoball preimage that every connecting path must join through the apex,
which lies outside the lag horoball preimage.  In a tree no other path
exists, so the preimage is disconnected.

Balls here are grown lazily: a uniform down core for the search, the ray
spine, and the up ball only along path lifts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ball import (MappedBallPair, RayInstance, busemann, busemann_table,
                   geodesic)
from .classify import EndSpec, end_is_faced, marked_classes, realize_ray
from .errors import BallTooShallow, EndNotFaced, SigmatreeError
from .lifting import base_type_over, lift_ray, ray_toward_end
from .model import PTP, applicability_check


def pigeonhole_bound(ptp: PTP) -> int:
    """A repeat of (vertex type, class) along any ray occurs within this
    many steps: one more than the number of directed downstairs classes."""
    return len(ptp.downstairs.classes) + 1


def translated_marked_edge(pair: MappedBallPair, tau: RayInstance, r: int):
    """A fully-marked-class instance oriented toward the end, lying outside
    the horoball at level r (its far endpoint has Busemann value < r).

    Marked edges recur along rays with gaps bounded by type periodicity,
    so a ball deeper than |r| plus the pigeonhole bound must contain one;
    shallower balls raise with the required depth.
    """
    ptp = pair.ptp
    bound = pigeonhole_bound(ptp)
    required = abs(r) + bound
    if pair.down.radius <= required:
        raise BallTooShallow(
            required + 1,
            f"ball too shallow for a marked edge outside level {r}: "
            f"need down radius > {required}, have {pair.down.radius}",
        )
    marked = marked_classes(ptp)
    full = set(marked.fully_marked())
    if not full:
        raise EndNotFaced("no fully marked classes; no collapsing pair faces any end")
    down = pair.down
    beta = busemann_table(down, tau)
    best = None
    for e in range(down.n_edges):
        if down.edge_class_id(e) not in full:
            continue
        src, dst = down.e_src[e], down.e_dst[e]
        if beta[dst] != beta[src] + 1:
            continue  # not oriented toward the end
        if beta[dst] >= r:
            continue
        # shallowest qualifying instance first, then least id
        key = (-int(beta[dst]), e)
        if best is None or key < best:
            best = key
    if best is None:
        raise BallTooShallow(
            required + 1,
            f"no marked-class instance toward the end outside level {r} "
            f"within radius {pair.down.radius}",
        )
    return best[1]


@dataclass
class DisconnectionWitness:
    """The proof object: a deep collapsing pair and two lifted rays whose
    probes the apex separates inside the horoball preimage."""

    pair: MappedBallPair
    tau: RayInstance
    apex: int
    pair_edges: tuple[int, int]
    image_edge: int
    rays: tuple[RayInstance, RayInstance]
    probes: tuple[int, int]
    lag: int
    verified: bool

    def as_doc(self) -> dict:
        up, down = self.pair.up, self.pair.down
        return {
            "lag": self.lag,
            "apex": {
                "vertex": self.apex,
                "type": up.vertex_type_id(self.apex),
                "image_busemann": int(
                    busemann(down, self.tau, self.pair.vmap[self.apex])
                ),
            },
            "pair_edges": [
                {"edge": e, "class": up.edge_class_id(e)} for e in self.pair_edges
            ],
            "image_edge": {
                "edge": self.image_edge,
                "class": down.edge_class_id(self.image_edge),
            },
            "probes": [
                {
                    "vertex": y,
                    "image_busemann": int(
                        busemann(down, self.tau, self.pair.vmap[y])
                    ),
                }
                for y in self.probes
            ],
            "ray_lengths": [len(r.edges) for r in self.rays],
            "verified": self.verified,
        }


def _find_apex(pair: MappedBallPair, image_edge: int) -> tuple[int, tuple[int, int]]:
    """An up vertex over the image edge's source carrying a pair onto it.

    Reached by enumerating lifts of the geodesic from the base to that
    source; the first endpoint (breadth-first instance order) whose star
    collapses onto the instance wins, so the result is deterministic.
    """
    up, down = pair.up, pair.down
    v = down.e_src[image_edge]
    pair.expand_up_vertex(0)
    if v == 0:
        endpoints = [0]
    else:
        path = geodesic(down, 0, v)
        first = path.edges[0]
        initials = sorted(
            e for e in up.out_edges(0) if pair.emap[e] == first
        )
        endpoints = []
        for initial in initials:
            tree = lift_ray(pair, path, initial, len(path.edges))
            for lift in tree.lifts:
                endpoints.append(up.e_dst[lift[-1]])
    for x in endpoints:
        pair.expand_up_vertex(x)
        onto = sorted(e for e in up.out_edges(x) if pair.emap[e] == image_edge)
        if len(onto) >= 2:
            return x, (onto[0], onto[1])
    raise SigmatreeError(
        "no collapsing pair over the selected marked instance is reachable "
        "by geodesic path lifts; a deeper ball or another end may be needed"
    )


def disconnection_witness(ptp: PTP, spec: EndSpec, lag: int,
                          depth: int, omega_cap: int = 4) -> DisconnectionWitness:
    """Build and verify the two-ray witness that the end is excluded.

    Fails with EndNotFaced when no collapsing pair faces the end (then no
    witness exists: that is the content of the criterion), and with
    BallTooShallow when the requested depth cannot host the search.
    """
    if lag < 0:
        raise ValueError("lag must be >= 0")
    spec.validate(ptp)
    if not end_is_faced(ptp, spec):
        raise EndNotFaced(f"end {spec.render()} is not faced; no witness exists")
    app = applicability_check(ptp)
    if not app.locally_surjective:
        raise SigmatreeError("witness construction needs a locally surjective map")
    pair = MappedBallPair(ptp, base_type_over(ptp, spec.base_type), omega_cap)
    # uniform core where the marked-edge search happens; the ray spine and
    # the lifts grow lazily beyond it
    core = min(depth, lag + pigeonhole_bound(ptp) + 1)
    pair.down.expand_uniformly(core)
    tau = realize_ray(pair.down, spec, depth)
    image_edge = translated_marked_edge(pair, tau, -lag)
    apex, pair_edges = _find_apex(pair, image_edge)
    down = pair.down
    v = down.e_src[image_edge]
    beta_v = busemann(down, tau, v)
    k_star = -beta_v
    gamma = ray_toward_end(down, tau, v, depth)
    if len(gamma.edges) < k_star:
        raise BallTooShallow(
            abs(beta_v) + 1, "ray toward the end too short for probes"
        )
    assert gamma.edges[0] == image_edge, "geodesic toward end must start with the image"
    lifts = []
    for e in pair_edges:
        tree = lift_ray(pair, gamma, e, k_star)
        lift = tree.lifts[0]
        verts = [pair.up.e_src[lift[0]]] + [pair.up.e_dst[x] for x in lift]
        lifts.append(RayInstance(pair.up, verts, list(lift)))
    probes = (lifts[0].vertices[k_star], lifts[1].vertices[k_star])
    w = DisconnectionWitness(
        pair=pair, tau=tau, apex=apex, pair_edges=pair_edges,
        image_edge=image_edge, rays=(lifts[0], lifts[1]), probes=probes,
        lag=lag, verified=False,
    )
    w.verified = verify_witness(pair, w, tau)
    return w


def verify_witness(pair: MappedBallPair, w: DisconnectionWitness,
                   tau: RayInstance) -> bool:
    """Recompute every invariant of the witness independently.

    Path computation and Busemann values are redone from the balls; the
    conjunction is returned, never assumed.
    """
    up, down = pair.up, pair.down
    e1, e2 = w.pair_edges
    try:
        if e1 == e2:
            return False
        if up.e_src[e1] != w.apex or up.e_src[e2] != w.apex:
            return False
        if pair.emap[e1] != pair.emap[e2] or pair.emap[e1] != w.image_edge:
            return False
        apex_img = pair.vmap[w.apex]
        if apex_img != down.e_src[w.image_edge]:
            return False
        if busemann(down, tau, apex_img) >= -w.lag:
            return False
        # probes sit on their rays with images back inside the 0-horoball
        for ray, probe in zip(w.rays, w.probes):
            if probe not in ray.vertices:
                return False
            if busemann(down, tau, pair.vmap[probe]) < 0:
                return False
        # each ray is a lift of a geodesic toward the end: images step
        # toward it (Busemann value +1 each step) starting with the image edge
        for ray, first in zip(w.rays, w.pair_edges):
            if ray.edges[0] != first:
                return False
            for e in ray.edges:
                img = pair.emap[e]
                if busemann(down, tau, down.e_dst[img]) != \
                        busemann(down, tau, down.e_src[img]) + 1:
                    return False
        path = geodesic(up, w.probes[0], w.probes[1])
        if w.apex not in path.vertices:
            return False
    except (KeyError, IndexError):
        return False
    return True
