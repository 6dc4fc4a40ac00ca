"""Concrete finite balls of both trees and the induced edge map.

Balls realize the quotient-level data as honest finite trees.  Vertices
and directed edge instances live in flat integer arrays so that large
balls (millions of vertices) stay cheap; ids are integers assigned in
expansion order, which makes every construction deterministic given the
expansion schedule.  ``expand_pair`` grows both balls uniformly to a
radius; the witness machinery instead grows balls vertex by vertex along
the paths it actually needs.

The induced edge map follows a fixed fiber-filling rule, so two runs
produce identical structures id for id.  Any equivariant assignment is
isomorphic to this one and every certified output is isomorphism
invariant.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field

import numpy as np

from .errors import BallBudgetExceeded
from .model import PTP, TypedGraph
from .multiplicity import is_omega

DEFAULT_BUDGET = 4_000_000
_VECTOR_LAYER_MIN = 2048


class GraphTables:
    """Integer-indexed view of a typed graph, shared by its balls."""

    def __init__(self, graph: TypedGraph):
        self.graph = graph
        self.type_ids = list(graph.vertex_types)
        self.type_index = {t: i for i, t in enumerate(self.type_ids)}
        self.cls_ids = sorted(graph.classes)
        self.cls_index = {c: i for i, c in enumerate(self.cls_ids)}
        self.cls_src = [self.type_index[graph.classes[c].src] for c in self.cls_ids]
        self.cls_dst = [self.type_index[graph.classes[c].dst] for c in self.cls_ids]
        self.cls_rev = [self.cls_index[graph.classes[c].reverse] for c in self.cls_ids]
        self.cls_mult = [
            -1 if is_omega(graph.classes[c].mult) else graph.classes[c].mult
            for c in self.cls_ids
        ]
        self.star_of_type = [
            [self.cls_index[c.id] for c in graph.star(t)] for t in self.type_ids
        ]
        # instance-table layout: per type, slot offsets per star class
        self.row_width = 0
        self.slot_offset_arr = np.full(
            (len(self.type_ids), len(self.cls_ids)), -1, dtype=np.int64
        )
        for t, star in enumerate(self.star_of_type):
            pos = 0
            for ci in star:
                self.slot_offset_arr[t, ci] = pos
                m = self.cls_mult[ci]
                pos += m if m >= 0 else 0
            self.row_width = max(self.row_width, pos)


class Ball:
    """A lazily expandable rooted ball of one tree.

    Vertex arrays: type, depth, parent edge (the instance parent->v, -1
    at the base), own out-edge block bounds (-1 while unexpanded).  Edge
    arrays: class, index within class at the source, endpoints, reverse
    instance.  The reverse of a vertex's parent edge always has index 0
    within its class at that vertex.
    """

    def __init__(self, graph: TypedGraph, base_type: str, omega_cap: int = 4,
                 budget: int = DEFAULT_BUDGET, track_instances: bool = False):
        if omega_cap < 1:
            raise ValueError("omega_cap must be >= 1")
        if base_type not in graph.vertex_types:
            raise KeyError(f"unknown vertex type {base_type!r}")
        self.tables = GraphTables(graph)
        self.graph = graph
        self.base_type = base_type
        self.omega_cap = omega_cap
        self.budget = budget
        self.radius = 0
        self.truncated = False
        self.v_type = array("q", [self.tables.type_index[base_type]])
        self.v_depth = array("q", [0])
        self.v_parent_edge = array("q", [-1])
        self.v_block_start = array("q", [-1])
        self.v_block_end = array("q", [-1])
        self.e_cls = array("q")
        self.e_idx = array("q")
        self.e_src = array("q")
        self.e_dst = array("q")
        self.e_rev = array("q")
        self.layer_bounds = [0, 1]  # vertex-id bounds per depth
        self._instances = {} if track_instances else None
        self._table_cache = None
        self._managed = False  # set when a MappedBallPair drives expansion

    # -- sizes and lookups ----------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.v_type)

    @property
    def n_edges(self) -> int:
        return len(self.e_cls)

    def vertex_type_id(self, v: int) -> str:
        return self.tables.type_ids[self.v_type[v]]

    def edge_class_id(self, e: int) -> str:
        return self.tables.cls_ids[self.e_cls[e]]

    def parent_of(self, v: int) -> int:
        pe = self.v_parent_edge[v]
        return -1 if pe < 0 else self.e_src[pe]

    def parent_rev_edge(self, v: int) -> int:
        """The instance v -> parent, or -1 at the base."""
        pe = self.v_parent_edge[v]
        return -1 if pe < 0 else self.e_rev[pe]

    def is_expanded(self, v: int) -> bool:
        return self.v_block_start[v] >= 0

    def out_edges(self, v: int) -> list[int]:
        """All outgoing instances at v (parent-ward first, then the block).

        Blocks interleave forward and reverse instances; the forward ones
        sit at even offsets.
        """
        out = []
        pr = self.parent_rev_edge(v)
        if pr >= 0:
            out.append(pr)
        if self.v_block_start[v] >= 0:
            out.extend(range(self.v_block_start[v], self.v_block_end[v], 2))
        return out

    def instance(self, v: int, cls_idx: int, slot: int) -> int:
        """The outgoing instance of a class at v with a given slot index."""
        if self._instances is None:
            raise RuntimeError("this ball does not track instance slots")
        off = self.tables.slot_offset_arr[self.v_type[v], cls_idx]
        return self._instances[v][off + slot]

    def instance_table(self) -> np.ndarray:
        """Dense (vertex, flat slot) -> edge id table; -1 where absent."""
        if self._instances is None:
            raise RuntimeError("this ball does not track instance slots")
        if self._table_cache is not None and len(self._table_cache) == self.n_vertices:
            return self._table_cache
        table = np.full((self.n_vertices, max(self.tables.row_width, 1)), -1,
                        dtype=np.int64)
        for v, row in self._instances.items():
            table[v, : len(row)] = row
        self._table_cache = table
        return table

    # -- plain expansion (no edge map) ------------------------------------

    def expand_vertex(self, v: int) -> None:
        """Materialize the star at v; finite classes exactly, OMEGA capped."""
        if self._managed:
            raise RuntimeError("ball is managed by a MappedBallPair; "
                               "expand through the pair")
        self._expand_plain(v)

    def _expand_plain(self, v: int) -> None:
        if self.v_block_start[v] >= 0:
            return
        t = self.tables
        vt = self.v_type[v]
        pr = self.parent_rev_edge(v)
        pcls = self.e_cls[pr] if pr >= 0 else -1
        row = None
        if self._instances is not None:
            row = [-1] * t.row_width
            self._table_cache = None
            if pr >= 0:
                row[t.slot_offset_arr[vt, pcls] + 0] = pr
        self.v_block_start[v] = len(self.e_cls)
        depth = self.v_depth[v] + 1
        for ci in t.star_of_type[vt]:
            m = t.cls_mult[ci]
            if m < 0:
                n = self.omega_cap
                self.truncated = True
            else:
                n = m
            start = 1 if ci == pcls else 0
            off = t.slot_offset_arr[vt, ci]
            for j in range(start, n):
                eid = len(self.e_cls)
                self._new_vertex(t.cls_dst[ci], depth, eid)
                self._new_edge_pair(ci, j, v, len(self.v_type) - 1)
                if row is not None:
                    row[off + j] = eid
        self.v_block_end[v] = len(self.e_cls)
        if row is not None:
            self._instances[v] = row

    def _new_vertex(self, type_idx: int, depth: int, parent_edge: int) -> int:
        vid = len(self.v_type)
        if vid >= self.budget:
            raise BallBudgetExceeded(self.budget)
        self.v_type.append(type_idx)
        self.v_depth.append(depth)
        self.v_parent_edge.append(parent_edge)
        self.v_block_start.append(-1)
        self.v_block_end.append(-1)
        return vid

    def _new_edge_pair(self, cls_idx: int, idx: int, src: int, dst: int) -> int:
        eid = len(self.e_cls)
        self.e_cls.append(cls_idx)
        self.e_idx.append(idx)
        self.e_src.append(src)
        self.e_dst.append(dst)
        self.e_rev.append(eid + 1)
        rc = self.tables.cls_rev[cls_idx]
        self.e_cls.append(rc)
        self.e_idx.append(0)
        self.e_src.append(dst)
        self.e_dst.append(src)
        self.e_rev.append(eid)
        return eid

    def expand_uniformly(self, radius: int) -> None:
        """Expand every vertex of depth < radius (plain rule)."""
        while self.radius < radius:
            lo, hi = self.layer_bounds[self.radius], self.layer_bounds[self.radius + 1]
            for v in range(lo, hi):
                self._expand_plain(v)
            self.radius += 1
            self.layer_bounds.append(self.n_vertices)

    # -- numpy views (taken fresh; do not hold across expansion) ----------

    def np_view(self, arr: array) -> np.ndarray:
        if len(arr) == 0:
            return np.empty(0, dtype=np.int64)
        return np.frombuffer(arr, dtype=np.int64)

    @property
    def depths(self) -> np.ndarray:
        return self.np_view(self.v_depth)

    def vertices_at_depth(self, depth: int) -> list[int]:
        return np.nonzero(self.depths == depth)[0].tolist()


@dataclass
class RayInstance:
    """A concrete simple edge path in a ball, usually starting at the base."""

    ball: Ball
    vertices: list[int]
    edges: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.edges)

    def classes(self) -> list[str]:
        return [self.ball.edge_class_id(e) for e in self.edges]

    def check(self) -> None:
        b = self.ball
        assert len(self.vertices) == len(self.edges) + 1
        for i, e in enumerate(self.edges):
            assert b.e_src[e] == self.vertices[i] and b.e_dst[e] == self.vertices[i + 1]
        for e1, e2 in zip(self.edges, self.edges[1:]):
            assert b.e_rev[e1] != e2, "ray backtracks"


def geodesic(ball: Ball, u: int, v: int) -> RayInstance:
    """The unique simple path from u to v (empty when u == v)."""
    if not (0 <= u < ball.n_vertices and 0 <= v < ball.n_vertices):
        raise KeyError("vertex not in ball")
    up_u, up_v = [u], [v]
    a, b = u, v
    while ball.v_depth[a] > ball.v_depth[b]:
        a = ball.parent_of(a)
        up_u.append(a)
    while ball.v_depth[b] > ball.v_depth[a]:
        b = ball.parent_of(b)
        up_v.append(b)
    while a != b:
        a = ball.parent_of(a)
        b = ball.parent_of(b)
        up_u.append(a)
        up_v.append(b)
    verts = up_u + up_v[-2::-1]
    edges = [ball.parent_rev_edge(up_u[i]) for i in range(len(up_u) - 1)]
    for i in range(len(up_v) - 1, 0, -1):
        edges.append(ball.v_parent_edge[up_v[i - 1]])
    return RayInstance(ball, verts, edges)


def tree_distance(ball: Ball, u: int, v: int) -> int:
    a, b = u, v
    da, db = ball.v_depth[a], ball.v_depth[b]
    dist = 0
    while da > db:
        a = ball.parent_of(a)
        da -= 1
        dist += 1
    while db > da:
        b = ball.parent_of(b)
        db -= 1
        dist += 1
    while a != b:
        a = ball.parent_of(a)
        b = ball.parent_of(b)
        dist += 2
    return dist


def busemann(ball: Ball, tau: RayInstance, p: int) -> int:
    """Horofunction value of p along tau: merge depth minus distance to it.

    Equals the limit of t - d(tau(t), p) for every t at or beyond the
    merge depth, which is how the brute-force checks validate it.
    """
    if not tau.vertices or tau.vertices[0] != 0:
        raise ValueError("tau must start at the ball base")
    on_ray = {v: i for i, v in enumerate(tau.vertices)}
    a = p
    while a not in on_ray:
        a = ball.parent_of(a)
        if a < 0:
            raise ValueError("vertex has no ancestor on tau")
    return 2 * on_ray[a] - ball.v_depth[p]


def busemann_table(ball: Ball, tau: RayInstance) -> np.ndarray:
    """Busemann values for every ball vertex at once.

    Children are always created after their parents, so the merge depth
    propagates in a single ascending pass; uniform layers run through
    numpy.
    """
    if not tau.vertices or tau.vertices[0] != 0:
        raise ValueError("tau must start at the ball base")
    n = ball.n_vertices
    merge = np.zeros(n, dtype=np.int64)
    uniform_end = ball.layer_bounds[-1]
    ray_depth = {v: i for i, v in enumerate(tau.vertices)}
    if uniform_end > 1:
        parents_e = ball.np_view(ball.v_parent_edge)
        srcs = ball.np_view(ball.e_src)
        for d in range(1, len(ball.layer_bounds) - 1):
            lo, hi = ball.layer_bounds[d], ball.layer_bounds[d + 1]
            if lo >= hi:
                continue
            merge[lo:hi] = merge[srcs[parents_e[lo:hi]]]
            if d < len(tau.vertices):
                tv = tau.vertices[d]
                if lo <= tv < hi:
                    merge[tv] = d
    for v in range(uniform_end, n):
        merge[v] = ray_depth.get(v, merge[ball.parent_of(v)])
    return 2 * merge - ball.depths


def horoball_filter(ball: Ball, tau: RayInstance, r: int) -> list[int]:
    """Vertices with Busemann value >= r; always a subtree of the ball."""
    beta = busemann_table(ball, tau)
    return np.nonzero(beta >= r)[0].tolist()


# -- the mapped pair --------------------------------------------------------


@dataclass(frozen=True)
class _Template:
    """Precomputed expansion recipe for one (type, parent class, sigma)."""

    cls: tuple[int, ...]
    idx: tuple[int, ...]
    tgt: tuple[int, ...]
    slot: tuple[int, ...]
    ctype: tuple[int, ...]
    truncated: bool

    def as_arrays(self):
        return (
            np.asarray(self.cls, dtype=np.int64),
            np.asarray(self.idx, dtype=np.int64),
            np.asarray(self.tgt, dtype=np.int64),
            np.asarray(self.slot, dtype=np.int64),
            np.asarray(self.ctype, dtype=np.int64),
        )


class MappedBallPair:
    """Balls of both trees plus the induced concrete edge map.

    ``vmap`` and ``emap`` send up-ball vertices and directed instances to
    their images; both commute with reversal and endpoints by
    construction, which the tests re-verify.  The down ball grows on
    demand to contain images (morphisms do not increase distances, so a
    radius-R up ball maps into the radius-R down ball).
    """

    def __init__(self, ptp: PTP, base_type: str, omega_cap: int = 4,
                 budget: int = DEFAULT_BUDGET):
        if base_type not in ptp.upstairs.vertex_types:
            raise KeyError(f"unknown upstairs type {base_type!r}")
        self.ptp = ptp
        self.omega_cap = omega_cap
        self.up = Ball(ptp.upstairs, base_type, omega_cap, budget)
        self.down = Ball(
            ptp.downstairs, ptp.vertex_map[base_type], omega_cap, budget,
            track_instances=True,
        )
        self.up._managed = True
        self.vmap = array("q", [0])
        self.emap = array("q")
        self._templates: dict[tuple[int, int, int], _Template] = {}
        ut = self.up.tables
        self._cell_of_source = {
            ut.cls_index[cid]: cell for cid, cell in ptp.cell_of_source.items()
        }
        self._fiber = {
            ut.cls_index[cid]: ptp.fiber_of(cid) for cid in ptp.upstairs.classes
        }

    # -- slot allocation ---------------------------------------------------

    def _alloc_slots(self, up_type: str, pcls: int, sigma: int) -> dict:
        """Ordered slot lists per cell at this type, honoring the parent slot.

        Collapsing cells take globally consecutive slot blocks per target
        class (so a fully marked class is concretely fully covered by
        collapsing images); non-collapsing cells fill the remaining slots
        in canonical cell order.  When the slot already consumed by the
        parent edge falls outside its cell's allocation, it is swapped in
        and the displaced slot handed to the previous owner.
        """
        ptp = self.ptp
        alloc: dict[tuple, list[int]] = {}
        cells_here = ptp.cells_at(up_type)
        by_target: dict[str, list] = {}
        for cell in cells_here:
            by_target.setdefault(cell.target, []).append(cell)
        for target, cells in by_target.items():
            mult = ptp.downstairs.classes[target].mult
            all_collapsing = [c for c in ptp.cells_targeting(target) if c.is_collapsing()]
            offset = {}
            pos = 0
            for c in all_collapsing:
                offset[c.key()] = pos
                pos += c.coverage
            own_slots: set[int] = set()
            for cell in cells:
                if cell.is_collapsing():
                    o = offset[cell.key()]
                    slots = [(o + i) % mult for i in range(cell.coverage)]
                    alloc[cell.key()] = slots
                    own_slots.update(slots)
            free = [s for s in range(mult) if s not in own_slots]
            pos = 0
            for cell in cells:
                if not cell.is_collapsing():
                    alloc[cell.key()] = free[pos:pos + cell.coverage]
                    pos += cell.coverage
        if pcls >= 0:
            cell0 = self._cell_of_source[pcls]
            slots0 = alloc[cell0.key()]
            if sigma not in slots0:
                displaced = slots0[0]
                owner = None
                for cell in cells_here:
                    if (cell.key() != cell0.key() and cell.target == cell0.target
                            and sigma in alloc[cell.key()]):
                        owner = cell.key()
                        break
                alloc[cell0.key()] = [sigma] + slots0[1:]
                if owner is not None:
                    alloc[owner] = [displaced if s == sigma else s
                                    for s in alloc[owner]]
            rest = sorted(s for s in alloc[cell0.key()] if s != sigma)
            alloc[cell0.key()] = [sigma] + rest
        return alloc

    def _build_template(self, type_idx: int, pcls: int, sigma: int) -> _Template:
        ut = self.up.tables
        dt = self.down.tables
        alloc = self._alloc_slots(ut.type_ids[type_idx], pcls, sigma)
        rows_cls, rows_idx, rows_tgt, rows_slot, rows_ct = [], [], [], [], []
        truncated = False
        for ci in ut.star_of_type[type_idx]:
            cell = self._cell_of_source[ci]
            fiber = self._fiber[ci]
            tgt_idx = dt.cls_index[cell.target]
            order = list(alloc[cell.key()])
            if ci != pcls:
                order = sorted(order)
            m = ut.cls_mult[ci]
            if m < 0:
                n = self.omega_cap
                truncated = True
            else:
                n = m
            seq: list[int] = []
            if not is_omega(fiber):
                for pos, s in enumerate(order):
                    quota = fiber - 1 if (ci == pcls and pos == 0) else fiber
                    seq.extend([s] * quota)
            first = 1 if ci == pcls else 0
            for j in range(first, n):
                k = j - first
                if is_omega(fiber):
                    s = order[0]
                else:
                    s = seq[k]
                rows_cls.append(ci)
                rows_idx.append(j)
                rows_tgt.append(tgt_idx)
                rows_slot.append(s)
                rows_ct.append(ut.cls_dst[ci])
        return _Template(
            cls=tuple(rows_cls), idx=tuple(rows_idx), tgt=tuple(rows_tgt),
            slot=tuple(rows_slot), ctype=tuple(rows_ct), truncated=truncated,
        )

    def _template(self, type_idx: int, pcls: int, sigma: int) -> _Template:
        key = (type_idx, pcls, sigma)
        tmpl = self._templates.get(key)
        if tmpl is None:
            tmpl = self._build_template(type_idx, pcls, sigma)
            self._templates[key] = tmpl
        return tmpl

    # -- expansion -----------------------------------------------------------

    def expand_up_vertex(self, v: int) -> None:
        """Materialize the star at an up vertex together with its images."""
        up, down = self.up, self.down
        if up.v_block_start[v] >= 0:
            return
        w = self.vmap[v]
        down._expand_plain(w)
        pr = up.parent_rev_edge(v)
        if pr >= 0:
            pcls = up.e_cls[pr]
            sigma = down.e_idx[self.emap[pr]]
        else:
            pcls, sigma = -1, -1
        tmpl = self._template(up.v_type[v], pcls, sigma)
        if tmpl.truncated:
            up.truncated = True
        up.v_block_start[v] = len(up.e_cls)
        depth = up.v_depth[v] + 1
        for cls_i, idx, tgt, slot, ctype in zip(
            tmpl.cls, tmpl.idx, tmpl.tgt, tmpl.slot, tmpl.ctype
        ):
            img = down.instance(w, tgt, slot)
            up._new_vertex(ctype, depth, len(up.e_cls))
            up._new_edge_pair(cls_i, idx, v, len(up.v_type) - 1)
            self.vmap.append(down.e_dst[img])
            self.emap.append(img)
            self.emap.append(down.e_rev[img])
        up.v_block_end[v] = len(up.e_cls)

    def expand_to_radius(self, radius: int, vectorized: bool = True) -> None:
        """Uniformly expand the up ball (and its images) to the given radius."""
        up = self.up
        while up.radius < radius:
            lo, hi = up.layer_bounds[up.radius], up.layer_bounds[up.radius + 1]
            if vectorized and up.radius >= 1 and hi - lo >= _VECTOR_LAYER_MIN:
                self._expand_layer_vectorized(lo, hi)
            else:
                for v in range(lo, hi):
                    self.expand_up_vertex(v)
            up.radius += 1
            up.layer_bounds.append(up.n_vertices)

    def _expand_layer_vectorized(self, lo: int, hi: int) -> None:
        """Expand one uniform BFS layer with numpy; identical output to the
        scalar path, id for id (asserted by the test suite)."""
        up, down = self.up, self.down
        n = hi - lo
        vids = np.arange(lo, hi, dtype=np.int64)
        # fancy indexing copies; plain slices of frombuffer views would pin
        # the storage and break later appends
        vt = up.np_view(up.v_type)[lo:hi].copy()
        pr = up.np_view(up.e_rev)[up.np_view(up.v_parent_edge)[lo:hi]]
        pcls = up.np_view(up.e_cls)[pr]
        sigma = down.np_view(down.e_idx)[self.np_emap()[pr]]
        wimg = self.np_vmap()[lo:hi].copy()
        depth_child = int(up.v_depth[lo]) + 1

        for w in np.unique(wimg).tolist():
            down._expand_plain(w)

        # group by template key
        n_cls = len(up.tables.cls_ids) + 2
        max_s = int(sigma.max()) + 2 if n else 1
        code = (vt * n_cls + (pcls + 1)) * max_s + (sigma + 1)
        uniq, inv = np.unique(code, return_inverse=True)
        counts = np.zeros(n, dtype=np.int64)
        groups = []
        for gi in range(len(uniq)):
            members = np.nonzero(inv == gi)[0]
            m0 = int(members[0])
            key = (int(vt[m0]), int(pcls[m0]), int(sigma[m0]))
            tmpl = self._template(*key)
            if tmpl.truncated:
                up.truncated = True
            groups.append((members, tmpl.as_arrays()))
            counts[members] = len(tmpl.cls)
        starts = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        total = int(starts[-1])
        if up.n_vertices + total > up.budget:
            raise BallBudgetExceeded(up.budget, up.n_vertices + total)

        g_cls = np.empty(total, dtype=np.int64)
        g_idx = np.empty(total, dtype=np.int64)
        g_tgt = np.empty(total, dtype=np.int64)
        g_slot = np.empty(total, dtype=np.int64)
        g_ct = np.empty(total, dtype=np.int64)
        g_parent = np.empty(total, dtype=np.int64)
        for members, (a_cls, a_idx, a_tgt, a_slot, a_ct) in groups:
            e = len(a_cls)
            if e == 0:
                continue
            pos = (starts[members][:, None]
                   + np.arange(e, dtype=np.int64)[None, :]).ravel()
            reps = len(members)
            g_cls[pos] = np.tile(a_cls, reps)
            g_idx[pos] = np.tile(a_idx, reps)
            g_tgt[pos] = np.tile(a_tgt, reps)
            g_slot[pos] = np.tile(a_slot, reps)
            g_ct[pos] = np.tile(a_ct, reps)
            g_parent[pos] = np.repeat(vids[members], e)

        # resolve images through the down instance table
        dt = down.tables
        w_of_edge = wimg[g_parent - lo]
        wtype = down.np_view(down.v_type)[w_of_edge]
        off = dt.slot_offset_arr[wtype, g_tgt]
        table = down.instance_table()
        img = table[w_of_edge, off + g_slot]
        if total and int(img.min()) < 0:
            raise AssertionError("image instance missing (internal)")
        img_dst = down.np_view(down.e_dst)[img]
        img_rev2 = down.np_view(down.e_rev)[img]

        # commit children, edge pairs and maps
        nv0 = up.n_vertices
        ne0 = up.n_edges
        child_ids = nv0 + np.arange(total, dtype=np.int64)
        fwd_ids = ne0 + 2 * np.arange(total, dtype=np.int64)
        up.v_type.frombytes(g_ct.tobytes())
        up.v_depth.frombytes(np.full(total, depth_child, dtype=np.int64).tobytes())
        up.v_parent_edge.frombytes(fwd_ids.tobytes())
        minus1 = np.full(total, -1, dtype=np.int64)
        up.v_block_start.frombytes(minus1.tobytes())
        up.v_block_end.frombytes(minus1.tobytes())

        ecls = np.empty(2 * total, dtype=np.int64)
        eidx = np.empty(2 * total, dtype=np.int64)
        esrc = np.empty(2 * total, dtype=np.int64)
        edst = np.empty(2 * total, dtype=np.int64)
        erev = np.empty(2 * total, dtype=np.int64)
        emap2 = np.empty(2 * total, dtype=np.int64)
        rev_lookup = np.asarray(up.tables.cls_rev, dtype=np.int64)
        ecls[0::2] = g_cls
        ecls[1::2] = rev_lookup[g_cls]
        eidx[0::2] = g_idx
        eidx[1::2] = 0
        esrc[0::2] = g_parent
        esrc[1::2] = child_ids
        edst[0::2] = child_ids
        edst[1::2] = g_parent
        erev[0::2] = fwd_ids + 1
        erev[1::2] = fwd_ids
        emap2[0::2] = img
        emap2[1::2] = img_rev2
        up.e_cls.frombytes(ecls.tobytes())
        up.e_idx.frombytes(eidx.tobytes())
        up.e_src.frombytes(esrc.tobytes())
        up.e_dst.frombytes(edst.tobytes())
        up.e_rev.frombytes(erev.tobytes())
        self.emap.frombytes(emap2.tobytes())
        self.vmap.frombytes(img_dst.tobytes())

        bs = up.np_view(up.v_block_start)
        be = up.np_view(up.v_block_end)
        bs[lo:hi] = ne0 + 2 * starts[:-1]
        be[lo:hi] = ne0 + 2 * starts[1:]

    # -- views ---------------------------------------------------------------

    def np_vmap(self) -> np.ndarray:
        return self.up.np_view(self.vmap)

    def np_emap(self) -> np.ndarray:
        return self.up.np_view(self.emap)


def expand_pair(ptp: PTP, base_type: str, radius: int, omega_cap: int = 4,
                budget: int = DEFAULT_BUDGET) -> MappedBallPair:
    """Uniform ball pair: up ball of the given radius around a base vertex
    of ``base_type``, the full down ball of the same radius, and the
    induced edge map realizing the quotient map on the balls."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    pair = MappedBallPair(ptp, base_type, omega_cap, budget)
    pair.down.expand_uniformly(radius)
    pair.expand_to_radius(radius)
    return pair


# -- DOT export ---------------------------------------------------------------


def ball_to_dot(ball: Ball, name: str = "ball", marked: set[int] | None = None,
                spine: set[int] | None = None, prefix: str = "v") -> str:
    """Render a ball as a DOT digraph; one arrow per geometric edge pair.

    Marked edges are drawn red, a designated spine blue.
    """
    marked = marked or set()
    spine = spine or set()
    lines = [f"digraph {name} {{"]
    for v in range(ball.n_vertices):
        lines.append(
            f'  {prefix}{v} [label="{ball.vertex_type_id(v)}@{ball.v_depth[v]}"];'
        )
    for e in range(ball.n_edges):
        if e > ball.e_rev[e]:
            continue
        attrs = [f'label="{ball.edge_class_id(e)}#{ball.e_idx[e]}"']
        if e in marked or ball.e_rev[e] in marked:
            attrs.append("color=red")
        elif e in spine or ball.e_rev[e] in spine:
            attrs.append("color=blue")
        lines.append(
            f"  {prefix}{ball.e_src[e]} -> {prefix}{ball.e_dst[e]} [{', '.join(attrs)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def pair_to_dot(pair: MappedBallPair, name: str = "pair",
                marked: set[int] | None = None, spine: set[int] | None = None,
                max_map_edges: int = 512) -> str:
    """Both balls side by side with dashed map edges between them."""
    up_dot = ball_to_dot(pair.up, "up", prefix="u").splitlines()[1:-1]
    down_dot = ball_to_dot(pair.down, "down", marked=marked, spine=spine,
                           prefix="d").splitlines()[1:-1]
    lines = [f"digraph {name} {{", "  subgraph cluster_up {", '    label="upstairs";']
    lines += ["  " + ln for ln in up_dot]
    lines += ["  }", "  subgraph cluster_down {", '    label="downstairs";']
    lines += ["  " + ln for ln in down_dot]
    lines += ["  }"]
    for v in range(pair.up.n_vertices):
        if v >= max_map_edges:
            lines.append(f"  // vertex map truncated at {max_map_edges} edges")
            break
        lines.append(f"  u{v} -> d{pair.vmap[v]} [style=dashed, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"
