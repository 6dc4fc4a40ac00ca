import random

import pytest
from hypothesis import given, settings, strategies as st

import sigmatree.ball as ball_mod
from sigmatree.ball import (Ball, MappedBallPair, RayInstance, busemann,
                            busemann_table, expand_pair, geodesic,
                            horoball_filter, tree_distance)
from sigmatree.classify import parse_endspec, realize_ray
from sigmatree.errors import BallBudgetExceeded


def interior_degrees(ball):
    return {
        len(ball.out_edges(v))
        for v in range(ball.n_vertices)
        if ball.v_depth[v] < ball.radius
    }


def down_ball(ptp, radius):
    base = sorted(ptp.upstairs.vertex_types)[0]
    ball = Ball(ptp.downstairs, ptp.vertex_map[base], track_instances=True)
    ball.expand_uniformly(radius)
    return ball


def random_ray(ball, rng, length):
    """A random non-backtracking concrete ray from the base."""
    verts = [0]
    edges = []
    for _ in range(length):
        v = verts[-1]
        ball._expand_plain(v) if not ball._managed else None
        outs = [
            e for e in ball.out_edges(v)
            if not edges or ball.e_rev[edges[-1]] != e
        ]
        if not outs:
            break
        e = rng.choice(outs)
        edges.append(e)
        verts.append(ball.e_dst[e])
    return RayInstance(ball, verts, edges)


class TestExpansion:
    def test_two_rose_degrees(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        assert interior_degrees(pair.up) == {7}
        assert interior_degrees(pair.down) == {4}

    def test_bs24_degrees(self, bs24):
        pair = expand_pair(bs24, "v", 2)
        assert interior_degrees(pair.up) == {6}
        assert interior_degrees(pair.down) == {3}

    def test_ascending_degrees(self, ascending):
        pair = expand_pair(ascending, "v", 3)
        assert interior_degrees(pair.up) == {5}
        assert interior_degrees(pair.down) == {3}

    def test_radius_zero(self, two_rose):
        pair = expand_pair(two_rose, "v", 0)
        assert pair.up.n_vertices == 1
        assert pair.up.n_edges == 0
        assert len(pair.emap) == 0

    def test_treeness(self, corpus):
        for entry in corpus.values():
            base = sorted(entry.ptp.upstairs.vertex_types)[0]
            pair = expand_pair(entry.ptp, base, 3)
            for b in (pair.up, pair.down):
                assert b.n_edges // 2 == b.n_vertices - 1, entry.name
                # every non-base vertex has exactly one parent
                for v in range(1, b.n_vertices):
                    assert b.v_parent_edge[v] >= 0

    def test_determinism(self, two_rose):
        p1 = expand_pair(two_rose, "v", 4)
        p2 = expand_pair(two_rose, "v", 4)
        for attr in ("e_cls", "e_idx", "e_src", "e_dst", "e_rev",
                     "v_type", "v_depth", "v_parent_edge"):
            assert list(getattr(p1.up, attr)) == list(getattr(p2.up, attr))
        assert list(p1.emap) == list(p2.emap)
        assert list(p1.vmap) == list(p2.vmap)

    def test_scalar_matches_vectorized(self, corpus):
        for entry in corpus.values():
            base = sorted(entry.ptp.upstairs.vertex_types)[0]
            pv = MappedBallPair(entry.ptp, base)
            pv.down.expand_uniformly(4)
            old = ball_mod._VECTOR_LAYER_MIN
            ball_mod._VECTOR_LAYER_MIN = 1
            try:
                pv.expand_to_radius(4)
            finally:
                ball_mod._VECTOR_LAYER_MIN = old
            ps = MappedBallPair(entry.ptp, base)
            ps.down.expand_uniformly(4)
            ps.expand_to_radius(4, vectorized=False)
            for attr in ("e_cls", "e_idx", "e_src", "e_dst", "e_rev",
                         "v_type", "v_depth", "v_parent_edge",
                         "v_block_start", "v_block_end"):
                assert list(getattr(pv.up, attr)) == list(getattr(ps.up, attr)), \
                    (entry.name, attr)
            assert list(pv.emap) == list(ps.emap), entry.name
            assert list(pv.vmap) == list(ps.vmap), entry.name

    def test_map_simulation(self, corpus):
        for entry in corpus.values():
            base = sorted(entry.ptp.upstairs.vertex_types)[0]
            pair = expand_pair(entry.ptp, base, 3)
            up, down = pair.up, pair.down
            for e in range(up.n_edges):
                img = pair.emap[e]
                assert pair.vmap[up.e_src[e]] == down.e_src[img]
                assert pair.vmap[up.e_dst[e]] == down.e_dst[img]
                assert pair.emap[up.e_rev[e]] == down.e_rev[img]

    def test_edge_map_respects_cells(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        up, down = pair.up, pair.down
        for e in range(up.n_edges):
            up_cls = up.edge_class_id(e)
            want = two_rose.cell_of_source[up_cls].target
            assert down.edge_class_id(pair.emap[e]) == want

    def test_image_of_geodesic_is_edge_path(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        rng = random.Random(5)
        for _ in range(20):
            u = rng.randrange(pair.up.n_vertices)
            v = rng.randrange(pair.up.n_vertices)
            path = geodesic(pair.up, u, v)
            imgs = [pair.emap[e] for e in path.edges]
            down = pair.down
            prev_dst = None
            for ie in imgs:
                if prev_dst is not None:
                    assert down.e_src[ie] == prev_dst
                prev_dst = down.e_dst[ie]

    def test_budget(self, two_rose):
        with pytest.raises(BallBudgetExceeded):
            expand_pair(two_rose, "v", 9, budget=10_000)

    def test_truncation_flag(self, free_product):
        pair = expand_pair(free_product, "A", 3, omega_cap=4)
        assert pair.up.truncated
        assert not pair.down.truncated
        # capped interior stars: omega classes yield exactly omega_cap edges
        assert interior_degrees(pair.up) == {4}


class TestGeodesics:
    def test_empty(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        path = geodesic(pair.up, 5, 5)
        assert path.vertices == [5] and path.edges == []

    def test_base_to_depth3(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        down = pair.down
        v = down.vertices_at_depth(3)[0]
        path = geodesic(down, 0, v)
        assert len(path.edges) == 3
        path.check()
        assert path.vertices[0] == 0 and path.vertices[-1] == v

    def test_through_common_ancestor(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        down = pair.down
        a, b = down.vertices_at_depth(2)[0], down.vertices_at_depth(2)[-1]
        path = geodesic(down, a, b)
        path.check()
        assert 0 in path.vertices  # branches split at the base
        assert len(path.edges) == tree_distance(down, a, b) == 4

    def test_unknown_vertex(self, two_rose):
        pair = expand_pair(two_rose, "v", 1)
        with pytest.raises(KeyError):
            geodesic(pair.down, 0, 10**6)


class TestBusemann:
    def test_on_ray_point(self, two_rose):
        down = down_ball(two_rose, 6)
        tau = realize_ray(down, parse_endspec(";x+", "w", two_rose), 6)
        for t in range(7):
            assert busemann(down, tau, tau.vertices[t]) == t

    def test_neighbor_off_ray(self, two_rose):
        down = down_ball(two_rose, 6)
        tau = realize_ray(down, parse_endspec(";x+", "w", two_rose), 6)
        v3 = tau.vertices[3]
        off = [down.e_dst[e] for e in down.out_edges(v3)
               if down.e_dst[e] not in (tau.vertices[2], tau.vertices[4])]
        for p in off:
            assert busemann(down, tau, p) == 2

    def test_formula_equals_brute_limit(self, corpus):
        # beta(p) == t - d(tau(t), p) for all t at or beyond the merge depth
        rng = random.Random(99)
        for entry in corpus.values():
            ptp = entry.ptp
            down = down_ball(ptp, 8)
            for _ in range(3):
                tau = random_ray(down, rng, 8)
                if len(tau.edges) < 8:
                    continue
                beta = busemann_table(down, tau)
                for p in rng.sample(range(down.n_vertices),
                                    min(120, down.n_vertices)):
                    t = 8
                    brute = t - tree_distance(down, tau.vertices[t], p)
                    assert beta[p] == busemann(down, tau, p) == brute

    def test_brute_limit_is_stable_beyond_merge(self, two_rose):
        down = down_ball(two_rose, 8)
        tau = realize_ray(down, parse_endspec(";x+", "w", two_rose), 8)
        rng = random.Random(3)
        for p in rng.sample(range(down.n_vertices), 60):
            b = busemann(down, tau, p)
            merge = (b + down.v_depth[p]) // 2
            vals = {
                t - tree_distance(down, tau.vertices[t], p)
                for t in range(merge, 9)
            }
            assert vals == {b}

    def test_empty_tau_rejected(self, two_rose):
        down = down_ball(two_rose, 2)
        with pytest.raises(ValueError):
            busemann(down, RayInstance(down, [], []), 0)


class TestHoroballs:
    def test_very_negative_r_is_everything(self, two_rose):
        down = down_ball(two_rose, 5)
        tau = realize_ray(down, parse_endspec(";x+", "w", two_rose), 5)
        assert set(horoball_filter(down, tau, -5)) == \
            set(range(down.n_vertices))

    def test_r_equal_radius_is_ray_tip(self, two_rose):
        down = down_ball(two_rose, 5)
        tau = realize_ray(down, parse_endspec(";x+", "w", two_rose), 5)
        assert horoball_filter(down, tau, 5) == [tau.vertices[5]]

    @settings(max_examples=10, deadline=None)
    @given(r1=st.integers(-6, 6), r2=st.integers(-6, 6), seed=st.integers(0, 99))
    def test_nesting(self, two_rose, r1, r2, seed):
        lo, hi = min(r1, r2), max(r1, r2)
        down = down_ball(two_rose, 6)
        tau = random_ray(down, random.Random(seed), 6)
        inner = set(horoball_filter(down, tau, hi))
        outer = set(horoball_filter(down, tau, lo))
        assert inner <= outer

    def test_horoball_is_subtree(self, corpus):
        # the induced subgraph on any horoball is connected
        rng = random.Random(21)
        for entry in corpus.values():
            ptp = entry.ptp
            down = down_ball(ptp, 6)
            tau = random_ray(down, rng, 6)
            for r in (-3, -1, 0, 2):
                members = set(horoball_filter(down, tau, r))
                if not members:
                    continue
                inner_edges = sum(
                    1 for v in members
                    if down.parent_of(v) in members
                )
                assert len(members) - inner_edges == 1, (entry.name, r)
