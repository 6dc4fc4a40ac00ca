import dataclasses
import random

import pytest

from sigmatree.ball import MappedBallPair, busemann
from sigmatree.classify import end_is_faced, parse_endspec, realize_ray
from sigmatree.errors import BallTooShallow, EndNotFaced
from sigmatree.fuzz import random_endspec
from sigmatree.oracle import same_preimage_component
from sigmatree.witness import (disconnection_witness, pigeonhole_bound,
                               translated_marked_edge, verify_witness)


def faced_ends(rng, ptp, count):
    out = []
    while len(out) < count:
        spec = random_endspec(rng, ptp)
        if spec is not None and end_is_faced(ptp, spec):
            out.append(spec)
    return out


class TestTranslatedMarkedEdge:
    def test_pigeonhole_bound_trivial(self, two_rose):
        # a (type, class) repeat along any ray within #classes + 1 steps
        assert pigeonhole_bound(two_rose) == 5
        pair = MappedBallPair(two_rose, "v")
        pair.down.expand_uniformly(8)
        spec = parse_endspec(";x+", "w", two_rose)
        tau = realize_ray(pair.down, spec, 8)
        down = pair.down
        seen = set()
        for k, e in enumerate(tau.edges[:pigeonhole_bound(two_rose) + 1]):
            key = (down.vertex_type_id(down.e_src[e]), down.edge_class_id(e))
            if key in seen:
                break
            seen.add(key)
        assert k <= pigeonhole_bound(two_rose)

    def test_two_rose_r_minus3(self, two_rose):
        pair = MappedBallPair(two_rose, "v")
        pair.down.expand_uniformly(9)
        spec = parse_endspec(";x+", "w", two_rose)
        tau = realize_ray(pair.down, spec, 9)
        e = translated_marked_edge(pair, tau, -3)
        down = pair.down
        assert down.edge_class_id(e) in ("x-", "y-")
        # oriented toward the end, outside the level -3 horoball
        assert busemann(down, tau, down.e_dst[e]) == \
            busemann(down, tau, down.e_src[e]) + 1
        assert busemann(down, tau, down.e_dst[e]) < -3
        assert down.v_depth[down.e_src[e]] <= 6

    def test_shallow_ball_errors(self, two_rose):
        pair = MappedBallPair(two_rose, "v")
        pair.down.expand_uniformly(4)
        spec = parse_endspec(";x+", "w", two_rose)
        tau = realize_ray(pair.down, spec, 4)
        with pytest.raises(BallTooShallow) as exc:
            translated_marked_edge(pair, tau, 4)  # r >= ball radius
        assert exc.value.required_depth > 4
        with pytest.raises(BallTooShallow):
            translated_marked_edge(pair, tau, -4)


class TestDisconnectionWitness:
    def test_two_rose_documented_case(self, two_rose):
        spec = parse_endspec("x+;x+", "w", two_rose)
        w = disconnection_witness(two_rose, spec, lag=3, depth=10)
        assert w.verified
        assert verify_witness(w.pair, w, w.tau)
        # apex image strictly below the lag horoball
        assert busemann(w.pair.down, w.tau, w.pair.vmap[w.apex]) < -3

    def test_unfaced_end_refused(self, ascending):
        spec = parse_endspec(";u+", "w", ascending)
        with pytest.raises(EndNotFaced):
            disconnection_witness(ascending, spec, lag=2, depth=8)

    def test_lag_zero_degenerate(self, two_rose):
        spec = parse_endspec(";x+", "w", two_rose)
        w = disconnection_witness(two_rose, spec, lag=0, depth=8)
        assert w.verified
        assert not same_preimage_component(w.pair, w.tau, 0, *w.probes)

    def test_monotone_lag(self, two_rose):
        spec = parse_endspec(";y+", "w", two_rose)
        for lag in (4, 3, 2, 1, 0):
            w = disconnection_witness(two_rose, spec, lag=lag, depth=11)
            assert w.verified, lag

    def test_round_trip_random_faced_ends(self, two_rose, bs24):
        rng = random.Random(17)
        for ptp in (two_rose, bs24):
            for spec in faced_ends(rng, ptp, 5):
                for lag in (1, 2, 4):
                    w = disconnection_witness(ptp, spec, lag=lag, depth=12)
                    assert w.verified, (spec.render(), lag)
                    assert not same_preimage_component(
                        w.pair, w.tau, -lag, *w.probes
                    ), (spec.render(), lag)

    def test_probes_in_zero_horoball_preimage(self, two_rose):
        spec = parse_endspec(";x+", "w", two_rose)
        w = disconnection_witness(two_rose, spec, lag=2, depth=9)
        for y in w.probes:
            assert busemann(w.pair.down, w.tau, w.pair.vmap[y]) >= 0


class TestVerifyWitness:
    def _witness(self, two_rose):
        spec = parse_endspec(";x+", "w", two_rose)
        return disconnection_witness(two_rose, spec, lag=2, depth=9)

    def test_tampered_apex_inside_horoball(self, two_rose):
        w = self._witness(two_rose)
        # pretend the lag were much larger: the apex is no longer outside
        bad = dataclasses.replace(w, lag=99)
        assert not verify_witness(w.pair, bad, w.tau)

    def test_tampered_probes_same_ray(self, two_rose):
        w = self._witness(two_rose)
        bad = dataclasses.replace(w, probes=(w.probes[0], w.probes[0]))
        # both probes on one lift: the path between them avoids the apex
        assert not verify_witness(w.pair, bad, w.tau)

    def test_tampered_pair_edges(self, two_rose):
        w = self._witness(two_rose)
        bad = dataclasses.replace(w, pair_edges=(w.pair_edges[0],
                                                 w.pair_edges[0]))
        assert not verify_witness(w.pair, bad, w.tau)
