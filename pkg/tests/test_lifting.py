import random

import pytest

from sigmatree.ball import MappedBallPair, expand_pair
from sigmatree.classify import parse_endspec, realize_ray
from sigmatree.errors import InconclusiveMarking, SigmatreeError
from sigmatree.fuzz import random_endspec
from sigmatree.lifting import (base_type_over, lift_initials, lift_ray,
                               q_fiber_singleton, ray_toward_end)
from sigmatree.model import parse_and_validate
from sigmatree.multiplicity import mult_sum


def expected_per_step_fiber(ptp, down_cls):
    """Type-level preimage count of a covered instance: the covering cell's
    fiber sum (single-cell corpus entries make this well defined)."""
    cells = ptp.cells_targeting(down_cls)
    assert len(cells) == 1
    return mult_sum(f for _, f in cells[0].sources)


class TestLiftCounts:
    def test_x_plus_unique_lift(self, two_rose):
        pair = MappedBallPair(two_rose, "v")
        pair.down.expand_uniformly(1)
        spec = parse_endspec(";x+", "w", two_rose)
        ray = realize_ray(pair.down, spec, 6)
        pair.expand_to_radius(1)
        initials = lift_initials(pair, ray.edges[0])
        assert len(initials) == 1  # fiber of x+ is 1
        for d in range(7):
            tree = lift_ray(pair, ray, initials[0], d)
            assert len(tree.lifts) == 1, d

    def test_x_minus_doubles(self, two_rose):
        pair = MappedBallPair(two_rose, "v")
        pair.down.expand_uniformly(1)
        spec = parse_endspec(";x-", "w", two_rose)
        ray = realize_ray(pair.down, spec, 5)
        pair.expand_to_radius(1)
        initials = lift_initials(pair, ray.edges[0])
        assert len(initials) == 2
        for d in range(1, 6):
            total = sum(
                len(lift_ray(pair, ray, e, d).lifts) for e in initials
            )
            assert total == 2 ** d, d

    def test_depth_zero_single_empty_lift(self, two_rose):
        pair = expand_pair(two_rose, "v", 2)
        spec = parse_endspec(";x+", "w", two_rose)
        ray = realize_ray(pair.down, spec, 2)
        tree = lift_ray(pair, ray, lift_initials(pair, ray.edges[0])[0], 0)
        assert tree.lifts == [()]

    def test_product_law_recount(self, corpus):
        # lift count equals the product of per-step fiber counts (finite
        # multiplicities; omega-capped balls are excluded as non-exhaustive)
        rng = random.Random(11)
        for name in ("two_rose", "bs24_to_bs12", "ascending_synthetic"):
            ptp = corpus[name].ptp
            pair = MappedBallPair(ptp, sorted(ptp.upstairs.vertex_types)[0])
            pair.down.expand_uniformly(2)
            pair.expand_to_radius(1)
            for _ in range(6):
                spec = random_endspec(rng, ptp,
                                      base_type=pair.down.vertex_type_id(0))
                if spec is None:
                    continue
                ray = realize_ray(pair.down, spec, 5)
                expected = 1
                for e in ray.edges:
                    expected *= expected_per_step_fiber(
                        ptp, pair.down.edge_class_id(e))
                total = sum(
                    len(lift_ray(pair, ray, ini, 5).lifts)
                    for ini in lift_initials(pair, ray.edges[0])
                )
                assert total == expected, (name, spec.render())

    def test_branch_counts_are_monotone(self, bs24):
        pair = MappedBallPair(bs24, "v")
        pair.down.expand_uniformly(1)
        spec = parse_endspec(";u-", "w", bs24)
        ray = realize_ray(pair.down, spec, 5)
        pair.expand_to_radius(1)
        for ini in lift_initials(pair, ray.edges[0]):
            tree = lift_ray(pair, ray, ini, 5)
            assert tree.branch_counts == sorted(tree.branch_counts)


class TestLiftErrors:
    def test_wrong_initial(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        spec = parse_endspec(";x+", "w", two_rose)
        ray = realize_ray(pair.down, spec, 3)
        wrong = [e for e in pair.up.out_edges(0)
                 if pair.emap[e] != ray.edges[0]][0]
        with pytest.raises(SigmatreeError):
            lift_ray(pair, ray, wrong, 2)

    def test_depth_beyond_ray(self, two_rose):
        pair = expand_pair(two_rose, "v", 3)
        spec = parse_endspec(";x+", "w", two_rose)
        ray = realize_ray(pair.down, spec, 3)
        with pytest.raises(SigmatreeError):
            lift_ray(pair, ray, lift_initials(pair, ray.edges[0])[0], 9)

    def test_non_surjective_lift_fails(self, deficient_doc):
        # the uncovered instance of b+ has no preimage: lifting stops there
        ptp = parse_and_validate(deficient_doc)
        pair = MappedBallPair(ptp, "v")
        pair.down.expand_uniformly(3)
        pair.expand_to_radius(1)
        down = pair.down
        # walk into the second (uncovered) b+ instance at the base's child
        spec = parse_endspec(";b+,b+#1", "w", ptp)
        ray = realize_ray(down, spec, 4)
        initials = lift_initials(pair, ray.edges[0])
        assert initials, "covered instance must have a preimage"
        with pytest.raises(SigmatreeError):
            for ini in initials:
                lift_ray(pair, ray, ini, 4)

    def test_local_surjectivity_means_every_step_extends(self, corpus):
        rng = random.Random(23)
        for name in ("two_rose", "bs24_to_bs12", "ascending_synthetic"):
            ptp = corpus[name].ptp
            pair = MappedBallPair(ptp, sorted(ptp.upstairs.vertex_types)[0])
            pair.down.expand_uniformly(2)
            pair.expand_to_radius(1)
            for _ in range(4):
                spec = random_endspec(rng, ptp,
                                      base_type=pair.down.vertex_type_id(0))
                if spec is None:
                    continue
                ray = realize_ray(pair.down, spec, 4)
                for ini in lift_initials(pair, ray.edges[0]):
                    lift_ray(pair, ray, ini, 4)  # must not raise


class TestFiberSingleton:
    def test_ascending_candidate(self, ascending):
        spec = parse_endspec(";u+", "w", ascending)
        assert q_fiber_singleton(ascending, spec, cross_check_depth=6)

    def test_two_rose_not_singleton(self, two_rose):
        spec = parse_endspec(";x+", "w", two_rose)
        assert not q_fiber_singleton(two_rose, spec, cross_check_depth=5)

    def test_line_identity_both_ends(self, line_identity):
        for text in (";r", ";l"):
            spec = parse_endspec(text, "w", line_identity)
            assert q_fiber_singleton(line_identity, spec, cross_check_depth=5)

    def test_partial_marks_raise(self, deficient_doc):
        ptp = parse_and_validate(deficient_doc)
        with pytest.raises((InconclusiveMarking, SigmatreeError)):
            q_fiber_singleton(ptp, parse_endspec(";b-", "w", ptp))

    def test_singleton_duality_sampled(self, corpus):
        # singleton iff not faced, on sampled periodic ends per entry
        from sigmatree.classify import end_is_faced

        rng = random.Random(41)
        for name in ("two_rose", "bs24_to_bs12", "ascending_synthetic",
                     "free_product"):
            ptp = corpus[name].ptp
            seen = 0
            while seen < 20:
                spec = random_endspec(rng, ptp)
                if spec is None:
                    continue
                seen += 1
                assert q_fiber_singleton(ptp, spec, cross_check_depth=4) == \
                    (not end_is_faced(ptp, spec)), (name, spec.render())


class TestRayToward:
    def test_merges_with_tau(self, two_rose):
        pair = expand_pair(two_rose, "v", 5)
        spec = parse_endspec(";x+", "w", two_rose)
        tau = realize_ray(pair.down, spec, 5)
        down = pair.down
        for v in down.vertices_at_depth(3)[:6]:
            ray = ray_toward_end(down, tau, v, 5)
            ray.check()
            assert ray.vertices[0] == v
            assert ray.vertices[-1] == tau.vertices[-1]
