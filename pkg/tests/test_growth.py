import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from treesilhouette.errors import DepthExceeded, DomainError, DuplicateKey
from treesilhouette.growth import (
    BitStream,
    bst_build,
    check_keys,
    dst_build,
    greedy_min_depth,
    grow_dst,
    grow_dst_external,
    grow_uniform,
    grow_uniform_external,
    opt_eta_gap,
    random_bst,
    random_dst,
    sample_dst_external,
)
from treesilhouette.limits import harmonic
from treesilhouette.rng import RngStream
from treesilhouette.silhouette import eta_of
from treesilhouette.tree import EMPTY, external_frontier, node, validate_tree


def T(*paths):
    return validate_tree(paths)


class TestKeys:
    def test_single(self):
        assert bst_build([0.5]).final == T("")

    def test_hand_trace(self):
        assert bst_build([0.5, 0.2, 0.7, 0.1]).final == T("", "0", "1", "00")

    def test_duplicate(self):
        with pytest.raises(DuplicateKey) as info:
            bst_build([0.5, 0.5])
        assert info.value.index == 2

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
    def test_out_of_range(self, bad):
        with pytest.raises(DomainError):
            check_keys([0.3, bad])

    def test_only_ranks_matter(self):
        keys = [0.61, 0.12, 0.93, 0.44, 0.05, 0.77]
        squashed = [k / 3 + 0.1 for k in keys]
        assert bst_build(keys).final == bst_build(squashed).final


class TestTreeSequence:
    def test_prefixes(self):
        seq = random_bst(30, RngStream(4))
        assert len(seq) == 30
        assert seq[0] == T("")
        assert seq.tree(0) == EMPTY
        for i in range(1, 30):
            assert seq[i].size == i + 1
            assert seq[i - 1].node_set < seq[i].node_set
        assert seq[-1] == seq.final
        assert [t.size for t in seq[2:5]] == [3, 4, 5]


class TestBitStream:
    def test_from_key(self):
        b = BitStream.from_key(Fraction(1, 3))
        assert [b.bit(i) for i in range(1, 7)] == [0, 1, 0, 1, 0, 1]

    def test_binary_rational_terminates_in_zeros(self):
        b = BitStream.from_key(0.75)
        assert [b.bit(i) for i in range(1, 6)] == [1, 1, 0, 0, 0]

    def test_from_bits_pads(self):
        b = BitStream.from_bits([1, 0, 1])
        assert [b.bit(i) for i in range(1, 70)] == [1, 0, 1] + [0] * 66

    def test_from_rng_reproducible(self):
        a = BitStream.from_rng(RngStream(9))
        b = BitStream.from_rng(RngStream(9))
        assert [a.bit(i) for i in range(1, 200)] == [b.bit(i) for i in range(1, 200)]

    def test_key_out_of_range(self):
        with pytest.raises(DomainError):
            BitStream.from_key(1)


class TestDst:
    def test_single(self):
        assert dst_build([BitStream.from_bits([0])]).final == T("")

    def test_hand_trace(self):
        streams = [BitStream.from_bits([b]) for b in (0, 0, 1)]
        assert dst_build(streams).final == T("", "0", "1")

    def test_identical_streams_collide(self):
        streams = [BitStream.from_bits([]) for _ in range(6)]
        with pytest.raises(DepthExceeded):
            dst_build(streams, max_depth=4)

    def test_keys_route_by_expansion(self):
        keys = [0.5, 0.25, 0.75, 0.125]
        tree = dst_build(BitStream.from_key(k) for k in keys).final
        assert tree == T("", "0", "1", "00")

    def test_random_dst_size(self):
        assert random_dst(200, RngStream(2)).final.size == 200


class TestUniformDynamics:
    def test_empty_gets_root(self):
        assert grow_uniform_external(EMPTY, RngStream(0)) == T("")

    def test_root_children_equally_likely(self):
        counts = Counter(grow_uniform_external(T(""), RngStream(5).split(i)) for i in range(4000))
        assert set(counts) == {T("", "0"), T("", "1")}
        # binomial(4000, 1/2): sd = 31.6
        assert abs(counts[T("", "0")] - 2000) < 4 * 31.6

    @pytest.mark.parametrize("build", [grow_uniform, random_bst])
    def test_mean_eta_is_harmonic(self, build):
        n, R = 40, 3000
        eta = np.array([float(eta_of(build(n, RngStream(11).split(i)).final)) for i in range(R)])
        assert abs(eta.mean() - harmonic(n)) < 4 * eta.std(ddof=1) / math.sqrt(R)


class TestDstDynamics:
    def test_empty_gets_root(self):
        assert grow_dst_external(EMPTY, RngStream(0)) == T("")

    def test_weights_two_to_minus_depth(self):
        tree = T("", "0")
        draws = Counter(sample_dst_external(tree, RngStream(3), 40_000))
        expected = {node("1"): 0.5, node("00"): 0.25, node("01"): 0.25}
        assert set(draws) == set(expected)
        for u, p in expected.items():
            sd = math.sqrt(40_000 * p * (1 - p))
            assert abs(draws[u] - 40_000 * p) < 4 * sd

    def test_draws_are_external(self):
        tree = random_dst(30, RngStream(8)).final
        frontier = external_frontier(tree)
        assert sample_dst_external(tree, RngStream(1)) in frontier
        assert set(sample_dst_external(tree, RngStream(1), 10_000)) <= frontier

    def test_grow_dst(self):
        seq = grow_dst(50, RngStream(6))
        assert seq.final.size == 50


class TestOptGap:
    @pytest.mark.parametrize("n, gap", [
        (8, 0.0),
        (1, 0.0),
        (3, 2 ** (math.log2(3) - 1) - 1 - (math.log2(3) - 1)),
    ])
    def test_values(self, n, gap):
        assert opt_eta_gap(n) == pytest.approx(gap, abs=1e-15)

    @pytest.mark.parametrize("n", [3, 5, 6, 7, 100, 12345])
    def test_never_positive(self, n):
        # eta is the entropy of the 2^-depth law on the frontier, at most log2 of its size
        assert opt_eta_gap(n) < 0

    @pytest.mark.parametrize("n", list(range(1, 70)) + [255, 256, 1000])
    def test_greedy_tree_oracle(self, n):
        # the minimal-depth tree with n nodes has n + 1 external nodes
        gap = float(eta_of(greedy_min_depth(n))) - math.log2(n + 1)
        assert gap == pytest.approx(opt_eta_gap(n + 1), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            opt_eta_gap(0)
