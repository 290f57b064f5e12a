import pytest
from hypothesis import given, settings, strategies as st

from treesilhouette.errors import EmptyTree, FormatError, PrefixViolation
from treesilhouette.growth import random_bst, random_dst
from treesilhouette.rng import RngStream
from treesilhouette.tree import (
    EMPTY,
    BinaryTree,
    bits_of,
    concat,
    emit_tree,
    external_frontier,
    height_fill,
    level_profile,
    node,
    parse_tree,
    subtree_at,
    tree_codec,
    validate_tree,
)


def T(*paths):
    return validate_tree(paths)


@st.composite
def trees(draw, max_size=40):
    """Random prefix-closed sets built by repeatedly adding a frontier node."""
    tree = EMPTY
    for _ in range(draw(st.integers(0, max_size))):
        frontier = sorted(external_frontier(tree))
        tree = tree.add(draw(st.sampled_from(frontier)))
    return tree


class TestNodes:
    @pytest.mark.parametrize("path, code", [("", 1), ("-", 1), ("0", 2), ("1", 3), ("01", 5), ((1, 1, 0), 14)])
    def test_codes(self, path, code):
        assert node(path) == code

    def test_bits_roundtrip(self):
        for code in range(1, 200):
            assert node(bits_of(code)) == code

    def test_concat(self):
        assert concat(node("01"), node("10")) == node("0110")
        assert concat(node("1"), node("")) == node("1")

    @pytest.mark.parametrize("bad", ["2", "0a", 0, -3])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            node(bad)


class TestValidate:
    def test_empty(self):
        assert validate_tree([]).size == 0

    def test_valid(self):
        assert T("", "0", "1", "01").size == 4

    def test_root_missing(self):
        with pytest.raises(PrefixViolation) as info:
            T("0")
        assert info.value.node == "0"

    def test_reports_shortest_then_smallest(self):
        with pytest.raises(PrefixViolation) as info:
            T("", "110", "01", "10")
        assert info.value.node == "01"

    def test_add_rejects_non_frontier(self):
        with pytest.raises(PrefixViolation):
            T("").add(node("00"))


class TestSubtree:
    def test_left_leaf(self):
        assert subtree_at(T("", "0", "1"), "0") == T("")

    def test_absent(self):
        assert subtree_at(T(""), "1") == EMPTY

    def test_strip_prefix(self):
        assert subtree_at(T("", "1", "10"), "1") == T("", "0")

    @given(trees(), st.text("01", max_size=3), st.text("01", max_size=3))
    def test_composition(self, tree, u, w):
        assert subtree_at(subtree_at(tree, u or "-"), w or "-") == subtree_at(tree, (u + w) or "-")

    @given(trees())
    def test_root_is_identity(self, tree):
        assert subtree_at(tree, "") == tree


class TestFrontierAndProfile:
    @pytest.mark.parametrize("tree, frontier", [
        ((), {""}),
        (("",), {"0", "1"}),
        (("", "0"), {"1", "00", "01"}),
    ])
    def test_frontier(self, tree, frontier):
        assert external_frontier(T(*tree)) == {node(p) for p in frontier}

    @pytest.mark.parametrize("tree, counts", [
        (("",), (0, 2)),
        (("", "0"), (0, 1, 2)),
        ((), (1,)),
    ])
    def test_profile(self, tree, counts):
        assert level_profile(T(*tree)) == counts

    @pytest.mark.parametrize("tree, hf", [(("",), (1, 1)), (("", "0"), (2, 1)), (("", "0", "1"), (2, 2))])
    def test_height_fill(self, tree, hf):
        assert height_fill(T(*tree)) == hf

    def test_height_fill_empty(self):
        with pytest.raises(EmptyTree):
            height_fill(EMPTY)

    @given(trees(max_size=80))
    def test_kraft_and_counts(self, tree):
        prof = level_profile(tree)
        assert prof.kraft_sum() == 1
        assert prof.total == (tree.size + 1 if tree.size else 1)

    @pytest.mark.parametrize("build", [random_bst, random_dst])
    @pytest.mark.parametrize("n", [1, 17, 300, 2000])
    def test_kraft_grown(self, build, n):
        tree = build(n, RngStream(n)).final
        assert tree.size == n
        assert level_profile(tree).kraft_sum() == 1


class TestCodec:
    def test_emit(self):
        assert emit_tree(T("", "0")) == "treetext v1\n-\n0\n"

    def test_emit_empty(self):
        assert emit_tree(EMPTY) == "treetext v1\n"

    def test_parse_root_missing(self):
        with pytest.raises(PrefixViolation):
            parse_tree("treetext v1\n0\n")

    @pytest.mark.parametrize("text, line", [
        ("treetext v2\n-\n", 1),
        ("treetext v1\n-\n0", 3),
        ("treetext v1\n-\n1\n0\n", 4),
        ("treetext v1\n-\n-\n", 3),
        ("treetext v1\n-\n0 \n", 3),
        ("treetext v1\n-\n\n", 3),
    ])
    def test_format_errors(self, text, line):
        with pytest.raises(FormatError) as info:
            parse_tree(text)
        assert info.value.line == line

    @given(trees())
    def test_roundtrip(self, tree):
        assert parse_tree(emit_tree(tree)) == tree

    def test_dispatch(self):
        tree = T("", "1")
        assert tree_codec("parse", tree_codec("emit", tree)) == tree
        with pytest.raises(ValueError):
            tree_codec("dump", tree)

    @settings(max_examples=30)
    @given(trees())
    def test_emit_is_canonical(self, tree):
        lines = emit_tree(tree).splitlines()[1:]
        keys = [(len(p.replace("-", "")), p) for p in lines]
        assert keys == sorted(keys)


class TestBinaryTree:
    def test_membership_by_path(self):
        tree = T("", "1", "10")
        assert "10" in tree and (1, 0) in tree and "-" in tree
        assert "0" not in tree and "x" not in tree

    def test_children(self):
        tree = T("", "1", "10", "11", "110")
        assert tree.left == EMPTY
        assert tree.right == T("", "0", "1", "10")
        assert tree.paths() == ["", "1", "10", "11", "110"]

    def test_hashable(self):
        assert len({T("", "0"), T("0", "")}) == 1

    def test_from_paths(self):
        assert BinaryTree.from_paths(["", "0"]) == T("", "0")
