"""Finite rooted binary trees as prefix-closed sets of 0/1 words.

Nodes are stored as integer codes: the word ``u1...uk`` becomes the integer
with binary digits ``1 u1 ... uk``, so the root is ``1``, the children of
``v`` are ``2v`` (left, bit 0) and ``2v + 1`` (right, bit 1), the depth is
``v.bit_length() - 1`` and plain integer order is the canonical
(depth, binary value) order.  Public functions also accept bit strings
(``""`` or ``"-"`` for the root, otherwise e.g. ``"01"``) and tuples of bits.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Union

from .dyadic import DyadicRational
from .errors import EmptyTree, FormatError, PrefixViolation

MAX_DEPTH = 10_000
ROOT = 1

NodeLike = Union[int, str, tuple, list]


def node(path: NodeLike) -> int:
    """Return the integer code of a node given as a code, bit string or bit tuple."""
    if isinstance(path, int) and not isinstance(path, bool):
        if path < 1:
            raise ValueError(f"invalid node code {path}")
        return path
    if isinstance(path, str):
        if path in ("", "-"):
            return ROOT
        if path.strip("01"):
            raise ValueError(f"invalid bit string {path!r}")
        bits = path
    else:
        bits = "".join("1" if int(b) else "0" for b in path)
    if len(bits) > MAX_DEPTH:
        raise ValueError(f"node depth {len(bits)} exceeds MAX_DEPTH={MAX_DEPTH}")
    return int("1" + bits, 2)


def depth(code: int) -> int:
    return code.bit_length() - 1


def bits_of(code: int) -> str:
    """Bit string of a node code; the root is ``""``."""
    return bin(code)[3:]


def bit_tuple(code: int) -> tuple:
    return tuple(int(b) for b in bin(code)[3:])


def offset(code: int) -> int:
    """Binary value of the word, i.e. the node's index among its depth level."""
    return code - (1 << depth(code))


def concat(u: int, w: int) -> int:
    """Code of the concatenated word ``u . w``."""
    d = depth(w)
    return (u << d) | offset(w)


class BinaryTree:
    """Immutable finite prefix-closed set of nodes.

    Iteration yields node codes in canonical breadth-first order.  Use
    :func:`validate_tree` to build one from untrusted input.
    """

    __slots__ = ("_nodes", "_sorted")

    def __init__(self, nodes: Iterable[int] = (), *, check: bool = True):
        nodes = frozenset(nodes)
        if check:
            _check_prefix_closed(nodes)
        self._nodes = nodes
        self._sorted = None

    @property
    def nodes(self) -> tuple:
        if self._sorted is None:
            self._sorted = tuple(sorted(self._nodes))
        return self._sorted

    @property
    def node_set(self) -> frozenset:
        return self._nodes

    @property
    def size(self) -> int:
        return len(self._nodes)

    def __len__(self):
        return len(self._nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __contains__(self, path) -> bool:
        try:
            return node(path) in self._nodes
        except ValueError:
            return False

    def __eq__(self, other):
        if not isinstance(other, BinaryTree):
            return NotImplemented
        return self._nodes == other._nodes

    def __hash__(self):
        return hash(self._nodes)

    def __repr__(self):
        shown = ", ".join(bits_of(v) or "-" for v in self.nodes[:8])
        more = ", ..." if self.size > 8 else ""
        return f"BinaryTree({{{shown}{more}}})"

    def add(self, code: int) -> "BinaryTree":
        """Return a new tree with one extra node (which must be external)."""
        if code in self._nodes or (code != ROOT and code >> 1 not in self._nodes):
            raise PrefixViolation(bits_of(code) or "-")
        return BinaryTree(self._nodes | {code}, check=False)

    @property
    def left(self) -> "BinaryTree":
        return subtree_at(self, 2)

    @property
    def right(self) -> "BinaryTree":
        return subtree_at(self, 3)

    def paths(self) -> list:
        return [bits_of(v) for v in self.nodes]

    @classmethod
    def from_paths(cls, paths: Iterable[NodeLike]) -> "BinaryTree":
        return validate_tree(paths)


EMPTY = BinaryTree(check=False)


def _check_prefix_closed(nodes: frozenset) -> None:
    bad = [v for v in nodes if v != ROOT and (v >> 1) not in nodes]
    if bad:
        first = min(bad)
        raise PrefixViolation(bits_of(first))
    deep = [v for v in nodes if depth(v) > MAX_DEPTH]
    if deep:
        raise ValueError(f"node depth exceeds MAX_DEPTH={MAX_DEPTH}")


def validate_tree(candidate: Iterable[NodeLike]) -> BinaryTree:
    """Wrap a set of nodes as a :class:`BinaryTree` if it is prefix-closed.

    Raises :class:`PrefixViolation` naming the shortest, then lexicographically
    smallest, node whose parent is missing.
    """
    return BinaryTree((node(p) for p in candidate), check=True)


def subtree_at(tree: BinaryTree, u: NodeLike) -> BinaryTree:
    """The subtree rooted at ``u``, re-rooted at the empty word."""
    u = node(u)
    if u == ROOT:
        return tree
    if u not in tree.node_set:
        return EMPTY
    du = depth(u)
    out = []
    for v in tree.node_set:
        shift = depth(v) - du
        if shift >= 0 and (v >> shift) == u:
            out.append(v - (u << shift) + (1 << shift))
    return BinaryTree(out, check=False)


def external_frontier(tree: BinaryTree) -> frozenset:
    """External nodes: children of members that are not members; ``{root}`` if empty."""
    nodes = tree.node_set
    if not nodes:
        return frozenset((ROOT,))
    ext = set()
    for v in nodes:
        c = v << 1
        if c not in nodes:
            ext.add(c)
        if c + 1 not in nodes:
            ext.add(c + 1)
    return frozenset(ext)


class LevelProfile:
    """Counts ``U_0, ..., U_K`` of external nodes per depth."""

    __slots__ = ("counts",)

    def __init__(self, counts: Iterable[int]):
        self.counts = tuple(int(c) for c in counts)

    def __eq__(self, other):
        if isinstance(other, LevelProfile):
            return self.counts == other.counts
        return tuple(other) == self.counts

    def __repr__(self):
        return f"LevelProfile({self.counts})"

    def __iter__(self):
        return iter(self.counts)

    def __len__(self):
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def kraft_sum(self) -> DyadicRational:
        top = len(self.counts) - 1
        return DyadicRational(sum(u << (top - k) for k, u in enumerate(self.counts)), top)

    def discounted_path_length(self) -> DyadicRational:
        top = len(self.counts) - 1
        return DyadicRational(sum(k * u << (top - k) for k, u in enumerate(self.counts)), top)

    @property
    def height(self) -> int:
        return len(self.counts) - 1

    @property
    def fill(self) -> int:
        return next(k for k, u in enumerate(self.counts) if u)


def level_profile(tree: BinaryTree) -> LevelProfile:
    by_depth = Counter(depth(u) for u in external_frontier(tree))
    top = max(by_depth)
    return LevelProfile(by_depth.get(k, 0) for k in range(top + 1))


def height_fill(tree: BinaryTree) -> tuple:
    """(height, fill): maximal and minimal depth of an external node."""
    if not tree.size:
        raise EmptyTree("height and fill level need a nonempty tree")
    prof = level_profile(tree)
    return prof.height, prof.fill


# -- treetext v1 -------------------------------------------------------------

HEADER = "treetext v1"


def emit_tree(tree: BinaryTree) -> str:
    lines = [HEADER]
    lines.extend(bits_of(v) or "-" for v in tree.nodes)
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> BinaryTree:
    if not text.endswith("\n"):
        raise FormatError(text.count("\n") + 1, "missing trailing newline")
    lines = text[:-1].split("\n")
    if lines[0] != HEADER:
        raise FormatError(1, f"expected header {HEADER!r}")
    codes = []
    prev = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "-":
            code = ROOT
        elif line and not line.strip("01"):
            if len(line) > MAX_DEPTH:
                raise FormatError(lineno, f"node deeper than MAX_DEPTH={MAX_DEPTH}")
            code = int("1" + line, 2)
        else:
            raise FormatError(lineno, f"not a node: {line!r}")
        if code <= prev:
            raise FormatError(lineno, "nodes must be strictly increasing in (length, value) order")
        prev = code
        codes.append(code)
    return BinaryTree(codes, check=True)


def tree_codec(direction: str, payload):
    """Dispatch to :func:`parse_tree` or :func:`emit_tree`."""
    if direction == "parse":
        return parse_tree(payload)
    if direction == "emit":
        return emit_tree(payload)
    raise ValueError(f"direction must be 'parse' or 'emit', not {direction!r}")
