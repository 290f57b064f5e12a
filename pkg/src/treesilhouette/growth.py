"""Growing BST and DST sequences, from keys or from the external-node dynamics.

Every builder returns a :class:`TreeSequence`, which stores the insertion
order and materializes ``T_m`` on demand.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections.abc import Sequence
from fractions import Fraction
from itertools import accumulate
from typing import Iterable

import numpy as np

from .dyadic import DyadicRational
from .errors import DepthExceeded, DomainError, DuplicateKey
from .rng import RngStream
from .tree import MAX_DEPTH, ROOT, BinaryTree, depth, external_frontier


class TreeSequence(Sequence):
    """The trees ``T_1, ..., T_n`` of a growth run.

    Index ``i`` (0-based, as usual in Python) holds ``T_{i+1}``.
    """

    def __init__(self, insertions: Iterable[int]):
        self.insertions = tuple(insertions)

    def __len__(self):
        return len(self.insertions)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return BinaryTree(self.insertions[: i + 1], check=False)

    def tree(self, m: int) -> BinaryTree:
        """``T_m``; ``m = 0`` gives the empty tree."""
        return BinaryTree(self.insertions[:m], check=False)

    @property
    def final(self) -> BinaryTree:
        return self.tree(len(self))


# -- keys and bit streams ----------------------------------------------------


def check_keys(keys) -> list:
    seen = set()
    out = []
    for i, key in enumerate(keys, start=1):
        if not 0 < key < 1:
            raise DomainError(f"key {key!r} at position {i} is not in (0, 1)")
        if key in seen:
            raise DuplicateKey(i)
        seen.add(key)
        out.append(key)
    return out


_ASCII_BITS = bytes.maketrans(b"01", b"\x00\x01")


class BitStream:
    """Lazily realized routing bits ``b_1, b_2, ...`` for digital search trees.

    ``source`` yields chunks of bits as bytes objects; they are appended as
    routing asks for them.
    """

    __slots__ = ("_source", "_bits")

    def __init__(self, source):
        self._source = source
        self._bits = bytearray()

    @classmethod
    def from_key(cls, key) -> "BitStream":
        """Binary expansion of a key in [0, 1); binary rationals terminate in zeros."""
        x = Fraction(key) if not isinstance(key, DyadicRational) else key.to_fraction()
        if not 0 <= x < 1:
            raise DomainError(f"key {key!r} is not in [0, 1)")

        def expand():
            nonlocal x
            while True:
                x *= 2
                b = int(x >= 1)
                x -= b
                yield bytes((b,))

        return cls(expand())

    @classmethod
    def from_bits(cls, bits) -> "BitStream":
        """Finite prefix followed by zeros."""
        bits = [int(b) for b in bits]

        def pad():
            yield bytes(bits)
            while True:
                yield bytes(64)

        return cls(pad())

    @classmethod
    def from_rng(cls, rng: RngStream) -> "BitStream":
        raw = rng.gen.bit_generator.random_raw

        def draw():
            while True:
                yield format(int(raw()), "064b").encode().translate(_ASCII_BITS)

        return cls(draw())

    def bit(self, i: int) -> int:
        """The ``i``-th bit, 1-based."""
        bits = self._bits
        while len(bits) < i:
            bits.extend(next(self._source))
        return bits[i - 1]


# -- binary search trees -----------------------------------------------------


def bst_build(keys) -> TreeSequence:
    """Shapes of the binary search trees of the first m keys, m = 1..n."""
    keys = check_keys(keys)
    labels = {}
    order = []
    for key in keys:
        v = ROOT
        while v in labels:
            v = 2 * v + (key > labels[v])
        if depth(v) > MAX_DEPTH:
            raise DepthExceeded(f"insertion depth exceeds MAX_DEPTH={MAX_DEPTH}")
        labels[v] = key
        order.append(v)
    return TreeSequence(order)


def grow_uniform_external(tree: BinaryTree, rng: RngStream) -> BinaryTree:
    """Add one external node chosen uniformly at random."""
    frontier = sorted(external_frontier(tree))
    u = frontier[int(rng.integers(len(frontier)))]
    return tree.add(u)


def grow_uniform(n: int, rng: RngStream) -> TreeSequence:
    """n steps of the uniform external-node dynamics from the empty tree."""
    frontier = [ROOT]
    order = []
    for _ in range(n):
        i = int(rng.integers(len(frontier)))
        v = frontier[i]
        frontier[i] = 2 * v
        frontier.append(2 * v + 1)
        order.append(v)
    return TreeSequence(order)


def random_bst(n: int, rng: RngStream) -> TreeSequence:
    """BST sequence from n fresh uniform keys (the key-driven definition)."""
    keys = rng.open_uniform(n).tolist()
    while len(set(keys)) < n:  # probability-zero event; redraw
        keys = rng.open_uniform(n).tolist()
    return bst_build(keys)


# -- digital search trees ----------------------------------------------------


def dst_build(streams, max_depth: int = MAX_DEPTH) -> TreeSequence:
    """Digital search tree: each item follows its bits to the first free node."""
    occupied = set()
    order = []
    for stream in streams:
        v = ROOT
        d = 0
        while v in occupied:
            d += 1
            if d > max_depth:
                raise DepthExceeded(f"routing deeper than {max_depth}; colliding bit streams?")
            v = 2 * v + stream.bit(d)
        occupied.add(v)
        order.append(v)
    return TreeSequence(order)


def random_dst(n: int, rng: RngStream) -> TreeSequence:
    """DST sequence for n items with iid fair routing bits.

    All items draw their bits lazily from the one stream ``rng``, so a bit is
    only generated when routing needs it.
    """
    return dst_build(BitStream.from_rng(rng) for _ in range(n))


def dst_weights(frontier: list) -> tuple:
    """Integer weights ``2**(H - |u|)`` over a frontier; they sum to ``2**H``."""
    top = max(depth(u) for u in frontier)
    return [1 << (top - depth(u)) for u in frontier], top


def sample_dst_external(tree: BinaryTree, rng: RngStream, size: int | None = None):
    """External node(s) drawn with probability ``2**-depth`` (exact inverse transform)."""
    frontier = sorted(external_frontier(tree))
    weights, top = dst_weights(frontier)
    cum = list(accumulate(weights))
    if size is None:
        return frontier[bisect_right(cum, rng.getrandbits(top))]
    if top <= 62:
        draws = rng.gen.integers(0, 1 << top, size=size, dtype=np.int64)
        idx = np.searchsorted(np.asarray(cum, dtype=np.int64), draws, side="right")
    else:
        idx = np.array([bisect_right(cum, rng.getrandbits(top)) for _ in range(size)])
    return [frontier[i] for i in idx]


def grow_dst_external(tree: BinaryTree, rng: RngStream) -> BinaryTree:
    """Add one external node ``u`` chosen with probability ``2**-|u|``."""
    return tree.add(sample_dst_external(tree, rng))


def grow_dst(n: int, rng: RngStream) -> TreeSequence:
    tree = BinaryTree()
    order = []
    for _ in range(n):
        u = sample_dst_external(tree, rng)
        tree = tree.add(u)
        order.append(u)
    return TreeSequence(order)


def opt_eta_gap(n: int) -> float:
    """``2**x - 1 - x`` at the fractional part ``x`` of ``log2 n``."""
    if n < 1:
        raise DomainError("n must be positive")
    if n & (n - 1) == 0:
        return 0.0
    x = math.log2(n)
    x -= math.floor(x)
    return 2.0**x - 1.0 - x


def greedy_min_depth(n: int) -> BinaryTree:
    """Tree grown by always filling an external node of minimal depth."""
    return BinaryTree(range(1, n + 1), check=False)
