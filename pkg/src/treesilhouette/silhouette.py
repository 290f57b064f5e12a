"""The silhouette of a binary tree and its exact integral functionals.

The silhouette maps ``s`` in [0, 1] to the depth of the external node reached
by following the binary expansion of ``s``.  It is a step function with
dyadic breakpoints, so everything here is computed exactly with
:class:`~treesilhouette.dyadic.DyadicRational`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import ONE, ZERO, DyadicRational
from .errors import DomainError, NotASilhouette, ResolutionTooCoarse
from .tree import (
    ROOT,
    BinaryTree,
    depth,
    external_frontier,
    level_profile,
    offset,
    subtree_at,
)

# 2**22 + 1 grid values is the largest PLFunction materialized from a tree
MAX_GRID_RESOLUTION = 22


@dataclass(frozen=True)
class Piece:
    start: DyadicRational
    end: DyadicRational
    level: int


class StepFunction:
    """Right-continuous step function on [0, 1] in canonical (merged) form.

    The value at ``s = 1`` is the level of the last piece.
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces: Sequence):
        pieces = tuple(p if isinstance(p, Piece) else
                       Piece(DyadicRational.coerce(p[0]), DyadicRational.coerce(p[1]), int(p[2]))
                       for p in pieces)
        if not pieces:
            raise ValueError("a step function needs at least one piece")
        if pieces[0].start != ZERO or pieces[-1].end != ONE:
            raise ValueError("pieces must cover [0, 1]")
        for a, b in zip(pieces, pieces[1:]):
            if a.end != b.start:
                raise ValueError(f"pieces do not abut at {a.end}")
            if a.level == b.level:
                raise ValueError(f"adjacent pieces share level {a.level}; merge them")
        for p in pieces:
            if not p.start < p.end:
                raise ValueError("empty piece")
            if p.level < 0:
                raise ValueError("levels must be nonnegative")
        self.pieces = pieces

    def __eq__(self, other):
        return isinstance(other, StepFunction) and self.pieces == other.pieces

    def __repr__(self):
        inner = ", ".join(f"[{p.start}, {p.end}):{p.level}" for p in self.pieces[:6])
        return f"StepFunction({inner}{', ...' if len(self.pieces) > 6 else ''})"

    def __call__(self, s) -> int:
        s = Fraction(s) if not isinstance(s, DyadicRational) else s.to_fraction()
        if not 0 <= s <= 1:
            raise DomainError(f"s={s} outside [0, 1]")
        lo, hi = 0, len(self.pieces) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.pieces[mid].start.to_fraction() <= s:
                lo = mid
            else:
                hi = mid - 1
        return self.pieces[lo].level

    def integral(self) -> DyadicRational:
        total = ZERO
        for p in self.pieces:
            total = total + (p.end - p.start) * p.level
        return total

    def level_measure(self, level: int) -> DyadicRational:
        """Lebesgue measure of the preimage of ``level``."""
        total = ZERO
        for p in self.pieces:
            if p.level == level:
                total = total + (p.end - p.start)
        return total


def _externals_left_to_right(tree: BinaryTree) -> list:
    ext = external_frontier(tree)
    top = max(depth(u) for u in ext)
    return sorted(ext, key=lambda u: offset(u) << (top - depth(u)))


def silhouette_of(tree: BinaryTree) -> StepFunction:
    pieces = []
    for u in _externals_left_to_right(tree):
        d = depth(u)
        start = DyadicRational(offset(u), d)
        end = DyadicRational(offset(u) + 1, d)
        if pieces and pieces[-1][2] == d:
            pieces[-1][1] = end
        else:
            pieces.append([start, end, d])
    return StepFunction(Piece(*p) for p in pieces)


def _expansion(s):
    """Binary digits of s in [0, 1]; ``1`` is 0.111..., other binary rationals end in zeros."""
    if isinstance(s, DyadicRational):
        x = s.to_fraction()
    else:
        x = Fraction(s)
    if not 0 <= x <= 1:
        raise DomainError(f"s={s} outside [0, 1]")
    if x == 1:
        while True:
            yield 1
    while True:
        x *= 2
        b = int(x >= 1)
        x -= b
        yield b


def eval_at(tree: BinaryTree, s) -> int:
    """Silhouette value at ``s`` by walking down the tree along the expansion of ``s``."""
    bits = _expansion(s)
    nodes = tree.node_set
    v, k = ROOT, 0
    while v in nodes:
        v = 2 * v + next(bits)
        k += 1
    return k


def tree_from_silhouette(f: StepFunction) -> BinaryTree:
    """Inverse of :func:`silhouette_of` on its image."""
    externals = []
    for p in f.pieces:
        k = p.level
        a = p.start.scale_pow2(k)
        b = p.end.scale_pow2(k)
        if a.exponent or b.exponent:
            raise NotASilhouette(
                f"piece [{p.start}, {p.end}) at level {k} is not a union of "
                f"aligned intervals of length 2^-{k}")
        externals.extend(range((1 << k) + a.numerator, (1 << k) + b.numerator))
    # aligned dyadic cells tiling [0, 1) are exactly the leaves of a full binary tree
    nodes = set()
    for u in externals:
        v = u >> 1
        while v and v not in nodes:
            nodes.add(v)
            v >>= 1
    tree = BinaryTree(nodes, check=False)
    if external_frontier(tree) != frozenset(externals):
        raise NotASilhouette("levels are inconsistent with any external frontier")
    return tree


def eta_of(tree: BinaryTree) -> DyadicRational:
    """Discounted external path length, the integral of the silhouette."""
    if not tree.size:
        return ZERO
    return level_profile(tree).discounted_path_length()


# -- integrated silhouette ---------------------------------------------------


class PLFunction:
    """Piecewise-linear function through grid points ``j / 2**resolution``.

    ``values`` holds DyadicRationals for exact functions of a tree or floats
    for real-valued ones (such as samples of the limit process).
    """

    __slots__ = ("resolution", "values")

    def __init__(self, resolution: int, values: Sequence):
        values = tuple(values)
        if len(values) != (1 << resolution) + 1:
            raise ValueError(f"expected {(1 << resolution) + 1} values, got {len(values)}")
        self.resolution = resolution
        self.values = values

    @property
    def is_exact(self) -> bool:
        return isinstance(self.values[0], DyadicRational)

    def to_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def __call__(self, t: float) -> float:
        if not 0 <= t <= 1:
            raise DomainError(f"t={t} outside [0, 1]")
        return float(np.interp(t, np.linspace(0, 1, len(self.values)), self.to_array()))

    def at(self, j: int, k: int):
        """Exact value at the grid point ``j / 2**k`` (requires ``k <= resolution``)."""
        if k > self.resolution:
            raise ResolutionTooCoarse(f"resolution {self.resolution} < {k}")
        return self.values[j << (self.resolution - k)]

    def __eq__(self, other):
        return (isinstance(other, PLFunction) and self.resolution == other.resolution
                and self.values == other.values)

    def __repr__(self):
        return f"PLFunction(resolution={self.resolution})"


@dataclass(frozen=True)
class Functionals:
    Y: PLFunction
    Ynorm: PLFunction
    eta: DyadicRational
    eta_centered: float


def cell_levels(tree: BinaryTree, m: int) -> np.ndarray:
    """Silhouette value on each grid cell ``[j 2^-m, (j+1) 2^-m)``."""
    ext = _externals_left_to_right(tree)
    depths = np.array([depth(u) for u in ext], dtype=np.int64)
    if depths.max() > m:
        raise ResolutionTooCoarse(f"resolution {m} is below the tree height {depths.max()}")
    return np.repeat(depths, 1 << (m - depths))


def functionals(tree: BinaryTree, m: int | None = None) -> Functionals:
    """Exact integrated silhouette ``Y``, its tied-down version and ``eta``.

    ``m`` defaults to the height of the tree, the coarsest lossless grid.
    """
    from .limits import harmonic

    if m is None:
        m = level_profile(tree).height
    if m > MAX_GRID_RESOLUTION:
        raise ValueError(f"grid resolution {m} exceeds MAX_GRID_RESOLUTION={MAX_GRID_RESOLUTION}")
    levels = cell_levels(tree, m)
    cum = np.concatenate(([0], np.cumsum(levels))).tolist()
    total = cum[-1]
    scale = 1 << m
    Y = PLFunction(m, (DyadicRational(c, m) for c in cum))
    Ynorm = PLFunction(m, (DyadicRational(c * scale - j * total, 2 * m)
                           for j, c in enumerate(cum)))
    eta = DyadicRational(total, m)
    return Functionals(Y, Ynorm, eta, float(eta) - harmonic(tree.size))


def increments_dyadic(f: PLFunction, k: int) -> list:
    """``f(j 2^-k) - f((j-1) 2^-k)`` for ``j = 1..2^k``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k > f.resolution:
        raise ResolutionTooCoarse(f"resolution {f.resolution} < {k}")
    stride = 1 << (f.resolution - k)
    v = f.values
    return [v[j * stride] - v[(j - 1) * stride] for j in range(1, (1 << k) + 1)]


def modulus_of_continuity(f: PLFunction, delta: float) -> float:
    """``sup |f(t) - f(s)|`` over ``|s - t| <= delta``.

    For a piecewise-linear ``f`` the supremum is attained at a pair of grid
    points or at a grid point paired with its translate by exactly ``delta``.
    """
    if not 0 <= delta <= 1:
        raise DomainError(f"delta={delta} outside [0, 1]")
    y = f.to_array()
    g = len(y) - 1
    h = 1.0 / g
    best = 0.0
    reach = min(g, int(np.floor(delta / h + 1e-12)))
    for d in range(1, reach + 1):
        best = max(best, float(np.max(np.abs(y[d:] - y[:-d]))))
    if delta > 0:
        grid = np.linspace(0.0, 1.0, g + 1)
        fwd = grid + delta
        ok = fwd <= 1.0
        if ok.any():
            best = max(best, float(np.max(np.abs(np.interp(fwd[ok], grid, y) - y[ok]))))
        back = grid - delta
        ok = back >= 0.0
        if ok.any():
            best = max(best, float(np.max(np.abs(y[ok] - np.interp(back[ok], grid, y)))))
    return best


# -- CSV ---------------------------------------------------------------------


def silhouette_csv(f: StepFunction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start_num", "start_exp", "end_num", "end_exp", "level"])
    for p in f.pieces:
        w.writerow([p.start.numerator, p.start.exponent, p.end.numerator, p.end.exponent, p.level])
    return buf.getvalue()


def plfunction_csv(f: PLFunction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "resolution", "value_num", "value_exp"])
    for j, v in enumerate(f.values):
        v = DyadicRational.coerce(v)
        w.writerow([j, f.resolution, v.numerator, v.exponent])
    return buf.getvalue()


def subtree_eta_identity(tree: BinaryTree, k: int) -> list:
    """Right-hand sides ``2^-k (k + eta(T^{k,j}) - eta(T))`` for ``j = 1..2^k``."""
    eta = eta_of(tree)
    return [(eta_of(subtree_at(tree, (1 << k) + j)) - eta + k).scale_pow2(-k)
            for j in range(1 << k)]
