"""Batched simulation of BST/DST growth for Monte Carlo work.

The exact tree builders in :mod:`treesilhouette.growth` hold every node as a
Python integer; here the same external-node dynamics run inside numba on flat
arrays and return only what the experiments need (external-depth profiles per
depth-k subtree, depths along fixed paths).  External slot ``j`` that gets
filled keeps the left child and the right child is appended, so slot 0 is
always the leftmost external node.

Replicates are processed in fixed-size chunks, each with its own substream,
so results do not depend on the number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .dyadic import DyadicRational
from .errors import DepthExceeded
from .rng import RngStream, worker_count
from .tree import LevelProfile

DMAX = 160
CHUNK_CELLS = 1 << 21


@njit(nogil=True, cache=True)
def _bst_profile_chunk(J, sizes, k, hist, shallow):
    R, nmax = J.shape
    dmax = hist.shape[2]
    depth = np.zeros(nmax + 1, np.int64)
    prefix = np.zeros(nmax + 1, np.int64)
    overflow = False
    for r in range(R):
        depth[0] = 0
        prefix[0] = 0
        m = 1
        for i in range(sizes[r]):
            j = J[r, i]
            d = depth[j]
            p = prefix[j]
            if d < k:
                prefix[j] = 2 * p
                prefix[m] = 2 * p + 1
            else:
                prefix[m] = p
            depth[j] = d + 1
            depth[m] = d + 1
            m += 1
        for i in range(m):
            d = depth[i]
            if d < k:
                shallow[r] = True
            elif d >= dmax:
                overflow = True
            else:
                hist[r, prefix[i], d] += 1
    return overflow


@njit(nogil=True, cache=True)
def _bst_paths_chunk(J, bits, out, traj, record):
    R, n = J.shape
    P = bits.shape[0]
    depth = np.zeros(n + 1, np.int64)
    slot = np.zeros(P, np.int64)
    for r in range(R):
        depth[0] = 0
        for p in range(P):
            slot[p] = 0
        m = 1
        for i in range(n):
            j = J[r, i]
            d = depth[j]
            depth[j] = d + 1
            depth[m] = d + 1
            for p in range(P):
                if slot[p] == j and bits[p, d] == 1:
                    slot[p] = m
            m += 1
            if record:
                for p in range(P):
                    traj[r, i, p] = depth[slot[p]]
        for p in range(P):
            out[r, p] = depth[slot[p]]


@njit(nogil=True, cache=True)
def _dst_route_chunk(words, hist, traj):
    R, n, W = words.shape
    dmax = hist.shape[1]
    nbits = 64 * W
    left = np.empty(n, np.int64)
    right = np.empty(n, np.int64)
    ndepth = np.empty(n, np.int64)
    overflow = False
    for r in range(R):
        count = 0
        spine_end = -1
        spine = 0
        for i in range(n):
            if count == 0:
                left[0] = -1
                right[0] = -1
                ndepth[0] = 0
                count = 1
                spine_end = 0
                spine = 1
            else:
                v = 0
                d = 0
                while True:
                    if d >= nbits:
                        overflow = True
                        break
                    w = words[r, i, d // 64]
                    bit = (w >> np.uint64(63 - d % 64)) & np.uint64(1)
                    d += 1
                    child = right[v] if bit == 1 else left[v]
                    if child == -1:
                        left[count] = -1
                        right[count] = -1
                        ndepth[count] = d
                        if bit == 1:
                            right[v] = count
                        else:
                            left[v] = count
                            if v == spine_end:
                                spine_end = count
                                spine += 1
                        count += 1
                        break
                    v = child
                if overflow:
                    break
            traj[r, i] = spine
        for v in range(count):
            d = ndepth[v] + 1
            if d >= dmax:
                overflow = True
                continue
            if left[v] == -1:
                hist[r, d] += 1
            if right[v] == -1:
                hist[r, d] += 1
    return overflow


@njit(nogil=True, cache=True)
def _dst_weighted_chunk(U, hist, traj):
    R, n = U.shape
    dmax = hist.shape[1]
    depth = np.zeros(n + 1, np.int64)
    overflow = False
    for r in range(R):
        depth[0] = 0
        m = 1
        for i in range(n):
            x = U[r, i] >> np.uint64(2)
            cum = np.uint64(0)
            j = m - 1
            for s in range(m):
                cum += np.uint64(1) << np.uint64(62 - depth[s])
                if x < cum:
                    j = s
                    break
            d = depth[j]
            if d + 1 > 62:
                overflow = True
            depth[j] = d + 1
            depth[m] = d + 1
            m += 1
            traj[r, i] = depth[0]
        for s in range(m):
            if depth[s] < dmax:
                hist[r, depth[s]] += 1
            else:
                overflow = True
    return overflow


def _chunked(replicates: int, chunk: int, work):
    """Run ``work(index, lo, hi)`` over chunks; results come back in chunk order."""
    bounds = [(i, lo, min(replicates, lo + chunk))
              for i, lo in enumerate(range(0, replicates, chunk))]
    threads = min(worker_count(), len(bounds))
    if threads <= 1:
        return [work(*b) for b in bounds]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda b: work(*b), bounds))


def _chunk_size(n: int) -> int:
    return max(1, CHUNK_CELLS // max(n, 1))


def _uniform_indices(rng: RngStream, rows: int, n: int) -> np.ndarray:
    """Row-wise draws ``J[:, i]`` uniform on ``{0, ..., i}``."""
    return rng.gen.integers(0, np.arange(1, n + 1), size=(rows, n))


# -- results -----------------------------------------------------------------

_DEPTHS = np.arange(DMAX)
_DISCOUNT = _DEPTHS * np.ldexp(1.0, -_DEPTHS)


@dataclass
class ProfileBatch:
    """External-depth histograms per replicate and per depth-k subtree.

    ``hist[r, j, d]`` counts external nodes at depth ``d`` inside subtree
    ``j`` (left-to-right index among depth-k nodes).  Replicates whose fill
    level is below ``k`` are flagged in ``shallow`` and their histograms are
    incomplete.
    """

    hist: np.ndarray
    shallow: np.ndarray
    k: int
    sizes: np.ndarray

    def __len__(self):
        return len(self.hist)

    @property
    def totals(self) -> np.ndarray:
        return self.hist.sum(axis=1)

    def eta(self) -> np.ndarray:
        return self.totals @ _DISCOUNT[: self.hist.shape[2]]

    def subtree_mass(self) -> np.ndarray:
        """Integral of the silhouette over each depth-k cell, shape (R, 2^k)."""
        return self.hist @ _DISCOUNT[: self.hist.shape[2]]

    def increments(self) -> np.ndarray:
        """Increments of the tied-down integrated silhouette over the depth-k cells."""
        return self.subtree_mass() - self.eta()[:, None] / (1 << self.k)

    def height(self) -> np.ndarray:
        nz = self.totals > 0
        return self.hist.shape[2] - 1 - np.argmax(nz[:, ::-1], axis=1)

    def fill(self) -> np.ndarray:
        return np.argmax(self.totals > 0, axis=1)

    def profile(self, r: int) -> LevelProfile:
        row = self.totals[r]
        top = int(np.nonzero(row)[0].max())
        return LevelProfile(row[: top + 1].tolist())

    def exact_increments(self, r: int) -> list:
        """Increments of replicate ``r`` as exact dyadic rationals."""
        rows = self.hist[r]
        top = int(np.nonzero(rows.sum(axis=0))[0].max())
        mass = [sum(int(c) * d << (top - d) for d, c in enumerate(row[: top + 1]) if c)
                for row in rows]
        eta = sum(mass)
        return [DyadicRational((m << self.k) - eta, top + self.k) for m in mass]


def simulate_bst_profiles(n, replicates: int, rng: RngStream, k: int = 0) -> ProfileBatch:
    """External-depth profiles of ``T_n`` under the uniform external-node dynamics.

    ``n`` may be an int or an array of per-replicate sizes.
    """
    sizes = np.broadcast_to(np.asarray(n, dtype=np.int64), (replicates,)).copy()
    nmax = int(sizes.max()) if replicates else 0
    chunk = _chunk_size(nmax)

    def work(index, lo, hi):
        J = _uniform_indices(rng.split(index), hi - lo, nmax)
        hist = np.zeros((hi - lo, 1 << k, DMAX), np.int32)
        shallow = np.zeros(hi - lo, np.bool_)
        if _bst_profile_chunk(J, sizes[lo:hi], k, hist, shallow):
            raise DepthExceeded(f"external depth beyond {DMAX}")
        return hist, shallow

    parts = _chunked(replicates, chunk, work)
    hist = np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, 1 << k, DMAX), np.int32)
    shallow = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, bool)
    return ProfileBatch(hist, shallow, k, sizes)


def path_bits(s, count: int = DMAX) -> np.ndarray:
    """First ``count`` binary digits of ``s`` (1 is 0.111..., binary rationals end in zeros)."""
    x = Fraction(s)
    if x == 1:
        return np.ones(count, np.uint8)
    out = np.empty(count, np.uint8)
    for i in range(count):
        x *= 2
        out[i] = x >= 1
        x -= out[i]
    return out


def simulate_bst_paths(n: int, replicates: int, paths, rng: RngStream,
                       record: bool = False) -> np.ndarray:
    """Silhouette values ``X_s(T_n)`` at the given points, shape (R, len(paths)).

    With ``record`` the whole trajectory ``X_s(T_1..T_n)`` is returned,
    shape (R, n, len(paths)).
    """
    bits = np.stack([path_bits(s, n + 1) for s in paths])
    chunk = _chunk_size(n)

    def work(index, lo, hi):
        J = _uniform_indices(rng.split(index), hi - lo, n)
        out = np.zeros((hi - lo, len(paths)), np.int64)
        traj = np.zeros((hi - lo, n, len(paths)) if record else (1, 1, 1), np.int64)
        _bst_paths_chunk(J, bits, out, traj, record)
        return traj if record else out

    return np.concatenate(_chunked(replicates, chunk, work))


@dataclass
class DstBatch:
    hist: np.ndarray
    leftmost: np.ndarray

    def eta(self) -> np.ndarray:
        return self.hist @ _DISCOUNT[: self.hist.shape[1]]

    def profile(self, r: int) -> LevelProfile:
        row = self.hist[r]
        top = int(np.nonzero(row)[0].max())
        return LevelProfile(row[: top + 1].tolist())


def simulate_dst(n: int, replicates: int, rng: RngStream, method: str = "route") -> DstBatch:
    """DST growth to size ``n``.

    ``method="route"`` runs the digital search tree algorithm on random bit
    streams (128 bits per item, drawn up front); ``method="weighted"`` adds
    an external node chosen with probability ``2**-depth`` at each step.
    ``leftmost[r, i]`` is ``X_0(T_{i+1})``.
    """
    chunk = _chunk_size(2 * n if method == "route" else n)

    def work(index, lo, hi):
        g = rng.split(index).gen
        hist = np.zeros((hi - lo, DMAX), np.int64)
        traj = np.zeros((hi - lo, n), np.int64)
        if method == "route":
            words = g.integers(0, 2**64, size=(hi - lo, n, 2), dtype=np.uint64)
            bad = _dst_route_chunk(words, hist, traj)
        elif method == "weighted":
            U = g.integers(0, 2**64, size=(hi - lo, n), dtype=np.uint64)
            bad = _dst_weighted_chunk(U, hist, traj)
        else:
            raise ValueError(f"unknown method {method!r}")
        if bad:
            raise DepthExceeded("DST routing exhausted its bit budget")
        return hist, traj

    parts = _chunked(replicates, chunk, work)
    return DstBatch(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
