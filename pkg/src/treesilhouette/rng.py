"""Seeded, splittable random streams.

A stream is identified by a 64-bit seed and a path of integers; the path is
fed to :class:`numpy.random.SeedSequence` as its spawn key, so streams with
different paths are statistically independent and a given (seed, path)
always reproduces the same draws.
"""

from __future__ import annotations

import os

import numpy as np


class RngStream:
    __slots__ = ("seed", "path", "gen")

    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.PCG64(seq))

    def split(self, *index: int) -> "RngStream":
        """Child stream at ``path + index``; does not consume from this stream."""
        return RngStream(self.seed, self.path + tuple(index))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"

    # thin conveniences over the generator

    def random(self, size=None):
        return self.gen.random(size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size=size)

    def open_uniform(self, size=None):
        """Uniform draws on the open interval (0, 1); endpoints are rejected."""
        if size is None:
            while True:
                x = self.gen.random()
                if x > 0.0:
                    return x
        x = self.gen.random(size)
        bad = x == 0.0
        while bad.any():
            x[bad] = self.gen.random(int(bad.sum()))
            bad = x == 0.0
        return x

    def getrandbits(self, k: int) -> int:
        """A uniform integer in ``[0, 2**k)`` of arbitrary width."""
        if k <= 0:
            return 0
        words = (k + 63) // 64
        raw = self.gen.integers(0, 2**64, size=words, dtype=np.uint64, endpoint=False)
        value = 0
        for w in raw:
            value = (value << 64) | int(w)
        return value >> (64 * words - k)


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"expected RngStream or integer seed, got {type(rng).__name__}")


def worker_count() -> int:
    """Worker threads for replicate-level parallelism (``SILHOUETTE_THREADS``)."""
    env = os.environ.get("SILHOUETTE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
               else (os.cpu_count() or 1))
