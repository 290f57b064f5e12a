"""Empirical distributions and the distances used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats as sps

from .errors import EmptySample, LengthMismatch

ANALYTIC = {"normal": sps.norm.cdf}


@dataclass
class EmpiricalDistribution:
    samples: np.ndarray
    _sorted: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).ravel()
        if not len(self.samples):
            raise EmptySample("empirical distribution needs at least one sample")

    def __len__(self):
        return len(self.samples)

    @property
    def sorted(self) -> np.ndarray:
        if self._sorted is None:
            self._sorted = np.sort(self.samples)
        return self._sorted

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def variance(self) -> float:
        return float(self.samples.var(ddof=1)) if len(self) > 1 else 0.0

    @property
    def sd(self) -> float:
        return self.variance**0.5

    def quantile(self, q):
        return np.quantile(self.sorted, q)

    def summary(self) -> dict:
        q = self.quantile([0.05, 0.25, 0.5, 0.75, 0.95])
        return {"mean": self.mean, "variance": self.variance, "q05": float(q[0]),
                "q25": float(q[1]), "median": float(q[2]), "q75": float(q[3]), "q95": float(q[4])}


def _as_dist(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(x)


def wasserstein1(a, b) -> float:
    """W1 between two empirical measures; sorted coupling for equal sizes."""
    a, b = _as_dist(a), _as_dist(b)
    if len(a) == len(b):
        return float(np.mean(np.abs(a.sorted - b.sorted)))
    return float(sps.wasserstein_distance(a.samples, b.samples))


def ks_statistic(a, b) -> float:
    a = _as_dist(a)
    if isinstance(b, str) or callable(b):
        cdf = ANALYTIC[b] if isinstance(b, str) else b
        return float(sps.kstest(a.samples, cdf).statistic)
    return float(sps.ks_2samp(a.samples, _as_dist(b).samples).statistic)


@dataclass(frozen=True)
class DistStats:
    ks: float
    w1: Optional[float]
    corr: Optional[float] = None


def dist_stats(a, b: Union[EmpiricalDistribution, np.ndarray, str, Callable],
               paired: bool = False) -> DistStats:
    """KS and W1 between ``a`` and a second sample or a named analytic CDF.

    ``w1`` is None for analytic references.  With ``paired`` the Pearson
    correlation of the two (equal-length) samples is included.
    """
    a = _as_dist(a)
    if isinstance(b, str) or callable(b):
        return DistStats(ks_statistic(a, b), None)
    b = _as_dist(b)
    corr = None
    if paired:
        if len(a) != len(b):
            raise LengthMismatch(f"paired samples differ in length: {len(a)} vs {len(b)}")
        corr = float(np.corrcoef(a.samples, b.samples)[0, 1])
    return DistStats(ks_statistic(a, b), wasserstein1(a, b), corr)
