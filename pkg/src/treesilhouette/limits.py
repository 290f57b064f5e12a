"""Samplers and evaluators for the limit objects of the BST silhouette.

Notation follows the code, not any single source: ``zeta`` is the additive
noise ``1 + (log xi + log(1 - xi)) / 2`` of the fixed-point equation
``eta = (eta' + eta'') / 2 + zeta``, ``eta_inf`` its solution, ``rho``/``V``
the log-proportions and proportions of the recursive splitting of [0, 1],
and ``phi_tent`` the tent function ``min(t, 1 - t) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import zeta as riemann_zeta

from .errors import DomainError, EmptyPool, LevelOverflow
from .rng import RngStream
from .silhouette import PLFunction

ZETA_VARIANCE = 1.0 - math.pi**2 / 12.0
ETA_INF_VARIANCE = 2.0 * ZETA_VARIANCE
ZETA_MAX = 1.0 - math.log(2.0)
MAX_LEVELS = 30
# per level, up to this many zeta summands are drawn exactly; deeper levels
# are replaced by a Gaussian with the same mean and variance
EXACT_LEVEL_BUDGET = 1024


# -- harmonic numbers --------------------------------------------------------


@lru_cache(maxsize=64)
def harmonic(n: int) -> float:
    """``H_n = 1 + 1/2 + ... + 1/n`` by direct (correctly rounded) summation."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return math.fsum(1.0 / k for k in range(1, n + 1))


def harmonic_table(n: int) -> np.ndarray:
    """``H_0, ..., H_n`` as an array."""
    out = np.empty(n + 1)
    out[0] = 0.0
    if n:
        out[1:] = np.cumsum(1.0 / np.arange(1, n + 1))
    return out


# -- zeta and the series for eta_inf ----------------------------------------


def zeta_from_uniform(xi):
    return 1.0 + 0.5 * (np.log(xi) + np.log1p(-np.asarray(xi)))


def sample_zeta(rng: RngStream, size=None):
    xi = rng.open_uniform(size)
    if size is None:
        return float(zeta_from_uniform(xi))
    return zeta_from_uniform(xi)


def _sum_of_zetas(rng: RngStream, count: int, size: int) -> np.ndarray:
    """``size`` draws of the sum of ``count`` iid zetas, drawn exactly."""
    out = np.zeros(size)
    block = max(1, (1 << 20) // count)
    for lo in range(0, size, block):
        hi = min(size, lo + block)
        out[lo:hi] = zeta_from_uniform(rng.open_uniform((hi - lo, count))).sum(axis=1)
    return out


def sample_eta_sum(rng: RngStream, m: int, size: int, levels: int = 20,
                   budget: int = EXACT_LEVEL_BUDGET) -> np.ndarray:
    """Draws of ``eta_1 + ... + eta_m`` for iid series-truncated ``eta_inf`` copies.

    The series level ``n`` contributes ``2^-n`` times a sum of ``m 2^n`` iid
    zetas.  Levels with at most ``budget`` summands are drawn exactly; the
    remaining levels are lumped into one Gaussian with matching mean (zero)
    and variance.
    """
    if levels < 0:
        raise DomainError("levels must be nonnegative")
    if levels > MAX_LEVELS:
        raise LevelOverflow(f"levels={levels} exceeds {MAX_LEVELS}")
    out = np.zeros(size)
    tail_var = 0.0
    for n in range(levels + 1):
        count = m << n
        if count <= budget:
            out += _sum_of_zetas(rng, count, size) / (1 << n)
        else:
            tail_var += count * ZETA_VARIANCE / 4.0**n
    if tail_var:
        out += rng.gen.normal(0.0, math.sqrt(tail_var), size)
    return out


def sample_eta_inf(rng: RngStream, levels: int = 20, size=None,
                   budget: int = EXACT_LEVEL_BUDGET):
    """Draw(s) of ``sum_{n<=levels} 2^-n sum_{k<=2^n} zeta_{n,k}``.

    Series levels with more than ``budget`` terms are Gaussian-approximated;
    pass ``budget=2**levels`` for a fully exact (and slow) draw.
    """
    draws = sample_eta_sum(rng, 1, 1 if size is None else size, levels, budget)
    return float(draws[0]) if size is None else draws


def truncation_sd(levels: int) -> float:
    """Standard deviation of the series tail left out at the given truncation."""
    return math.sqrt(ZETA_VARIANCE * 2.0**-levels)


# -- moment generating functions --------------------------------------------


@lru_cache(maxsize=1)
def _log_mgf_coefficients(terms: int = 60) -> np.ndarray:
    k = np.arange(2, terms + 2, dtype=float)
    return (-1.0) ** k / k * (1.0 + riemann_zeta(k) * (2.0 ** (1.0 - k) - 1.0))


def log_mgf_zeta(t: float) -> float:
    if t <= -2.0:
        raise DomainError(f"the zeta mgf diverges for t={t} <= -2")
    if abs(t) <= 0.25:
        # power series avoids cancellation between the log-gamma terms
        coeffs = _log_mgf_coefficients()
        powers = t ** np.arange(2, len(coeffs) + 2, dtype=float)
        return float(np.dot(coeffs, powers))
    return 2.0 * math.lgamma(1.0 + t / 2.0) + t - math.lgamma(2.0 + t)


def mgf_zeta(t: float) -> float:
    """``E exp(t zeta) = Gamma(1 + t/2)^2 e^t / Gamma(2 + t)`` for ``t > -2``."""
    return math.exp(log_mgf_zeta(t))


def mgf_eta_inf(t: float, levels: int = 40) -> float:
    """``prod_{n=0}^{levels} mgf_zeta(2^-n t)^(2^n)``."""
    if t <= -2.0:
        raise DomainError(f"the eta_inf mgf diverges for t={t} <= -2")
    if levels < 1:
        raise DomainError("levels must be at least 1")
    return math.exp(math.fsum(2.0**n * log_mgf_zeta(t / 2.0**n) for n in range(levels + 1)))


# -- rho / V and the finite-dimensional limit --------------------------------


def node_order(k: int) -> np.ndarray:
    """Bits ``u_m(k, j)`` of the depth-k nodes in left-to-right order, shape (2^k, k)."""
    j = np.arange(1 << k)
    return (j[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1


def rho_from_xi(xi: np.ndarray, k: int) -> np.ndarray:
    """Log-proportions of the depth-k cells given split variables in heap order.

    ``xi[..., i]`` belongs to the internal node with heap index ``i + 1``
    (root first); a right step contributes ``log xi``, a left step
    ``log(1 - xi)``.
    """
    batch = xi.shape[:-1]
    rho = np.zeros(batch + (1,))
    for level in range(k):
        x = xi[..., (1 << level) - 1:(1 << (level + 1)) - 1]
        left = rho + np.log1p(-x)
        right = rho + np.log(x)
        rho = np.stack((left, right), axis=-1).reshape(batch + (2 << level,))
    return rho


def sample_rho_V(k: int, rng: RngStream, size=None):
    """(rho, V) for depth ``k``; ``V = exp(rho)`` are the cell proportions."""
    if not 1 <= k <= 20:
        raise DomainError(f"k={k} outside 1..20")
    shape = ((1 << k) - 1,) if size is None else (size, (1 << k) - 1)
    xi = rng.open_uniform(shape)
    rho = rho_from_xi(xi, k)
    return rho, np.exp(rho)


def sample_rho_path(k: int, rng: RngStream, size=None, j: int = 1):
    """Marginal draw(s) of ``rho_{k,j}`` using only the ``k`` splits above cell ``j``."""
    if k < 1:
        raise DomainError("k must be positive")
    if not 1 <= j <= 1 << k:
        raise DomainError(f"j={j} outside 1..2^{k}")
    bits = [((j - 1) >> (k - 1 - m)) & 1 for m in range(k)]
    n = 1 if size is None else size
    xi = rng.open_uniform((n, k))
    terms = np.where(np.array(bits, dtype=bool)[None, :], np.log(xi), np.log1p(-xi))
    out = terms.sum(axis=1)
    return float(out[0]) if size is None else out


@dataclass(frozen=True)
class LimitFinDim:
    """One (or, with a leading batch axis, many) draws of the depth-k limit.

    ``delta`` are the limiting increments of the tied-down integrated
    silhouette over the cells ``[(j-1) 2^-k, j 2^-k]``.
    """

    k: int
    delta: np.ndarray
    eta_centered_limit: np.ndarray
    rho: np.ndarray
    eta_components: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return np.exp(self.rho)


def assemble_findim(k: int, rho: np.ndarray, eta_components: np.ndarray) -> LimitFinDim:
    terms = k + rho + eta_components
    eta_centered = terms.mean(axis=-1)
    delta = (terms - eta_centered[..., None]) / (1 << k)
    return LimitFinDim(k, delta, eta_centered, rho, eta_components)


def sample_findim_limit(k: int, rng: RngStream, levels: int = 20, size=None) -> LimitFinDim:
    """Draw of the depth-k increments and centered path length of the limit.

    The centered path length is ``2^-k sum_j (k + rho_j + eta_j)``, which makes
    the increments sum to zero and reduces at ``k = 1`` to the fixed-point
    equation for ``eta_inf``.
    """
    if not 1 <= k <= 10:
        raise DomainError(f"k={k} outside 1..10")
    n = 1 if size is None else size
    rho, _ = sample_rho_V(k, rng.split(0), n)
    eta = sample_eta_sum(rng.split(1), 1, n << k, levels).reshape(n, 1 << k)
    out = assemble_findim(k, rho, eta)
    if size is None:
        return LimitFinDim(k, out.delta[0], out.eta_centered_limit[0], out.rho[0],
                           out.eta_components[0])
    return out


def sample_first_increment(k: int, rng: RngStream, size: int, levels: int = 20) -> np.ndarray:
    """Marginal draws of ``delta_1`` of the depth-k limit without the other 2^k - 1 deltas.

    Uses ``delta_1 = 2^-k ((1 - 2^-k)(k + rho_1 + eta_1) - 2^-k sum_{j>1}(k + rho_j + eta_j))``
    with the sum of the other ``eta_j`` drawn as one aggregate.
    """
    if not 1 <= k <= 20:
        raise DomainError(f"k={k} outside 1..20")
    rho, _ = sample_rho_V(k, rng.split(0), size)
    eta1 = sample_eta_sum(rng.split(1), 1, size, levels)
    others = sample_eta_sum(rng.split(2), (1 << k) - 1, size, levels)
    w = 2.0**-k
    first = k + rho[:, 0] + eta1
    rest = k * ((1 << k) - 1) + rho[:, 1:].sum(axis=1) + others
    return w * ((1.0 - w) * first - w * rest)


# -- the operator Psi on (function, real) pairs ------------------------------


def phi_tent(t):
    t = np.asarray(t, dtype=float)
    return 0.5 * np.minimum(t, 1.0 - t)


@dataclass(frozen=True)
class PsiSample:
    f: PLFunction
    a: float


def _apply_AB(F: np.ndarray, m: int, r: int):
    """Grid values at resolution ``r`` of ``A f`` and ``B f`` from values at resolution ``m``.

    ``A f(t) = f(min(2t, 1)) / 2`` and ``B f(t) = f(max(2t - 1, 0)) / 2``;
    both only need ``f`` at multiples of ``2^-(r-1)``, which are grid points
    whenever ``r <= m + 1``.
    """
    size = 1 << r
    j = np.arange(size + 1)
    step = 1 << (m - (r - 1))
    ia = np.minimum(j, size // 2) * step
    ib = np.maximum(j - size // 2, 0) * step
    return 0.5 * F[..., ia], 0.5 * F[..., ib]


def psi_apply(pool, rng: RngStream) -> PsiSample:
    """One draw from Psi applied to the empirical measure of ``pool``."""
    pool = list(pool)
    if not pool:
        raise EmptyPool("psi_apply needs a nonempty pool")
    m = pool[0].f.resolution
    if any(p.f.resolution != m for p in pool):
        raise ValueError("pool samples must share one resolution")
    i, j = rng.integers(len(pool), size=2)
    xi = rng.open_uniform()
    Y1, Y2 = pool[i], pool[j]
    r = m + 1
    FA, _ = _apply_AB(Y1.f.to_array(), m, r)
    _, FB = _apply_AB(Y2.f.to_array(), m, r)
    tent = phi_tent(np.linspace(0.0, 1.0, (1 << r) + 1))
    f = FA + FB + (Y1.a - Y2.a) * tent + (math.log(xi) - math.log1p(-xi)) * tent
    a = 1.0 + 0.5 * (Y1.a + Y2.a) + 0.5 * (math.log(xi) + math.log1p(-xi))
    f[0] = f[-1] = 0.0
    return PsiSample(PLFunction(r, f.tolist()), float(a))


@dataclass
class PsiPool:
    """Particle approximation of a measure on (C00[0,1] x R): grids F and reals a."""

    F: np.ndarray
    a: np.ndarray
    resolution: int

    @classmethod
    def point_mass(cls, size: int) -> "PsiPool":
        return cls(np.zeros((size, 2)), np.zeros(size), 0)

    def __len__(self):
        return len(self.a)

    def samples(self) -> list:
        return [PsiSample(PLFunction(self.resolution, row.tolist()), float(x))
                for row, x in zip(self.F, self.a)]

    def sup_norms(self) -> np.ndarray:
        return np.abs(self.F).max(axis=1)


@dataclass(frozen=True)
class PsiNoise:
    first: np.ndarray
    second: np.ndarray
    xi: np.ndarray


def draw_psi_noise(rng: RngStream, pool_size: int, out_size: int | None = None) -> PsiNoise:
    n = pool_size if out_size is None else out_size
    return PsiNoise(rng.integers(pool_size, size=n), rng.integers(pool_size, size=n),
                    rng.open_uniform(n))


def psi_step(pool: PsiPool, noise: PsiNoise, max_resolution: int = 8,
             center: bool = True) -> PsiPool:
    """Apply Psi to every particle of a pool with the given randomness.

    Output resolution is ``min(resolution + 1, max_resolution)``; the grid
    values stay exact at any resolution.  With ``center`` the real coordinate
    is shifted to mean zero, keeping the pool inside the zero-mean class.
    """
    m = pool.resolution
    r = min(m + 1, max_resolution)
    FA, _ = _apply_AB(pool.F[noise.first], m, r)
    _, FB = _apply_AB(pool.F[noise.second], m, r)
    tent = phi_tent(np.linspace(0.0, 1.0, (1 << r) + 1))
    a1, a2 = pool.a[noise.first], pool.a[noise.second]
    lx, l1x = np.log(noise.xi), np.log1p(-noise.xi)
    F = FA + FB + ((a1 - a2) + (lx - l1x))[:, None] * tent[None, :]
    F[:, 0] = 0.0
    F[:, -1] = 0.0
    a = 1.0 + 0.5 * (a1 + a2) + 0.5 * (lx + l1x)
    if center:
        a = a - a.mean()
    return PsiPool(F, a, r)


# -- Quicksort contrast ------------------------------------------------------


def quicksort_toll(x):
    """``C(x) = 1 + 2 (x log x + (1 - x) log(1 - x))``, with ``C(0) = C(1) = 1``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where((x > 0) & (x < 1), x * np.log(np.where(x > 0, x, 1.0))
                       + (1 - x) * np.log(np.where(x < 1, 1 - x, 1.0)), 0.0)
    out = 1.0 + 2.0 * ent
    return float(out) if out.ndim == 0 else out


def sample_quicksort_limit(rng: RngStream, iterations: int, size=None):
    """Iterates of ``x -> xi x' + (1 - xi) x'' + C(xi)`` started at 0.

    A single draw is exact (it uses 2^iterations - 1 splits).  With ``size``,
    generations are built by population dynamics: each new draw combines two
    distinct members of the previous generation.
    """
    if iterations < 1:
        raise DomainError("iterations must be at least 1")
    if size is None:
        if iterations > 22:
            raise LevelOverflow("exact single draws are limited to 22 iterations")
        vals = np.zeros(1 << iterations)
        for _ in range(iterations):
            xi = rng.open_uniform(len(vals) // 2)
            vals = xi * vals[0::2] + (1 - xi) * vals[1::2] + quicksort_toll(xi)
        return float(vals[0])
    if size < 2:
        raise DomainError("population dynamics need size >= 2")
    vals = np.zeros(size)
    for _ in range(iterations):
        i = rng.integers(size, size=size)
        j = (i + rng.integers(1, size, size=size)) % size
        xi = rng.open_uniform(size)
        vals = xi * vals[i] + (1 - xi) * vals[j] + quicksort_toll(xi)
    return vals
