"""Seeded Monte Carlo checks of the limit theory, each producing a Report.

Every experiment takes an :class:`ExperimentConfig`, derives all of its
randomness from ``RngStream(config.seed)`` by fixed split paths, and returns
metrics plus pass/fail verdicts.  Verdicts are pure functions of the metrics
and the tolerances (see :class:`Check`), and the Report JSON is byte-identical
across re-runs with the same configuration.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy import stats as sps

from .dyadic import ZERO
from .errors import ConfigError
from .growth import greedy_min_depth, opt_eta_gap, random_bst, random_dst, sample_dst_external
from .kernels import simulate_bst_paths, simulate_bst_profiles, simulate_dst
from .limits import (
    ETA_INF_VARIANCE,
    ZETA_VARIANCE,
    draw_psi_noise,
    harmonic,
    mgf_eta_inf,
    mgf_zeta,
    psi_step,
    PsiPool,
    sample_eta_inf,
    sample_findim_limit,
    sample_first_increment,
    sample_rho_path,
    sample_zeta,
    zeta_from_uniform,
)
from .rng import RngStream
from .silhouette import functionals, increments_dyadic, modulus_of_continuity, silhouette_of, tree_from_silhouette
from .stats import EmpiricalDistribution, dist_stats, ks_statistic, wasserstein1
from .tree import emit_tree, external_frontier, depth, level_profile, parse_tree

log = logging.getLogger(__name__)

SMOKE_TREES = 4
SMOKE_SIZE = 500
SMOKE_PROFILES = 50


# -- verdicts ----------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """A pass/fail rule on one metric.

    ``le``: metric <= target + tol; ``near``: |metric - target| <= tol;
    ``floor``: metric >= tol (loosening lowers the floor); ``gt``: metric > target.
    ``tolerance`` names an entry of the config's tolerances; None means 0.
    """

    metric: str
    op: str
    tolerance: Optional[str] = None
    target: float = 0.0

    def passes(self, metrics: dict, tolerances: dict) -> bool:
        m = metrics[self.metric]
        tol = tolerances[self.tolerance] if self.tolerance else 0.0
        if not math.isfinite(m):
            return False
        if self.op == "le":
            return m <= self.target + tol
        if self.op == "near":
            return abs(m - self.target) <= tol
        if self.op == "floor":
            return m >= tol
        if self.op == "gt":
            return m > self.target
        raise ValueError(f"unknown check op {self.op!r}")

    def loosened(self, tolerances: dict, factor: float) -> dict:
        """Tolerances with this check's entry moved ``factor`` times further in the lenient direction."""
        if not self.tolerance:
            return dict(tolerances)
        out = dict(tolerances)
        v = out[self.tolerance]
        out[self.tolerance] = v / factor if self.op == "floor" else v * factor
        return out


def evaluate(checks: dict, metrics: dict, tolerances: dict) -> dict:
    return {name: bool(c.passes(metrics, tolerances)) for name, c in checks.items()}


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    name: str
    run: Callable
    defaults: dict
    tolerances: dict
    slack: dict


REGISTRY: dict = {}


def register(name: str, *, tolerances: dict, slack: dict, **defaults):
    def wrap(fn):
        REGISTRY[name] = Experiment(name, fn, defaults, tolerances, slack)
        return fn
    return wrap


CONFIG_KEYS = {"name", "n", "replicates", "seed", "k", "levels", "tolerances", "params",
               "output", "record_elapsed"}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    n: object = 100
    replicates: int = 1000
    seed: int = 0
    k: int = 1
    levels: int = 20
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    record_elapsed: bool = False

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ConfigError(f"unknown experiment {self.name!r}; known: {', '.join(sorted(REGISTRY))}")
        if isinstance(self.replicates, bool) or not isinstance(self.replicates, int) or self.replicates < 100:
            raise ConfigError(f"replicates must be an integer >= 100, got {self.replicates!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        sizes = self.n if isinstance(self.n, list) else [self.n]
        if not sizes or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in sizes):
            raise ConfigError(f"n must be a positive integer or a list of them, got {self.n!r}")
        if isinstance(self.n, list) and self.name != "mean_variance":
            raise ConfigError(f"experiment {self.name!r} takes a single n")
        if not isinstance(self.k, int) or self.k < 0:
            raise ConfigError(f"k must be a nonnegative integer, got {self.k!r}")
        if not isinstance(self.levels, int) or not 0 <= self.levels <= 64:
            raise ConfigError(f"levels must be an integer in 0..64, got {self.levels!r}")
        known = REGISTRY[self.name].tolerances
        for key, v in self.tolerances.items():
            if key not in known:
                raise ConfigError(f"unknown tolerance {key!r} for {self.name}")
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerance {key!r} must be positive, got {v!r}")
        if self.name == "clt":
            s, t = self.paths
            if not 0 <= s < t <= 1:
                raise ConfigError(f"clt needs 0 <= s < t <= 1, got s={s}, t={t}")

    @classmethod
    def from_dict(cls, data: dict, name: Optional[str] = None) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if name is not None:
            if data.get("name", name) != name:
                raise ConfigError(f"config names {data['name']!r} but {name!r} was requested")
            data["name"] = name
        if "name" not in data:
            raise ConfigError("config needs a name")
        exp = REGISTRY.get(data["name"])
        if exp is None:
            raise ConfigError(f"unknown experiment {data['name']!r}; known: {', '.join(sorted(REGISTRY))}")
        merged = {k: v for k, v in exp.defaults.items() if k != "params"}
        merged.update({k: v for k, v in data.items() if k not in ("tolerances", "params")})
        merged["tolerances"] = {**exp.tolerances, **data.get("tolerances", {})}
        merged["params"] = {**exp.defaults.get("params", {}), **data.get("params", {})}
        return cls(**merged)

    @classmethod
    def load(cls, path, name: Optional[str] = None) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, name)

    @property
    def paths(self) -> tuple:
        return (Fraction(str(self.params.get("s", "1/3"))), Fraction(str(self.params.get("t", "2/3"))))

    def echo(self) -> dict:
        """Everything that determines the result (the output path does not)."""
        return {"name": self.name, "n": self.n, "replicates": self.replicates, "seed": self.seed,
                "k": self.k, "levels": self.levels, "tolerances": dict(sorted(self.tolerances.items())),
                "params": dict(sorted(self.params.items())), "record_elapsed": self.record_elapsed}


@dataclass
class Report:
    experiment: str
    config: dict
    seed: int
    metrics: dict
    targets: dict
    verdicts: dict
    slack: dict
    elapsed_seconds: float = 0.0
    pools: dict = field(default_factory=dict, repr=False)
    checks: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "seed": self.seed,
                "metrics": self.metrics, "targets": self.targets, "verdicts": self.verdicts,
                "pass": self.passed, "elapsed_seconds": self.elapsed_seconds, "slack": self.slack}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())

    def dump_pools(self, directory) -> list:
        """Write each raw sample pool as a one-column CSV named after the statistic."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, values in self.pools.items():
            path = directory / f"{self.experiment}_{name}.csv"
            lines = [name] + [repr(float(v)) for v in np.asarray(values).ravel()]
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
        return written


@dataclass
class _Result:
    metrics: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    pools: dict = field(default_factory=dict)

    def put(self, name, value):
        self.metrics[name] = float(value)

    def check(self, name, metric, op, tolerance=None, target=0.0, reference=None):
        self.checks[name] = Check(metric, op, tolerance, target)
        self.targets[name] = float(target if reference is None else reference)


def run_experiment(config: ExperimentConfig) -> Report:
    exp = REGISTRY[config.name]
    start = time.perf_counter()
    res = _Result()
    exp.run(config, RngStream(config.seed), res)
    elapsed = time.perf_counter() - start
    log.info("experiment %s finished in %.2f s", config.name, elapsed)
    verdicts = evaluate(res.checks, res.metrics, config.tolerances)
    return Report(config.name, config.echo(), config.seed, res.metrics, res.targets, verdicts,
                  dict(exp.slack), round(elapsed, 3) if config.record_elapsed else 0.0,
                  res.pools, res.checks)


# -- smoke checks shared by the tree-consuming experiments -------------------


def _smoke(res: _Result, rng: RngStream, n: int, model: str = "bst", batch=None) -> None:
    """Kraft identity and codec/silhouette round trip on a few explicit trees."""
    build = random_bst if model == "bst" else random_dst
    kraft = roundtrip = 0
    for i in range(SMOKE_TREES):
        tree = build(min(n, SMOKE_SIZE), rng.split(i)).final
        kraft += level_profile(tree).kraft_sum() != 1
        roundtrip += parse_tree(emit_tree(tree)) != tree
        roundtrip += tree_from_silhouette(silhouette_of(tree)) != tree
    if batch is not None:
        shallow = getattr(batch, "shallow", np.zeros(len(batch.hist), bool))
        rows = [r for r in range(min(SMOKE_PROFILES, len(batch.hist))) if not shallow[r]]
        kraft += sum(batch.profile(r).kraft_sum() != 1 for r in rows)
    res.put("smoke_kraft_failures", kraft)
    res.put("smoke_roundtrip_failures", roundtrip)
    res.check("smoke_kraft", "smoke_kraft_failures", "le")
    res.check("smoke_roundtrip", "smoke_roundtrip_failures", "le")


def _z(deviation: float, sd: float, count: int) -> float:
    if sd == 0.0:
        return 0.0 if deviation == 0.0 else math.inf
    return abs(deviation) / (sd / math.sqrt(count))


# -- the experiments ---------------------------------------------------------

MC_SLACK = "Monte Carlo error only (exact identity)"


@register("mean_variance", n=100, replicates=100_000,
          tolerances={"mean_z": 4.0, "variance": 0.03},
          slack={"mean_z": MC_SLACK + "; |mean - H_n| in units of sd/sqrt(R)",
                 "variance": "finite-n bias: exact variance is 0.3439 at n=1e4 vs limit 0.35507, "
                             "plus ~0.005 sampling sd at R=1e4"})
def run_mean_variance(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    sizes = cfg.n if isinstance(cfg.n, list) else [cfg.n]
    for i, n in enumerate(sizes):
        batch = simulate_bst_profiles(n, cfg.replicates, rng.split(0, i))
        eta = EmpiricalDistribution(batch.eta())
        h = harmonic(n)
        res.put(f"mean[n={n}]", eta.mean)
        res.put(f"mean_z[n={n}]", _z(eta.mean - h, eta.sd, len(eta)))
        res.check(f"mean[n={n}]", f"mean_z[n={n}]", "le", "mean_z", reference=h)
        res.put(f"variance[n={n}]", eta.variance)
        if n >= 1000:
            res.check(f"variance[n={n}]", f"variance[n={n}]", "near", "variance", ETA_INF_VARIANCE)
        res.pools[f"eta_n{n}"] = eta.samples
        _smoke(res, rng.split(1, i), n, batch=batch)


@register("clt", n=100_000, replicates=5000, params={"s": "1/3", "t": "2/3"},
          tolerances={"ks": 0.08, "corr": 0.2},
          slack={"ks": "finite-n slack: the lattice-valued depth alone puts the exact KS near 0.115 "
                       "at n=1e5; the jittered KS is reported alongside",
                 "corr": "calibrated from pilot runs (observed |corr| about 0.03 to 0.06 at n=1e5); "
                         "asymptotic value 0"})
def run_clt(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    s, t = cfg.paths
    n = cfg.n
    X = simulate_bst_paths(n, cfg.replicates, [s, t], rng.split(0)).astype(float)
    scale = math.sqrt(math.log(n))
    z = (X - math.log(n)) / scale
    jitter = rng.split(1).random(X.shape) - 0.5
    zj = (X + jitter - math.log(n)) / scale
    res.put("ks_s", ks_statistic(z[:, 0], "normal"))
    res.put("ks_t", ks_statistic(z[:, 1], "normal"))
    res.put("ks_s_jittered", ks_statistic(zj[:, 0], "normal"))
    res.put("ks_t_jittered", ks_statistic(zj[:, 1], "normal"))
    res.put("mean_s", z[:, 0].mean())
    res.put("sd_s", z[:, 0].std(ddof=1))
    corr = dist_stats(z[:, 0], z[:, 1], paired=True).corr
    res.put("corr", corr)
    res.put("abs_corr", abs(corr))
    res.check("ks_s", "ks_s", "le", "ks")
    res.check("corr", "abs_corr", "le", "corr")
    res.pools["z_s"] = z[:, 0]
    res.pools["z_t"] = z[:, 1]
    _smoke(res, rng.split(2), n)


@register("fixed_point", n=10_000, replicates=10_000, levels=25,
          tolerances={"w1": 0.05, "mean": 0.02, "variance": 0.03},
          slack={"w1": "finite-n bias in variance (0.3439 vs 0.35507) plus sampling error",
                 "mean": MC_SLACK, "variance": "as in mean_variance"})
def run_fixed_point(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    batch = simulate_bst_profiles(cfg.n, cfg.replicates, rng.split(0))
    a = EmpiricalDistribution(batch.eta() - harmonic(cfg.n))
    b = EmpiricalDistribution(sample_eta_inf(rng.split(1), cfg.levels, cfg.replicates))
    st = dist_stats(a, b)
    res.put("w1", st.w1)
    res.put("ks", st.ks)
    res.put("mean_tree", a.mean)
    res.put("mean_series", b.mean)
    res.put("variance_tree", a.variance)
    res.put("variance_series", b.variance)
    res.check("w1", "w1", "le", "w1")
    res.check("mean_tree", "mean_tree", "near", "mean")
    res.check("mean_series", "mean_series", "near", "mean")
    res.check("variance_tree", "variance_tree", "near", "variance", ETA_INF_VARIANCE)
    res.check("variance_series", "variance_series", "near", "variance", ETA_INF_VARIANCE)
    res.pools["eta_centered_tree"] = a.samples
    res.pools["eta_inf_series"] = b.samples
    _smoke(res, rng.split(2), cfg.n, batch=batch)


@register("recursion", n=200, replicates=100_000,
          tolerances={"w1": 0.02, "mean_z": 4.0},
          slack={"w1": MC_SLACK, "mean_z": MC_SLACK})
def run_recursion(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    n, R = cfg.n, cfg.replicates
    direct = simulate_bst_profiles(n, R, rng.split(0))
    A = EmpiricalDistribution(direct.eta())
    I = rng.split(1).integers(0, n, size=R)
    left = simulate_bst_profiles(I, R, rng.split(2)).eta()
    right = simulate_bst_profiles(n - 1 - I, R, rng.split(3)).eta()
    B = EmpiricalDistribution(1.0 + 0.5 * (left + right))
    h = harmonic(n)
    res.put("w1", wasserstein1(A, B))
    res.put("mean_direct", A.mean)
    res.put("mean_composed", B.mean)
    res.put("mean_z_direct", _z(A.mean - h, A.sd, len(A)))
    res.put("mean_z_composed", _z(B.mean - h, B.sd, len(B)))
    res.check("w1", "w1", "le", "w1")
    res.check("mean_direct", "mean_z_direct", "le", "mean_z", reference=h)
    res.check("mean_composed", "mean_z_composed", "le", "mean_z", reference=h)
    res.pools["eta_direct"] = A.samples
    res.pools["eta_composed"] = B.samples
    _smoke(res, rng.split(4), n, batch=direct)


@register("increments", n=10_000, replicates=10_000, k=1,
          tolerances={"w1": 0.05, "eta_w1": 0.05, "discard": 1e-3},
          slack={"w1": "finite-n bias plus sampling error; no rate is known",
                 "eta_w1": "as in fixed_point", "discard": "fill level below k is rare at this n"})
def run_increments(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    if cfg.k < 1:
        raise ConfigError("increments needs k >= 1")
    batch = simulate_bst_profiles(cfg.n, cfg.replicates, rng.split(0), cfg.k)
    keep = ~batch.shallow
    res.put("discard_fraction", 1.0 - keep.mean())
    res.check("discard", "discard_fraction", "le", "discard")
    emp = batch.increments()[keep]
    lim = sample_findim_limit(cfg.k, rng.split(1), cfg.levels, cfg.replicates)
    w = [wasserstein1(emp[:, j], lim.delta[:, j]) for j in range(1 << cfg.k)]
    for j, v in enumerate(w, start=1):
        res.put(f"w1[j={j}]", v)
    res.put("w1_max", max(w))
    res.check("w1", "w1_max", "le", "w1")
    eta_c = batch.eta()[keep] - harmonic(cfg.n)
    res.put("eta_w1", wasserstein1(eta_c, lim.eta_centered_limit))
    res.check("eta_w1", "eta_w1", "le", "eta_w1")
    bad = sum(sum(batch.exact_increments(r), ZERO) != 0 for r in np.flatnonzero(keep))
    res.put("nonzero_sum_replicates", bad)
    res.check("zero_sum", "nonzero_sum_replicates", "le")
    for j in range(1 << cfg.k):
        res.pools[f"delta_{j + 1}"] = emp[:, j]
    _smoke(res, rng.split(2), cfg.n, batch=batch)


@register("psi_convergence", replicates=10_000, levels=20,
          params={"iterations": 30, "resolution": 8, "window": [5, 25]},
          tolerances={"factor": 0.85, "w1": 0.05},
          slack={"factor": "calibrated from pilot runs of the coupled chains (observed about 0.79); "
                           "the proof's factor is 1/sqrt(2) in a different metric",
                 "w1": "pool size 1e4 sampling error"})
def run_psi_convergence(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    P = cfg.replicates
    iterations = int(cfg.params["iterations"])
    lo, hi = (int(v) for v in cfg.params["window"])
    if not 0 <= lo < hi <= iterations:
        raise ConfigError(f"window {lo}..{hi} must lie inside 0..{iterations}")
    top = int(cfg.params["resolution"])
    # chain B runs one step ahead of chain A; both then share their noise
    A = PsiPool.point_mass(P)
    B = psi_step(A, draw_psi_noise(rng.split(0), P), top)
    dist, sup = [], []
    for it in range(iterations):
        dist.append(wasserstein1(A.a, B.a))
        sup.append(wasserstein1(A.sup_norms(), B.sup_norms()))
        noise = draw_psi_noise(rng.split(1, it), P)
        A, B = psi_step(A, noise, top), psi_step(B, noise, top)
    for it, (d, s) in enumerate(zip(dist, sup)):
        res.put(f"successive_w1[{it}]", d)
        res.put(f"sup_norm_w1[{it}]", s)
    factor = (dist[hi] / dist[lo]) ** (1.0 / (hi - lo)) if dist[lo] > 0 else 0.0
    res.put("decay_factor", factor)
    res.check("decay_factor", "decay_factor", "le", "factor")
    series = sample_eta_inf(rng.split(2), cfg.levels, P)
    res.put("final_w1", wasserstein1(A.a, series))
    res.put("final_variance", A.a.var(ddof=1))
    res.check("final_w1", "final_w1", "le", "w1")
    res.pools["a_final"] = A.a
    res.pools["sup_norm_final"] = A.sup_norms()


@register("holder", n=256, replicates=100_000, levels=20,
          params={"median_k": [4, 16, 64], "moment_k": 8, "fit_k": 4, "moment_replicates": 10_000},
          tolerances={"ratio": 0.25},
          slack={"ratio": "the fitted constant is the largest ratio over k <= fit_k; "
                          "larger k may exceed it by this relative margin"})
def run_holder(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    ks = [int(k) for k in cfg.params["median_k"]]
    medians = []
    for k in ks:
        rho = sample_rho_path(k, rng.split(0, k), cfg.replicates)
        eta = sample_eta_inf(rng.split(1, k), cfg.levels, cfg.replicates)
        medians.append(float(np.median(np.abs(k + rho + eta))))
        res.put(f"median[k={k}]", medians[-1])
    res.put("median_min_increase", min(np.diff(medians)) if len(medians) > 1 else 0.0)
    res.check("median_increasing", "median_min_increase", "gt")
    kmax, kfit = int(cfg.params["moment_k"]), int(cfg.params["fit_k"])
    Rm = int(cfg.params["moment_replicates"])
    ratios = []
    for k in range(1, kmax + 1):
        d = sample_first_increment(k, rng.split(2, k), Rm, cfg.levels)
        ratios.append(float(np.mean(np.abs(d))) / (k * 2.0**-k))
        res.put(f"moment_ratio[k={k}]", ratios[-1])
    C = max(ratios[:kfit])
    res.put("fitted_constant", C)
    res.put("ratio_excess", max(ratios[kfit:]) / C if kmax > kfit else 0.0)
    res.check("moment_ratio", "ratio_excess", "le", "ratio", target=1.0)
    # qualitative modulus of a finite tree's tied-down integrated silhouette
    tree = random_bst(cfg.n, rng.split(3)).final
    f = functionals(tree)
    for j in range(1, 9):
        res.put(f"modulus[2^-{j}]", modulus_of_continuity(f.Ynorm, 2.0**-j))
    res.put("total_increment", abs(float(increments_dyadic(f.Ynorm, 0)[0])))
    res.check("total_increment", "total_increment", "le")
    _smoke(res, rng.split(4), cfg.n)


@register("dst", n=500, replicates=10_000,
          params={"frozen_size": 50, "insertions": 100_000, "birth_replicates": 15_000,
                  "birth_steps": 40, "birth_state": 3},
          tolerances={"chi2_alpha": 0.001, "w1": 0.05, "birth": 0.01},
          slack={"chi2_alpha": "significance floor of an exact multinomial null",
                 "w1": MC_SLACK, "birth": "about 3.5 binomial sd at 1e5 visits"})
def run_dst(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    p = cfg.params
    frozen = random_dst(int(p["frozen_size"]), rng.split(0)).final
    frontier = sorted(external_frontier(frozen))
    draws = sample_dst_external(frozen, rng.split(1), int(p["insertions"]))
    index = {u: i for i, u in enumerate(frontier)}
    observed = np.bincount([index[u] for u in draws], minlength=len(frontier))
    expected = np.array([2.0**-depth(u) for u in frontier]) * len(draws)
    chi2 = sps.chisquare(observed, expected)
    res.put("chi2", chi2.statistic)
    res.put("chi2_p", chi2.pvalue)
    res.check("chi2", "chi2_p", "floor", "chi2_alpha")

    n = cfg.n
    routed = simulate_dst(n, cfg.replicates, rng.split(2), "route")
    weighted = simulate_dst(n, cfg.replicates, rng.split(3), "weighted")
    res.put("builder_w1", wasserstein1(routed.eta(), weighted.eta()))
    res.check("builder_w1", "builder_w1", "le", "w1")

    state = int(p["birth_state"])
    walk = simulate_dst(int(p["birth_steps"]), int(p["birth_replicates"]), rng.split(4), "route").leftmost
    at = walk[:, :-1] == state
    visits = int(at.sum())
    steps = int((walk[:, 1:][at] == state + 1).sum())
    res.put("birth_visits", visits)
    res.put("birth_rate", steps / visits if visits else math.nan)
    res.check("birth_rate", "birth_rate", "near", "birth", 2.0**-state)

    # descriptive only
    eta = routed.eta()
    res.put("exploratory_mean_gap", eta.mean() - math.log2(n) - opt_eta_gap(n))
    res.put("exploratory_variance", eta.var(ddof=1))
    res.put("greedy_eta_gap", float(level_profile(greedy_min_depth(n)).discounted_path_length())
            - math.log2(n + 1))
    res.pools["eta_route"] = eta
    res.pools["eta_weighted"] = weighted.eta()
    _smoke(res, rng.split(5), n, model="dst", batch=routed)


@register("height_fill_sanity", n=100_000, replicates=200,
          tolerances={"height_band": 1.2, "fill_band": 0.5},
          slack={"height_band": "loose band [2.5, 4.9]; heights converge slowly",
                 "fill_band": "loose band [0.2, 1.2]; fill levels converge slowly"})
def run_height_fill_sanity(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    batch = simulate_bst_profiles(cfg.n, cfg.replicates, rng.split(0))
    h, f = batch.height(), batch.fill()
    L = math.log(cfg.n)
    res.put("height_ratio", h.mean() / L)
    res.put("fill_ratio", f.mean() / L)
    res.put("fill_above_height", int((f > h).sum()))
    res.check("height_ratio", "height_ratio", "near", "height_band", 3.7)
    res.check("fill_ratio", "fill_ratio", "near", "fill_band", 0.7)
    res.check("fill_le_height", "fill_above_height", "le")
    _smoke(res, rng.split(1), cfg.n, batch=batch)


@register("identities", n=10_000, replicates=1000, tolerances={},
          slack={"kraft": "exact", "roundtrip": "exact"})
def run_identities(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    sizes = np.round(np.logspace(0, math.log10(cfg.n), cfg.replicates)).astype(int)
    for model, build in (("bst", random_bst), ("dst", random_dst)):
        kraft = roundtrip = 0
        stream = rng.split(0 if model == "bst" else 1)
        for i, n in enumerate(sizes):
            tree = build(int(n), stream.split(i)).final
            kraft += level_profile(tree).kraft_sum() != 1
            roundtrip += tree_from_silhouette(silhouette_of(tree)) != tree
            roundtrip += parse_tree(emit_tree(tree)) != tree
        res.put(f"kraft_failures_{model}", kraft)
        res.put(f"roundtrip_failures_{model}", roundtrip)
        res.check(f"kraft_{model}", f"kraft_failures_{model}", "le")
        res.check(f"roundtrip_{model}", f"roundtrip_failures_{model}", "le")


@register("zeta_moments", replicates=1_000_000, tolerances={"mean": 0.002, "variance": 0.002},
          slack={"mean": MC_SLACK, "variance": MC_SLACK})
def run_zeta_moments(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    z = EmpiricalDistribution(sample_zeta(rng.split(0), cfg.replicates))
    res.put("mean", z.mean)
    res.put("variance", z.variance)
    res.check("mean", "mean", "near", "mean")
    res.check("variance", "variance", "near", "variance", ZETA_VARIANCE)


@register("mgf_bound", n=1000, replicates=100_000, levels=40, params={"t": [-1.0, 1.0]},
          tolerances={"se": 3.0, "oracle": 1e-6},
          slack={"se": "standard errors of the empirical mgf", "oracle": "quadrature accuracy"})
def run_mgf_bound(cfg: ExperimentConfig, rng: RngStream, res: _Result) -> None:
    batch = simulate_bst_profiles(cfg.n, cfg.replicates, rng.split(0))
    x = batch.eta() - harmonic(cfg.n)
    for t in (float(v) for v in cfg.params["t"]):
        e = np.exp(t * x)
        bound = mgf_eta_inf(t, cfg.levels)
        se = e.std(ddof=1) / math.sqrt(len(e))
        res.put(f"empirical[t={t:g}]", e.mean())
        res.put(f"bound[t={t:g}]", bound)
        res.put(f"excess_se[t={t:g}]", (e.mean() - bound) / se)
        res.check(f"bound[t={t:g}]", f"excess_se[t={t:g}]", "le", "se", reference=bound)
    quad, _ = integrate.quad(lambda u: math.exp(2.0 * float(zeta_from_uniform(u))), 0.0, 1.0,
                             epsabs=1e-13, epsrel=1e-13)
    res.put("mgf_zeta_2", mgf_zeta(2.0))
    res.put("mgf_zeta_2_quadrature", quad)
    res.put("mgf_zeta_2_error", abs(mgf_zeta(2.0) - quad))
    res.check("mgf_zeta_oracle", "mgf_zeta_2_error", "le", "oracle", reference=quad)
    _smoke(res, rng.split(1), cfg.n, batch=batch)
