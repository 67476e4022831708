"""Monte Carlo suites: hop counts, tail-bound checks, light paths, coupling.

Every trial draws its randomness from ``derive_trial_seed`` so results do
not depend on how trials are spread over worker processes; aggregation
always folds in trial order.

Weight statistics are reported on the mean-``n`` scale (internal weight
times ``n``) so that, e.g., ``w12_over_logn`` tends to 1.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special as _sp
from scipy import stats as _st

from . import combinat, predicates, theory
from .sptsim import (PathRecord, all_pairs_hop_stats, dijkstra_spt, extract_path,
                     growth_arrivals, rrt_heights)
from .stats import ks_uniform, mean_ci, standard_error, wilson_upper
from .weights import Distribution, WeightOracle, derive_trial_seed, edge_weights, uniform_draws

SCHEMA_VERSION = 1
MAX_ALL_PAIRS_N = 4000
MAX_TAIL_N = 1000
MAX_LIGHT_COUNT_N = 40
MAX_PLANTED_N = 2000
CHUNK = 1000  # trials per seeded block in the vectorized suites

EXPERIMENTS = (
    "constants", "simulate", "hops", "verify-spt-tail", "verify-rrt-height",
    "verify-max-tail", "count-pairs", "light-paths", "lightest-given-light",
    "predicates", "key-lemma", "coupling", "order-stats", "estimate-alpha",
)


class ResourceGuardError(RuntimeError):
    """A requested run exceeds a size limit; carries a runtime estimate."""


@dataclass
class ExperimentConfig:
    experiment: str = "hops"
    n: tuple[int, ...] = (1000,)
    trials: int = 100
    master_seed: int = 0
    eps: float = 0.1
    C: float = 1.0
    k: int | None = None
    delta: float = 0.5
    workers: int = 1
    out: str | None = None
    bonsai_eps_variant: bool = False
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        self.n = tuple(int(v) for v in self.n)
        if not self.n or min(self.n) < 2:
            raise ValueError("every n must be >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"schema_version must be {SCHEMA_VERSION}")
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        return d


# --------------------------------------------------------------------------
# plumbing


def trial_seed(master_seed: int, n: int, index: int) -> int:
    """Seed of trial ``index`` at size ``n``."""
    return derive_trial_seed(derive_trial_seed(master_seed, n), index)


def parallel_map(fn: Callable, arg_tuples: Sequence[tuple], workers: int = 1) -> list:
    """``[fn(*a) for a in arg_tuples]``, optionally across processes, in order."""
    if workers <= 1 or len(arg_tuples) <= 1:
        return [fn(*a) for a in arg_tuples]
    cols = list(zip(*arg_tuples))
    chunksize = max(1, len(arg_tuples) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *cols, chunksize=chunksize))


def write_csv(path: str | Path, rows: Iterable[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _fmt(row[c]) for c in columns})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    return v


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def seed_provenance(master_seed: int) -> dict:
    return {
        "master_seed": master_seed,
        "master_seed_hex": f"{master_seed:#018x}",
        "derivation": "trial seed = derive_trial_seed(derive_trial_seed(master, n), trial)",
    }


def all_pairs_runtime_model(n: int, trials: int = 1) -> float:
    """Rough single-core seconds for ``trials`` all-pairs runs (fit on n = 1000..4000)."""
    return trials * 0.72 * (n / 1000.0) ** 2.2


# --------------------------------------------------------------------------
# hop counts


@dataclass
class TrialResult:
    n: int
    seed: int
    hops_12: int
    max_hops_from_1: int
    max_hops_all_pairs: int
    w12_over_logn: float
    maxw_from1_over_logn: float
    maxw_allpairs_over_logn: float
    spt1_total_weight_over_n: float
    runtime_ms: float = field(default=0.0, compare=False)


TRIAL_COLUMNS = [f.name for f in fields(TrialResult) if f.name != "runtime_ms"]

# (statistic, normalizer, limit) for the aggregate table
HOP_STATISTICS = (
    ("hops_12_over_logn", "hops_12", 1.0),
    ("max_hops_from_1_over_logn", "max_hops_from_1", math.e),
    ("max_hops_all_pairs_over_logn", "max_hops_all_pairs", theory.alpha_star()),
    ("w12_over_logn", None, 1.0),
    ("maxw_from1_over_logn", None, 2.0),
    ("maxw_allpairs_over_logn", None, 3.0),
    ("spt1_total_weight_over_n", None, theory.ZETA2),
)
AGGREGATE_COLUMNS = ["n", "statistic", "trials", "mean", "std", "ci_low", "ci_high", "reference"]


def hop_trial(n: int, master_seed: int, index: int) -> TrialResult:
    seed = trial_seed(master_seed, n, index)
    t0 = time.perf_counter()
    st = all_pairs_hop_stats(n, WeightOracle(seed))
    logn = math.log(n)
    return TrialResult(
        n=n, seed=seed,
        hops_12=st.hops_12,
        max_hops_from_1=st.max_hops_from_1,
        max_hops_all_pairs=st.max_hops_all_pairs,
        w12_over_logn=st.w_12 * n / logn,
        maxw_from1_over_logn=st.max_w_from_1 * n / logn,
        maxw_allpairs_over_logn=st.max_w_all_pairs * n / logn,
        spt1_total_weight_over_n=st.spt1_total_weight,
        runtime_ms=1000.0 * (time.perf_counter() - t0),
    )


def statistic_values(results: Sequence[TrialResult], name: str) -> np.ndarray:
    for stat, hop_field, _ in HOP_STATISTICS:
        if stat == name:
            if hop_field is None:
                return np.array([getattr(r, name) for r in results], dtype=np.float64)
            return np.array([getattr(r, hop_field) / math.log(r.n) for r in results])
    raise KeyError(name)


def aggregate(results: Sequence[TrialResult]) -> list[dict]:
    rows = []
    for n in sorted({r.n for r in results}):
        sub = [r for r in results if r.n == n]
        for stat, _, ref in HOP_STATISTICS:
            m, s, lo, hi = mean_ci(statistic_values(sub, stat))
            rows.append({"n": n, "statistic": stat, "trials": len(sub), "mean": m, "std": s,
                         "ci_low": lo, "ci_high": hi, "reference": ref})
    return rows


@dataclass
class HopExperiment:
    trials: list[TrialResult]
    aggregates: list[dict]

    def for_n(self, n: int) -> list[TrialResult]:
        return [r for r in self.trials if r.n == n]

    def mean(self, n: int, stat: str) -> float:
        return float(statistic_values(self.for_n(n), stat).mean())


def check_all_pairs_guard(ns: Iterable[int], limit: int = MAX_ALL_PAIRS_N) -> None:
    for n in ns:
        if n > limit:
            raise ResourceGuardError(
                f"all-pairs runs are capped at n = {limit}; n = {n} would need about "
                f"{all_pairs_runtime_model(n):.0f} s per trial"
            )


def run_hop_experiment(config: ExperimentConfig) -> HopExperiment:
    """All-pairs hop and weight statistics, ``config.trials`` per ``n``."""
    check_all_pairs_guard(config.n)
    tasks = [(n, config.master_seed, t) for n in config.n for t in range(config.trials)]
    results = parallel_map(hop_trial, tasks, config.workers)
    return HopExperiment(results, aggregate(results))


def spt_weight_trial(n: int, master_seed: int, index: int) -> float:
    """Total weight of the tree from vertex 0 (mean-1 scale), single source only."""
    tree = dijkstra_spt(n, 0, WeightOracle(trial_seed(master_seed, n, index)))
    return tree.total_weight()


def run_spt_weight(n: int, trials: int, master_seed: int, workers: int = 1) -> np.ndarray:
    tasks = [(n, master_seed, t) for t in range(trials)]
    return np.array(parallel_map(spt_weight_trial, tasks, workers))


@dataclass
class SlopeEstimate:
    statistic: str
    n_grid: tuple[int, ...]
    means: tuple[float, ...]
    normalized_means: tuple[float, ...]
    slope: float
    slope_se: float
    intercept: float

    @property
    def ci(self) -> tuple[float, float]:
        return self.slope - 1.96 * self.slope_se, self.slope + 1.96 * self.slope_se


def fit_slope(ns: Sequence[int], samples: Sequence[np.ndarray], statistic: str) -> SlopeEstimate:
    """Least-squares slope of the mean against log n, with a delta-method s.e."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    means = np.array([float(np.mean(s)) for s in samples])
    ses = np.array([standard_error(s) for s in samples])
    xc = x - x.mean()
    weights = xc / np.sum(xc * xc)
    slope = float(np.sum(weights * means))
    intercept = float(means.mean() - slope * x.mean())
    se = float(math.sqrt(np.sum(weights**2 * ses**2)))
    return SlopeEstimate(statistic, tuple(int(n) for n in ns), tuple(means.tolist()),
                         tuple((means / x).tolist()), slope, se, intercept)


def estimate_alpha(n_grid: Sequence[int], trials: int, master_seed: int = 0,
                   workers: int = 1) -> tuple[SlopeEstimate, SlopeEstimate, HopExperiment]:
    """Slopes of mean max all-pairs hops and mean single-source height vs log n."""
    if len(n_grid) < 3:
        raise ValueError("need at least 3 grid points")
    cfg = ExperimentConfig("estimate-alpha", tuple(n_grid), trials, master_seed, workers=workers)
    exp = run_hop_experiment(cfg.validate())
    all_pairs = [np.array([r.max_hops_all_pairs for r in exp.for_n(n)]) for n in n_grid]
    from_one = [np.array([r.max_hops_from_1 for r in exp.for_n(n)]) for n in n_grid]
    return (fit_slope(n_grid, all_pairs, "max_hops_all_pairs"),
            fit_slope(n_grid, from_one, "max_hops_from_1"), exp)


# --------------------------------------------------------------------------
# bound checks


@dataclass
class BoundCheckRow:
    parameters: dict
    successes: int
    trials: int
    empirical_frequency: float
    wilson_upper_95: float
    theoretical_bound: float
    vacuous: bool

    @property
    def passed(self) -> bool:
        return self.vacuous or self.theoretical_bound >= 1.0 or self.wilson_upper_95 <= self.theoretical_bound

    def as_row(self) -> dict:
        row = dict(self.parameters)
        row.update(successes=self.successes, trials=self.trials,
                   empirical_frequency=self.empirical_frequency,
                   wilson_upper_95=self.wilson_upper_95,
                   theoretical_bound=self.theoretical_bound,
                   vacuous=self.vacuous, passed=self.passed)
        return row


BOUND_COLUMNS = ["successes", "trials", "empirical_frequency", "wilson_upper_95",
                 "theoretical_bound", "vacuous", "passed"]


def _bound_row(params: dict, hits: int, trials: int, bound: float, vacuous: bool) -> BoundCheckRow:
    hits, trials = int(hits), int(trials)
    return BoundCheckRow(params, hits, trials, hits / trials,
                         wilson_upper(hits, trials), float(bound),
                         bool(vacuous or bound >= 1.0))


def _chunks(trials: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(c, min(size, trials - c * size)) for c in range((trials + size - 1) // size)]


def _spt_tail_chunk(n: int, steps: int, count: int, master_seed: int, chunk: int,
                    t_int: np.ndarray, ms: np.ndarray) -> np.ndarray:
    rng = np.random.default_rng(derive_trial_seed(master_seed, chunk))
    arr = growth_arrivals(n, steps, count, rng)
    # |SPT(t)| >= m  iff  the (m-1)-th arrival happens by time t
    return np.array([np.count_nonzero(arr[:, m - 2] <= t) for t, m in zip(t_int, ms)])


def verify_spt_tail(n: int, trials: int, master_seed: int = 0,
                    t_factors: Sequence[float] = (0.3, 0.5, 0.7),
                    c_values: Sequence[float] = (2, 4, 8), workers: int = 1) -> list[BoundCheckRow]:
    """Empirical ``P(|SPT(t)| >= m)`` against ``3 sqrt(m/e^t) e^(-m/e^t)``.

    ``t = f log n`` on the mean-n scale and ``m = ceil(c e^t)``; growth runs
    on the internal scale, so the clock reads ``t / n``.
    """
    grid = []
    for f in t_factors:
        t = f * math.log(n)
        for c in c_values:
            grid.append((f, c, t, math.ceil(c * math.exp(t))))
    usable = [g for g in grid if 2 <= g[3] <= n]
    if not usable:
        raise ValueError("no grid point with 2 <= m <= n")
    steps = max(g[3] for g in usable) - 1
    t_int = np.array([g[2] / n for g in usable])
    ms = np.array([g[3] for g in usable], dtype=np.int64)
    tasks = [(n, steps, cnt, master_seed, c, t_int, ms) for c, cnt in _chunks(trials)]
    hits = np.sum(parallel_map(_spt_tail_chunk, tasks, workers), axis=0)
    rows = []
    for (f, c, t, m), h in zip(usable, hits):
        vac = m < math.exp(t)
        rows.append(_bound_row({"n": n, "t_factor": f, "c": c, "t": t, "m": m},
                               h, trials, theory.spt_tail_bound(t, m), vac))
    return rows


def _rrt_chunk(m: int, count: int, master_seed: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng(derive_trial_seed(master_seed, chunk))
    return rrt_heights(m, count, rng)


@dataclass
class RRTHeightCheck:
    m: int
    rows: list[BoundCheckRow]
    mean_height: float
    mean_height_se: float

    @property
    def mean_over_log_m(self) -> float:
        return self.mean_height / math.log(self.m)


def verify_rrt_height(m: int, trials: int, master_seed: int = 0,
                      xs: Sequence[float] = (2.5, 3.0, 3.5), workers: int = 1) -> RRTHeightCheck:
    """Empirical ``P(h(T_m) >= x log m)`` against ``e^(x-1) m^(x - x log x)``."""
    tasks = [(m, cnt, master_seed, c) for c, cnt in _chunks(trials)]
    h = np.concatenate(parallel_map(_rrt_chunk, tasks, workers))
    rows = []
    for x in xs:
        hits = int(np.count_nonzero(h >= x * math.log(m)))
        rows.append(_bound_row({"m": m, "x": x}, hits, trials, theory.rrt_height_bound(m, x), False))
    return RRTHeightCheck(m, rows, float(h.mean()), standard_error(h))


def verify_max_hops_tail(n: int, trials: int, master_seed: int = 0,
                         ts: Sequence[float] = (0.0, 2.0, 4.0), workers: int = 1,
                         hops: HopExperiment | None = None) -> list[BoundCheckRow]:
    """Empirical ``P(max hops >= alpha* log n + t)`` against ``e^(alpha* + t/log n - t)``."""
    check_all_pairs_guard([n], MAX_TAIL_N)
    if hops is None:
        hops = run_hop_experiment(ExperimentConfig("verify-max-tail", (n,), trials, master_seed,
                                                   workers=workers).validate())
    mx = np.array([r.max_hops_all_pairs for r in hops.for_n(n)])
    level = theory.alpha_star() * math.log(n)
    rows = []
    for t in ts:
        hits = int(np.count_nonzero(mx >= level + t))
        rows.append(_bound_row({"n": n, "t": t}, hits, mx.size, theory.max_hops_tail_bound(n, t), False))
    return rows


# --------------------------------------------------------------------------
# light paths


@dataclass
class LightPathCount:
    n: int
    k: int
    eps: float
    trials: int
    mean: float
    se: float
    exact: float

    @property
    def z(self) -> float:
        return (self.mean - self.exact) / self.se if self.se > 0 else math.inf


def _light_count_trial(n: int, k: int, s: float, master_seed: int, index: int) -> int:
    w = WeightOracle(trial_seed(master_seed, n, index)).matrix(n)
    return combinat.count_light_paths(w, k, s)


def count_light_paths_mc(n: int, k: int, eps: float, trials: int, master_seed: int = 0,
                         workers: int = 1) -> tuple[LightPathCount, np.ndarray]:
    """Per-trial exact count of k-edge paths with weight <= (1-eps) log n."""
    if n > MAX_LIGHT_COUNT_N:
        raise ResourceGuardError(f"light-path enumeration is capped at n = {MAX_LIGHT_COUNT_N}")
    s = theory.light_threshold(n, eps)
    tasks = [(n, k, s, master_seed, t) for t in range(trials)]
    counts = np.array(parallel_map(_light_count_trial, tasks, workers), dtype=np.int64)
    exact = theory.expected_light_paths_exact(n, k, eps).exact
    return LightPathCount(n, k, eps, trials, float(counts.mean()), standard_error(counts), exact), counts


def sample_window_weights(k: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. mean-1 exponentials conditioned on their sum lying in ``[lo, hi]``.

    The sum is Gamma(k); draw it by inverting the truncated CDF, then split
    it with uniform spacings (the conditional law given the sum).
    """
    flo, fhi = _sp.gammainc(k, lo), _sp.gammainc(k, hi)
    total = float(_sp.gammaincinv(k, flo + (fhi - flo) * rng.random()))
    total = min(max(total, lo), hi)
    cuts = np.sort(rng.random(k - 1))
    return total * np.diff(np.concatenate([[0.0], cuts, [1.0]]))


def _planted_trial(n: int, k: int, eps: float, master_seed: int, index: int) -> int:
    seed = trial_seed(master_seed, n, index)
    rng = np.random.default_rng(seed)
    lo = (1.0 - 2.0 * eps) * math.log(n) / n
    hi = theory.light_threshold(n, eps)
    xs = sample_window_weights(k, max(lo, 0.0), hi, rng)
    path = np.arange(k + 1, dtype=np.int64)
    tree = dijkstra_spt(n, 0, WeightOracle(seed), budget=float(xs.sum()) * (1 + 1e-12),
                        overrides=(path[:-1], path[1:], xs))
    found = extract_path(tree, k).vertices
    return int(found != tuple(range(k + 1)))


@dataclass
class PlantedCheck:
    row: BoundCheckRow
    trivial_regime: bool  # eps <= 2 loglog n / log n


def verify_lightest_given_light(n: int, k: int, eps: float, trials: int, master_seed: int = 0,
                                workers: int = 1) -> PlantedCheck:
    """``P(planted path is not the lightest between its ends)`` against ``13 k^2 / n^eps``.

    The path ``0-1-...-k`` gets weights drawn from the window
    ``[(1-2eps) log n, (1-eps) log n]`` (mean-n scale); all other edges are
    untouched, which is valid because edge weights are independent.
    """
    if n > MAX_PLANTED_N:
        raise ResourceGuardError(f"planted-path runs are capped at n = {MAX_PLANTED_N}")
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n - 1")
    tasks = [(n, k, eps, master_seed, t) for t in range(trials)]
    misses = int(np.sum(parallel_map(_planted_trial, tasks, workers)))
    bound = 13.0 * k * k / n**eps
    trivial = eps <= 2.0 * math.log(math.log(n)) / math.log(n)
    row = _bound_row({"n": n, "k": k, "eps": eps}, misses, trials, bound, trivial)
    return PlantedCheck(row, trivial)


# --------------------------------------------------------------------------
# coupling and order statistics


@dataclass
class CouplingCheck:
    n: int
    paths: int
    max_discrepancy: float
    max_quadratic: float  # max over paths of sum x_e^2 / 2
    bound: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.bound


def verify_coupling(n: int, paths: int, master_seed: int = 0) -> CouplingCheck:
    """``|w'(P) - sum U_e|`` over sampled shortest paths, ``X_e = -log(1 - U_e)``.

    Paths are tree paths from successive sources of one coupled oracle; only
    those with at most ``12 log n`` edges and mean-n weight at most
    ``12 log n`` enter.
    """
    oracle = WeightOracle(derive_trial_seed(master_seed, n), distribution=Distribution.COUPLED)
    logn = math.log(n)
    worst = quad = 0.0
    taken = 0
    source = 0
    while taken < paths and source < n:
        tree = dijkstra_spt(n, source, oracle)
        for j in range(n):
            if taken >= paths:
                break
            if j == source:
                continue
            p = extract_path(tree, j)
            if p.k > 12 * logn or p.weight * n > 12 * logn:
                continue
            v = np.asarray(p.vertices, dtype=np.int64)
            xs = edge_weights(oracle, v[:-1], v[1:])
            us = uniform_draws(oracle, v[:-1], v[1:])
            worst = max(worst, abs(float(xs.sum()) - float(us.sum())))
            quad = max(quad, float(np.sum(xs * xs)) / 2.0)
            taken += 1
        source += 1
    return CouplingCheck(n, taken, worst, quad, 864.0 * logn**3 / n**2)


@dataclass
class OrderStatsCheck:
    n: int
    trials: int
    ks_uniform: float
    p_uniform: float
    ks_beta: float
    p_beta: float
    mean_first: float
    mean_first_se: float

    def passed(self, alpha: float = 1e-3) -> bool:
        return self.p_uniform > alpha and self.p_beta > alpha


def verify_uniform_order_stats(n: int, trials: int, master_seed: int = 0) -> OrderStatsCheck:
    """Normalized partial sums ``S_k / S_n`` of n exponentials versus uniform order statistics.

    The pooled values ``S_k/S_n`` (k < n) of one trial are the sorted
    values of n-1 independent uniforms, so pooling keeps the sample i.i.d.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(derive_trial_seed(master_seed, n))
    s = np.cumsum(rng.standard_exponential((trials, n)), axis=1)
    ratios = s[:, :-1] / s[:, -1:]
    d_u, p_u = ks_uniform(ratios.ravel())
    first = ratios[:, 0]
    r = _st.kstest(first, _st.beta(1, n - 1).cdf)
    return OrderStatsCheck(n, trials, d_u, p_u, float(r.statistic), float(r.pvalue),
                           float(first.mean()), standard_error(first))


# --------------------------------------------------------------------------
# predicate survey


PREDICATE_COLUMNS = ["trial", "seed", "n", "k", "weight", "required_C", "C", "legal",
                     "bonsai", "violations", "ell_max"]


def _predicate_trial(n: int, k: int, C: float, eps: float | None, eps_variant: bool,
                     master_seed: int, index: int) -> dict:
    seed = trial_seed(master_seed, n, index)
    oracle = WeightOracle(seed)
    verts = tuple(range(k + 1))
    if eps is None:
        rec = PathRecord.from_oracle(verts, oracle)
    else:
        rng = np.random.default_rng(seed)
        lo = max((1.0 - 2.0 * eps) * math.log(n) / n, 0.0)
        rec = PathRecord.from_edge_weights(verts, sample_window_weights(k, lo, theory.light_threshold(n, eps), rng))
    legal = predicates.is_legal(rec, C)
    bons = predicates.is_bonsai(rec, C, n, oracle,
                                eps_variant=eps if (eps_variant and eps is not None) else None)
    return {"trial": index, "seed": seed, "n": n, "k": k, "weight": rec.weight * n,
            "required_C": predicates.required_C(rec.edge_weights), "C": C,
            "legal": legal.legal, "bonsai": bons.bonsai,
            "violations": len(bons.violations), "ell_max": bons.ell_max_used}


def predicate_survey(n: int, k: int, C: float, trials: int, master_seed: int = 0,
                     eps: float | None = None, eps_variant: bool = False,
                     workers: int = 1) -> list[dict]:
    """Legality and bonsai status of the path ``0-1-..-k`` over independent graphs.

    With ``eps`` set, the path weights are drawn from the light window
    ``[(1-2eps) log n, (1-eps) log n]`` instead of unconditionally.
    """
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n - 1")
    tasks = [(n, k, C, eps, eps_variant, master_seed, t) for t in range(trials)]
    return parallel_map(_predicate_trial, tasks, workers)
