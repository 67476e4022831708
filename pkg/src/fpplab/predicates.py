"""Structural path predicates: legality, bonsai, once-intersection, local optimality.

Weights enter the legality test only through ``k / w(P)``, so it reads the
same on either scale. The bonsai test mixes weights with absolute budgets
and heights; those formulas are stated on the mean-``n`` scale
and converted to the mean-1 internal scale with ``scale`` (default ``n``).

The ``log log`` factor is ``max(log log x, 1)`` everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import combinat
from .sptsim import PathRecord, spt_restricted
from .stats import wilson_interval
from .weights import WeightOracle, derive_trial_seed

# slack for exact ties such as an equal-weight path, where rounding leaves
# deviations of order 1e-15 instead of 0
MARGIN_TOL = 1e-9
LOCAL_OPT_MAX_N = 9
KEY_LEMMA_MAX_N = 8


def loglog_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.ones_like(x)
    big = x > math.e
    out[big] = np.maximum(np.log(np.log(x[big])), 1.0)
    return out


def m_and_s(i: int, j: int, k: int) -> tuple[int, int, int]:
    """``(m(i,k), m(j,k), s(i,j,k))`` with ``m(i,k) = min(i-1, k+1-i)``."""
    if not 1 <= i < j <= k + 1:
        raise ValueError(f"need 1 <= i < j <= k+1, got i={i}, j={j}, k={k}")
    mi = min(i - 1, k + 1 - i)
    mj = min(j - 1, k + 1 - j)
    return mi, mj, max(mi, mj)


def _edge_array(path: PathRecord) -> np.ndarray:
    if path.edge_weights is None:
        raise ValueError("path carries no per-edge weights; build it with PathRecord.from_oracle")
    return np.asarray(path.edge_weights, dtype=np.float64)


def _deviations(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward/backward ``|k/w * partial sum - i|`` and the radical ``sqrt(2 i LL i)``.

    Works on a single path ``(k,)`` or a batch ``(P, k)``.
    """
    k = xs.shape[-1]
    w = xs.sum(axis=-1, keepdims=True)
    if np.any(w <= 0):
        raise ValueError("path weight must be positive")
    i = np.arange(1, k + 1, dtype=np.float64)
    fwd = np.abs(k / w * np.cumsum(xs, axis=-1) - i)
    bwd = np.abs(k / w * np.cumsum(xs[..., ::-1], axis=-1) - i)
    radical = np.sqrt(2.0 * i * loglog_array(i))
    return fwd, bwd, radical


def required_C(xs) -> np.ndarray | float:
    """Smallest C for which the path(s) with edge weights ``xs`` are C-legal."""
    xs = np.asarray(xs, dtype=np.float64)
    fwd, bwd, radical = _deviations(xs)
    dev = np.maximum(fwd, bwd)
    dev = np.where(dev <= MARGIN_TOL, 0.0, dev)
    need = (dev / radical).max(axis=-1)
    return float(need) if need.ndim == 0 else need


@dataclass
class LegalityReport:
    path: PathRecord
    C: float
    forward_margins: np.ndarray
    backward_margins: np.ndarray
    legal: bool


def is_legal(path: PathRecord, C: float) -> LegalityReport:
    """Check both prefix and suffix deviations against ``C sqrt(2 i LL i)``."""
    if path.k < 1:
        raise ValueError("need k >= 1")
    xs = _edge_array(path)
    fwd, bwd, radical = _deviations(xs)
    fm = fwd - C * radical
    bm = bwd - C * radical
    legal = bool(np.all(fm <= MARGIN_TOL) and np.all(bm <= MARGIN_TOL))
    return LegalityReport(path, C, fm, bm, legal)


@dataclass(frozen=True)
class SubpathDeviation:
    deviation: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.deviation <= self.bound + MARGIN_TOL


def subpath_deviation(path: PathRecord, i: int, j: int, C: float = 1.0) -> SubpathDeviation:
    """Deviation of the stretch ``v_i .. v_j`` (1-based) and its legal-path bound."""
    k = path.k
    _, _, s = m_and_s(i, j, k)
    xs = _edge_array(path)
    dev = abs(k / xs.sum() * xs[i - 1:j - 1].sum() - (j - i))
    bound = 2.0 * C * math.sqrt(2.0 * s * float(loglog_array(s)))
    return SubpathDeviation(dev, bound)


# --------------------------------------------------------------------------
# bonsai


def bonsai_budget(ell, C: float):
    """Time budget ``l + 2C sqrt(500 l LL l)`` on the mean-n scale."""
    ell = np.asarray(ell, dtype=np.float64)
    return ell + 2.0 * C * np.sqrt(500.0 * ell * loglog_array(ell))


@dataclass
class BonsaiReport:
    path: PathRecord
    C: float
    violations: list[tuple[int, int, int, float]] = field(default_factory=list)
    ell_max_used: int = 0

    @property
    def bonsai(self) -> bool:
        return not self.violations


def bonsai_height_factor(path: PathRecord, n: int, scale: float | None = None,
                         eps_variant: float | None = None) -> float:
    """``9k / (10 w)`` with ``w`` the mean-n weight, or ``(1-eps) log n``."""
    scale = float(n) if scale is None else float(scale)
    w = (1.0 - eps_variant) * math.log(n) if eps_variant is not None else path.weight * scale
    if w <= 0:
        raise ValueError("path weight must be positive")
    return 9.0 * path.k / (10.0 * w)


def is_bonsai(path: PathRecord, C: float, n: int, oracle: WeightOracle,
              scale: float | None = None, eps_variant: float | None = None,
              stop_at_first: bool = False) -> BonsaiReport:
    """Height profile test for the trees leaving each vertex of ``path`` in K_n^P.

    For vertex ``v_i`` and integers ``l`` from ``max(ceil(m(i,k)/40), 1)``
    up to ``ell_max - 1``, the tree truncated at ``bonsai_budget(l)`` must
    have height below ``factor * l``. ``ell_max`` is the first level with
    ``factor * ell_max >= n``; every tree has height < n, so larger levels
    cannot fail. ``scale`` converts internal weights to mean-n weights.
    """
    k = path.k
    if k < 1:
        raise ValueError("need k >= 1")
    scale = float(n) if scale is None else float(scale)
    factor = bonsai_height_factor(path, n, scale, eps_variant)
    ell_max = max(1, math.ceil(n / factor))
    while factor * (ell_max - 1) >= n:  # guard against rounding in the ceiling
        ell_max -= 1
    report = BonsaiReport(path, C, ell_max_used=ell_max)
    if ell_max <= 1:
        return report
    levels = np.arange(1, ell_max, dtype=np.int64)
    budgets = bonsai_budget(levels, C) / scale
    allowed = factor * levels
    for idx, v in enumerate(path.vertices):
        i = idx + 1
        m = min(i - 1, k + 1 - i)
        lo = max(math.ceil(m / 40), 1)
        if lo >= ell_max:
            continue
        tree = spt_restricted(n, v, oracle, path.vertices, float(budgets[-1]))
        d = tree.dist[tree.order]
        running_height = np.maximum.accumulate(tree.depth[tree.order])
        reached = np.searchsorted(d, budgets, side="right")
        heights = running_height[reached - 1]
        bad = np.nonzero((heights >= allowed) & (levels >= lo))[0]
        for b in bad:
            report.violations.append((i, int(levels[b]), int(heights[b]), float(allowed[b])))
        if stop_at_first and report.violations:
            break
    return report


# --------------------------------------------------------------------------
# intersections and local optima


def intersects_once(p: Sequence[int], q: Sequence[int]) -> bool:
    """True iff the shared edges of ``p`` and ``q`` form exactly one piece."""
    if len(p) != len(q):
        raise ValueError("paths must have equal length")
    prof = combinat.intersection_profile(p, q)
    return prof.shared_edges >= 1 and prof.components == 1


def _vertices(path) -> tuple[int, ...]:
    return tuple(int(v) for v in getattr(path, "vertices", path))


def _canonical(vs: Sequence[int]) -> tuple[int, ...]:
    vs = tuple(vs)
    return vs if vs[0] < vs[-1] else vs[::-1]


def _once_mask(p: np.ndarray, table: np.ndarray) -> np.ndarray:
    i, j, _ = combinat._profiles_against(p, table)
    mask = (i >= 1) & (j == 1)
    same = np.all(table == np.asarray(_canonical(p)), axis=1)
    return mask & ~same


def _table_weights(w: np.ndarray, table: np.ndarray) -> np.ndarray:
    return w[table[:, :-1], table[:, 1:]].sum(axis=1)


def is_local_optimum(path, n: int, oracle: WeightOracle) -> bool:
    """Brute force: every other k-edge path meeting ``path`` once is strictly heavier."""
    if n > LOCAL_OPT_MAX_N:
        raise combinat.EnumerationLimitError(f"local optimum check limited to n <= {LOCAL_OPT_MAX_N}")
    vs = _vertices(path)
    k = len(vs) - 1
    w = oracle.matrix(n)
    table = combinat.path_table(n, k)
    p = np.asarray(vs, dtype=np.int64)
    wp = float(w[p[:-1], p[1:]].sum())
    mask = _once_mask(p, table)
    return bool(np.all(_table_weights(w, table)[mask] > wp))


@dataclass(frozen=True)
class Counterexample:
    trial: int
    seed: int
    path: tuple[int, ...]
    weight: float  # mean-n scale
    rival: tuple[int, ...]
    rival_weight: float


@dataclass
class KeyLemmaResult:
    n: int
    C: float
    trials: int
    candidates: int  # paths meeting the weight window
    legal: int
    legal_and_bonsai: int
    counterexamples: list[Counterexample]


def key_lemma_trial(n: int, C: float, master_seed: int, trial: int) -> tuple[int, int, int, list[Counterexample]]:
    seed = derive_trial_seed(master_seed, trial)
    oracle = WeightOracle(seed)
    w0 = oracle.matrix(n) * n
    found: list[Counterexample] = []
    cand = legal = both = 0
    for k in range(1, n):
        table = combinat.path_table(n, k)
        xs = w0[table[:, :-1], table[:, 1:]]
        wt = xs.sum(axis=1)
        window = np.nonzero((wt <= k) & (k <= 4.0 * wt))[0]
        cand += window.size
        if window.size == 0:
            continue
        ok = window[required_C(xs[window]) <= C]
        legal += ok.size
        for r in ok:
            vs = tuple(int(v) for v in table[r])
            rec = PathRecord(vs, float(wt[r]) / n, xs[r] / n)
            if not is_bonsai(rec, C, n, oracle, stop_at_first=True).bonsai:
                continue
            both += 1
            mask = _once_mask(table[r], table)
            rivals = np.nonzero(mask & (wt <= wt[r]))[0]
            if rivals.size:
                q = rivals[np.argmin(wt[rivals])]
                found.append(Counterexample(trial, seed, vs, float(wt[r]),
                                            tuple(int(v) for v in table[q]), float(wt[q])))
    return cand, legal, both, found


def verify_key_lemma(n: int, trials: int, C: float, master_seed: int = 0) -> KeyLemmaResult:
    """Exhaustive search for windowed, legal, bonsai paths that are not local optima.

    Weights are drawn per trial from ``derive_trial_seed(master_seed, t)``;
    the bonsai trees use layer-1 weights on the path's own edges. Rival
    paths use layer-0 weights throughout, since their private edges avoid
    the path.
    """
    if n > KEY_LEMMA_MAX_N:
        raise combinat.EnumerationLimitError(f"key-lemma check limited to n <= {KEY_LEMMA_MAX_N}")
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    res = KeyLemmaResult(n, C, trials, 0, 0, 0, [])
    for t in range(trials):
        c, l, b, found = key_lemma_trial(n, C, master_seed, t)
        res.candidates += c
        res.legal += l
        res.legal_and_bonsai += b
        res.counterexamples.extend(found)
    return res


# --------------------------------------------------------------------------
# calibration of C


def calibration_grid() -> np.ndarray:
    """0 followed by 2**(j/8) for j = -48 .. 64 (1/64 up to 256)."""
    return np.concatenate([[0.0], 2.0 ** (np.arange(-48, 65) / 8.0)])


@dataclass(frozen=True)
class CalibrationResult:
    delta: float
    k: int
    samples: int
    C: float
    fraction_legal: float
    ci_low: float
    ci_high: float


def calibrate_C(delta: float, k: int, samples: int, rng: np.random.Generator) -> CalibrationResult:
    """Smallest grid C with at least ``1 - delta`` of random k-edge paths C-legal."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if k < 1 or samples < 1:
        raise ValueError("need k >= 1 and samples >= 1")
    need = np.atleast_1d(required_C(rng.exponential(size=(samples, k))))
    for c in calibration_grid():
        hits = int(np.count_nonzero(need <= c))
        if hits >= (1.0 - delta) * samples:
            lo, hi = wilson_interval(hits, samples)
            return CalibrationResult(delta, k, samples, float(c), hits / samples, lo, hi)
    raise RuntimeError("calibration grid exhausted")
