"""Small statistical helpers shared by the experiment suites."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

Z95_ONE_SIDED = 1.6448536269514722
Z95_TWO_SIDED = 1.959963984540054


def wilson_interval(successes: int, total: int, z: float = Z95_TWO_SIDED) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    spread = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - spread), min(1.0, center + spread)


def wilson_upper(successes: int, total: int, z: float = Z95_ONE_SIDED) -> float:
    """One-sided 95% Wilson upper confidence limit."""
    return wilson_interval(successes, total, z)[1]


def mean_ci(values, z: float = Z95_TWO_SIDED) -> tuple[float, float, float, float]:
    """``(mean, std, lo, hi)`` with a normal-approximation interval."""
    x = np.asarray(values, dtype=np.float64)
    m = float(x.mean())
    s = float(x.std(ddof=1)) if x.size > 1 else 0.0
    half = z * s / math.sqrt(x.size) if x.size > 1 else 0.0
    return m, s, m - half, m + half


def standard_error(values) -> float:
    x = np.asarray(values, dtype=np.float64)
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf


def ks_critical(n: int, alpha: float = 1e-3) -> float:
    """Asymptotic one-sample KS critical value ``sqrt(-log(alpha/2)/2) / sqrt(n)``."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def ks_uniform(sample) -> tuple[float, float]:
    r = _st.kstest(np.asarray(sample), "uniform")
    return float(r.statistic), float(r.pvalue)


def ks_2samp(a, b) -> tuple[float, float]:
    r = _st.ks_2samp(np.asarray(a), np.asarray(b))
    return float(r.statistic), float(r.pvalue)
