"""Closed-form constants and bound evaluators.

Natural logarithms throughout. ``loglog(x)`` means ``max(log log x, 1)``.
Bounds that can overflow are evaluated in log space; the ``log_*`` variants
return the logarithm directly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

ZETA2 = math.pi**2 / 6.0
ZETA3 = 1.2020569031595942854
ROOT_TOL = 1e-12

_LOG4 = math.log(4.0)


def loglog(x: float) -> float:
    if x <= math.e:
        return 1.0
    return max(math.log(math.log(x)), 1.0)


def _solve_increasing(f, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of an increasing function on [lo, hi]: bisection, Newton polish by secant."""
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise ValueError("root not bracketed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    x = lo - flo * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
    if abs(f(x)) > abs(f(lo)):
        x = lo if abs(flo) < abs(fhi) else hi
    if abs(f(x)) >= tol:
        raise ArithmeticError(f"residual {f(x):.3e} above tolerance")
    return x


def alpha_star() -> float:
    """Unique root of ``a log a - a = 1`` on (e, 5); about 3.5911."""
    return _solve_increasing(lambda a: a * math.log(a) - a - 1.0, math.e, 5.0)


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")


def alpha_eps(eps: float) -> float:
    """Root of ``a log a - a (1 + log(1 - eps)) = 1``; below alpha_star."""
    _check_eps(eps)
    c = 1.0 + math.log1p(-eps)
    f = lambda a: a * math.log(a) - a * c - 1.0  # noqa: E731
    # increasing for a > 1 - eps; f(e (1-eps)) = -1
    return _solve_increasing(f, math.e * (1.0 - eps), alpha_star() + 1e-9)


def beta_eps(eps: float) -> float:
    a = alpha_eps(eps)
    return 1.0 / (2.0 * (1.0 + math.log(a) - math.log1p(-eps)))


def k_eps(n: float, eps: float) -> float:
    """``alpha_eps log n - beta_eps loglog n``."""
    return alpha_eps(eps) * math.log(n) - beta_eps(eps) * loglog(n)


@dataclass(frozen=True)
class EpsilonFamily:
    eps: float
    alpha_eps: float
    beta_eps: float

    @classmethod
    def at(cls, eps: float) -> "EpsilonFamily":
        return cls(eps, alpha_eps(eps), beta_eps(eps))

    def k(self, n: float) -> float:
        return self.alpha_eps * math.log(n) - self.beta_eps * loglog(n)


@dataclass(frozen=True)
class TheoryTable:
    alpha_star: float
    zeta2: float
    zeta3: float
    tolerance: float
    g_star_argmax: float
    g_star_max: float

    @classmethod
    def compute(cls, tolerance: float = ROOT_TOL) -> "TheoryTable":
        a = alpha_star()
        beta, gmax = g_star_argmax()
        return cls(a, ZETA2, ZETA3, tolerance, beta, gmax)

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# tail bounds


def spt_tail_bound(t: float, m: float) -> float:
    """``3 sqrt(m/e^t) exp(-m/e^t)``; 1 (vacuous) when ``m < e^t`` or ``m < 1``."""
    if m < 1 or m < math.exp(t):
        return 1.0
    c = m * math.exp(-t)
    return 3.0 * math.sqrt(c) * math.exp(-c)


def log_rrt_height_bound(m: float, x: float) -> float:
    return (x - 1.0) + (x - x * math.log(x)) * math.log(m)


def rrt_height_bound(m: float, x: float) -> float:
    """``e^(x-1) m^(x - x log x)``: bound on P(height of an m-node RRT >= x log m)."""
    if x <= 1.0:
        raise ValueError("x must exceed 1")
    if m < 2:
        raise ValueError("m must be at least 2")
    return math.exp(log_rrt_height_bound(m, x))


def max_hops_tail_bound(n: float, t: float, astar: float | None = None) -> float:
    """``exp(alpha* + t/log n) exp(-t)``: bound on P(max hops >= alpha* log n + t)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if n < 3:
        raise ValueError("n must be at least 3")
    a = alpha_star() if astar is None else astar
    return math.exp(a + t / math.log(n) - t)


def large_dev_rate(x: float) -> float:
    """Cramer rate ``x - 1 - log x`` of a mean-1 exponential."""
    if x <= 0:
        raise ValueError("x must be positive")
    return x - 1.0 - math.log(x)


def stirling_upper(c: float) -> float:
    """``sqrt(2 pi c) (c/e)^c e^(1/12)``, an upper bound on Gamma(c+1) for c >= 1."""
    if c <= 0:
        raise ValueError("c must be positive")
    return math.exp(0.5 * math.log(2 * math.pi * c) + c * (math.log(c) - 1.0) + 1.0 / 12.0)


# --------------------------------------------------------------------------
# incomplete gamma / Poisson tail


def _log_gamma_series(a: float, x: float) -> float:
    """log P(a, x) via the power series; good for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * 1e-17:
            break
    return a * math.log(x) - x - math.lgamma(a) + math.log(total)


def _log_gamma_cf(a: float, x: float) -> float:
    """log Q(a, x) via the Lentz continued fraction; good for x >= a + 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return a * math.log(x) - x - math.lgamma(a) + math.log(h)


def log_gamma_cdf(shape: float, x: float) -> float:
    """log of the regularized lower incomplete gamma P(shape, x)."""
    if shape <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return -math.inf
    if x < shape + 1.0:
        return _log_gamma_series(shape, x)
    return math.log1p(-math.exp(_log_gamma_cf(shape, x)))


def gamma_cdf(shape: float, x: float) -> float:
    """P(Gamma(shape, 1) <= x)."""
    if x <= 0:
        return 0.0
    if x < shape + 1.0:
        return math.exp(_log_gamma_series(shape, x))
    return -math.expm1(_log_gamma_cf(shape, x))


def gamma_pdf(shape: int, x: float) -> float:
    """Density ``x^(shape-1) e^-x / (shape-1)!``."""
    if x < 0:
        return 0.0
    if x == 0:
        return 1.0 if shape == 1 else 0.0
    return math.exp((shape - 1) * math.log(x) - x - math.lgamma(shape))


def poisson_tail(w: float, k: int) -> float:
    """P(Po(w) >= k) by direct summation of the terms from k upward."""
    if k <= 0:
        return 1.0
    if w <= 0:
        return 0.0
    log_term = k * math.log(w) - w - math.lgamma(k + 1)
    # sum relative to the first term, then rescale
    rel = 1.0
    total = 1.0
    i = k
    while True:
        i += 1
        rel *= w / i
        total += rel
        if rel < 1e-17 * total and i > w:
            break
    return min(1.0, math.exp(log_term + math.log(total)))


def poisson_gamma_identity(w: float, k: int) -> tuple[float, float]:
    """``(P(Po(w) >= k), P(Gamma(k) <= w))``; equal as real numbers."""
    if w < 0:
        raise ValueError("w must be non-negative")
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    return poisson_tail(w, int(k)), gamma_cdf(int(k), w)


# --------------------------------------------------------------------------
# light-path expectations and the second moment


def light_threshold(n: float, eps: float) -> float:
    """Weight threshold ``(1 - eps) log n`` in mean-1 scale, i.e. divided by n."""
    return (1.0 - eps) * math.log(n) / n


@dataclass(frozen=True)
class LightPathExpectation:
    n: int
    k: int
    eps: float
    log_exact: float
    log_asymptotic: float

    @property
    def exact(self) -> float:
        return _safe_exp(self.log_exact)

    @property
    def asymptotic(self) -> float:
        return _safe_exp(self.log_asymptotic)


def _safe_exp(x: float) -> float:
    return math.inf if x > 709.0 else math.exp(x)


def log_num_paths(n: int, k: int) -> float:
    """log of the number of undirected k-edge paths, ``(n)_{k+1} / 2``."""
    return math.lgamma(n + 1) - math.lgamma(n - k) - math.log(2.0)


def expected_light_paths_exact(n: int, k: int, eps: float) -> LightPathExpectation:
    """Expected number of undirected k-edge paths with weight <= (1-eps) log n.

    ``log_asymptotic`` is ``log(n^(k+1) s^k / k!)`` with s the mean-1
    threshold; it drops both the falling factorial and the factor 1/2.
    """
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n - 1")
    s = light_threshold(n, eps)
    log_exact = log_num_paths(n, k) + log_gamma_cdf(k, s)
    log_asym = (k + 1) * math.log(n) + k * math.log(s) - math.lgamma(k + 1)
    return LightPathExpectation(n, k, eps, log_exact, log_asym)


def joint_weight_exact(k: int, i: int, s: float, nodes: int = 64) -> float:
    """P(w(P) <= s, w(Q) <= s) for k-edge paths sharing i edges (mean-1 weights).

    Conditioning on the shared Gamma(i) weight gives
    ``int_0^s f_i(t) F_{k-i}(s - t)^2 dt``. The integrand is entire, so
    composite Gauss-Legendre on unit-length panels is accurate to rounding,
    including the tiny values at small ``s``.
    """
    if not 1 <= i < k:
        raise ValueError("need 1 <= i < k (use gamma_cdf(k, s) when i == k)")
    if s <= 0:
        return 0.0
    r = k - i
    x, wq = _legendre(nodes)
    panels = max(1, math.ceil(s))
    edges = np.linspace(0.0, s, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (edges[:-1, None] + half[:, None] * (x + 1.0)).ravel()
    pdf = np.exp((i - 1) * np.log(t) - t - math.lgamma(i))
    f = pdf * special.gammainc(r, s - t) ** 2
    return float(np.sum((half[:, None] * wq).ravel() * f))


@functools.lru_cache(maxsize=8)
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature.

    Error target is ``tol * max(|estimate|, tiny)`` capped at ``tol``, so tiny
    integrals are resolved to the same relative accuracy.
    """
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    target = min(tol, tol * abs(whole)) if whole != 0 else tol
    target = max(target, 1e-300)

    def rec(a, b, fa, fm, fb, whole, eps, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4 * frm + fb)
        delta = left + right - whole
        # the last clause stops refinement once the difference is pure rounding
        if depth <= 0 or abs(delta) <= 15 * eps or abs(delta) <= 1e-15 * abs(left + right):
            return left + right + delta / 15.0
        return (rec(a, m, fa, flm, fm, left, eps / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, eps / 2, depth - 1))

    # a few forced splits so a flat coarse estimate cannot stop early
    parts = 16
    h = (b - a) / parts
    total = 0.0
    for p in range(parts):
        lo, hi = a + p * h, a + (p + 1) * h
        flo, fmid, fhi = f(lo), f(0.5 * (lo + hi)), f(hi)
        w = h / 6.0 * (flo + 4 * fmid + fhi)
        total += rec(lo, hi, flo, fmid, fhi, w, target / parts, max_depth)
    return total


def log_joint_weight_bound(k: int, i: int, s: float) -> float:
    if not 1 <= i < k:
        raise ValueError("need 1 <= i < k")
    if s <= 0:
        return -math.inf
    return (k - i) * _LOG4 + (2 * k - i) * math.log(s) - math.lgamma(2 * k - i + 1)


def joint_weight_bound(k: int, i: int, s: float) -> float:
    """``4^(k-i) s^(2k-i) / (2k-i)!``."""
    return _safe_exp(log_joint_weight_bound(k, i, s))


def log_pair_count_bound(n: int, k: int, i: int, j: int) -> float:
    if not 1 <= j <= i <= k:
        raise ValueError("need 1 <= j <= i <= k")
    return (2 * k + 2 - i - j) * math.log(n) + j * math.log(2.0 * k**3)


def pair_count_bound(n: int, k: int, i: int, j: int) -> float:
    """``n^(2k+2-i-j) (2k^3)^j``; stays positive even where the true count is 0."""
    return _safe_exp(log_pair_count_bound(n, k, i, j))


def g_function(beta: float, gamma: float, eps: float) -> float:
    """Exponent rate of the j >= 2 pair sum, with k = gamma log n, i = beta log n."""
    if not 0.0 <= beta < 2.0 * gamma:
        raise ValueError("need 0 <= beta < 2 gamma")
    first = 0.0 if beta == 0 else beta * math.log((2 * gamma - beta) / (4 * math.e * (1 - eps)))
    return first + 2 * gamma * math.log(2 * gamma / (2 * gamma - beta))


def g_functions(beta: float, gamma: float, eps: float) -> tuple[float, float]:
    """``(g(beta; gamma, eps), g*(beta))`` where g* fixes gamma = alpha*, eps = 0."""
    return g_function(beta, gamma, eps), g_function(beta, alpha_star(), 0.0)


def g_star_argmax(tol: float = 1e-10) -> tuple[float, float]:
    """Maximizer of g* on [0, alpha*] by golden-section search, and the max."""
    a = alpha_star()
    g = lambda b: g_function(b, a, 0.0)  # noqa: E731
    invphi = (math.sqrt(5) - 1) / 2
    lo, hi = 0.0, a
    c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    gc, gd = g(c), g(d)
    while hi - lo > tol:
        if gc > gd:
            hi, d, gd = d, c, gc
            c = hi - invphi * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + invphi * (hi - lo)
            gd = g(d)
    beta = 0.5 * (lo + hi)
    return beta, g(beta)


def second_moment_defect(bound_on_delta: float, expectation: float) -> float:
    """``1/E + Delta/E^2``, an upper bound on P(|S| = 0)."""
    if expectation <= 0:
        raise ValueError("expectation must be positive")
    if bound_on_delta < 0:
        raise ValueError("Delta must be non-negative")
    return 1.0 / expectation + bound_on_delta / expectation**2
