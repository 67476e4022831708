import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fpplab import theory as th


def test_alpha_star():
    a = th.alpha_star()
    assert 3.5910 <= a <= 3.5912
    assert abs(a * math.log(a) - a - 1) < 1e-10
    assert math.e < a < 4
    table = th.TheoryTable.compute()
    assert table.alpha_star == a and table.zeta2 == pytest.approx(1.6449340668482264)


def test_alpha_eps_family():
    assert abs(th.alpha_eps(1e-6) - th.alpha_star()) < 1e-4
    grid = [0.01 * j for j in range(1, 41)]
    vals = [th.alpha_eps(e) for e in grid]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    for e, a in zip(grid, vals):
        assert abs(a * math.log(a) - a * (1 + math.log(1 - e)) - 1) < 1e-12
        assert a < th.alpha_star()
        fam = th.EpsilonFamily.at(e)
        assert fam.beta_eps == pytest.approx(1 / (2 * (1 + math.log(a) - math.log(1 - e))))
    n = math.exp(10)
    assert th.k_eps(n, 0.1) == pytest.approx(th.alpha_eps(0.1) * 10 - th.beta_eps(0.1) * math.log(10), rel=1e-14)
    with pytest.raises(ValueError):
        th.alpha_eps(0.5)


def test_loglog_convention():
    assert th.loglog(2.0) == 1.0
    assert th.loglog(math.exp(math.e)) == pytest.approx(1.0)
    assert th.loglog(1e9) == pytest.approx(math.log(math.log(1e9)))


def test_spt_tail_bound():
    assert th.spt_tail_bound(0.0, 1) == pytest.approx(3 / math.e)
    assert th.spt_tail_bound(2.0, 3) == 1.0  # m < e^t, vacuous
    t = 3.0
    ms = [math.ceil(math.exp(t)) + j for j in range(0, 200, 5)]
    vals = [th.spt_tail_bound(t, m) for m in ms]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(0 < v <= 3 for v in vals)


def test_rrt_height_bound():
    for m in (10, 1000, 10**6):
        assert th.rrt_height_bound(m, math.e) == pytest.approx(math.exp(math.e - 1))
        a = th.alpha_star()
        assert th.rrt_height_bound(m, a) == pytest.approx(math.exp(a - 1) / m, rel=1e-9)
    with pytest.raises(ValueError):
        th.rrt_height_bound(10, 1.0)


def test_max_hops_tail_bound():
    a = th.alpha_star()
    assert th.max_hops_tail_bound(500, 0) == pytest.approx(math.exp(a))
    n = 1000
    assert th.max_hops_tail_bound(n, math.log(n)) == pytest.approx(math.exp(a + 1) / n)


def test_poisson_gamma_identity_grid():
    worst = 0.0
    for w in np.arange(0.1, 10.0001, 0.1):
        for k in range(1, 51):
            p, g = th.poisson_gamma_identity(float(w), k)
            worst = max(worst, abs(p - g), abs(g - special.gammainc(k, w)))
    assert worst < 1e-10
    assert th.poisson_gamma_identity(2.0, 1)[0] == pytest.approx(1 - math.exp(-2.0))
    assert th.poisson_gamma_identity(0.0, 3) == (0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 200.0), st.integers(1, 200))
def test_gamma_cdf_matches_scipy(x, k):
    assert th.gamma_cdf(k, x) == pytest.approx(special.gammainc(k, x), rel=1e-9, abs=1e-300)
    assert math.isfinite(th.log_gamma_cdf(k, x))


def test_expected_light_paths():
    n, eps = 3, 0.2
    s = (1 - eps) * math.log(3) / 3
    assert th.expected_light_paths_exact(3, 1, eps).exact == pytest.approx(3 * (1 - math.exp(-s)))
    e = th.expected_light_paths_exact(10**9, 200, 0.1)
    assert math.isfinite(e.log_exact) and math.isfinite(e.log_asymptotic)


def test_expectation_ratio_near_threshold():
    # increasing k by one multiplies the count by (1 - eps) log n / (k + 1), i.e. about (1 - eps)/alpha_eps
    n, eps = 10**6, 0.1
    k = math.ceil(th.k_eps(n, eps))
    ratio = math.exp(th.expected_light_paths_exact(n, k + 1, eps).log_exact
                     - th.expected_light_paths_exact(n, k, eps).log_exact)
    target = (1 - eps) / th.alpha_eps(eps)
    assert abs(ratio / target - 1) < 0.05


def test_joint_weight_closed_form():
    # k = 2, i = 1: int_0^s e^-t (1 - e^-(s-t))^2 dt = 1 - 2 s e^-s - e^-2s
    for s in (0.1, 1.0, 3.0, 40.0):
        exact = 1 - 2 * s * math.exp(-s) - math.exp(-2 * s)
        assert th.joint_weight_exact(2, 1, s) == pytest.approx(exact, rel=1e-10, abs=1e-14)
    assert th.joint_weight_exact(2, 1, 60.0) == pytest.approx(1.0, abs=1e-12)


def test_joint_weight_below_bound_on_grid():
    for k in range(2, 13):
        for i in range(1, k):
            for s in np.linspace(0.05, 3.0, 12):
                assert th.joint_weight_exact(k, i, float(s)) <= th.joint_weight_bound(k, i, float(s)) * (1 + 1e-9)
    assert th.joint_weight_bound(5, 4, 1.3) == pytest.approx(4 * 1.3**6 / math.factorial(6))
    with pytest.raises(ValueError):
        th.joint_weight_exact(3, 3, 1.0)


def test_joint_weight_monte_carlo():
    rng = np.random.default_rng(11)
    k, i, s, m = 4, 2, 1.0, 10**6
    shared = rng.gamma(i, size=m)
    a = shared + rng.gamma(k - i, size=m)
    b = shared + rng.gamma(k - i, size=m)
    hits = (a <= s) & (b <= s)
    est, se = hits.mean(), hits.std() / math.sqrt(m)
    assert abs(th.joint_weight_exact(k, i, s) - est) <= 3 * se


def test_adaptive_simpson():
    assert th.adaptive_simpson(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert th.adaptive_simpson(lambda x: x**7, 0, 1e-3) == pytest.approx(1e-24 / 8, rel=1e-9)


def test_pair_count_bound():
    assert th.pair_count_bound(6, 3, 1, 1) == pytest.approx(6**6 * 54)
    assert th.pair_count_bound(6, 3, 3, 3) > 0
    assert math.isfinite(th.log_pair_count_bound(10**9, 200, 3, 2))
    with pytest.raises(ValueError):
        th.pair_count_bound(6, 3, 1, 2)


def test_g_functions():
    a = th.alpha_star()
    assert th.g_functions(0.0, a, 0.0) == (0.0, 0.0)
    beta, gmax = th.g_star_argmax()
    assert abs(beta - (2 * a - 4)) < 1e-6
    assert 1.01 <= gmax <= 1.03
    grid = np.linspace(0, a, 2001)
    assert max(th.g_function(float(b), a, 0.0) for b in grid) <= gmax + 1e-12
    with pytest.raises(ValueError):
        th.g_function(2 * a, a, 0.0)


def test_g_converges_to_g_star():
    eps = 0.01
    gamma = th.alpha_eps(eps)
    dev = max(abs(np.subtract(*th.g_functions(float(b), gamma, eps))) for b in np.linspace(0, gamma, 500))
    assert dev < 0.01


def test_second_moment_defect():
    assert th.second_moment_defect(0.0, 2.0) == 0.5
    seq = [th.second_moment_defect(e**1.5, e) for e in (1e2, 1e4, 1e6, 1e8)]
    assert all(b < a for a, b in zip(seq, seq[1:])) and seq[-1] < 1e-3
    with pytest.raises(ValueError):
        th.second_moment_defect(1.0, 0.0)


def test_large_dev_rate():
    assert th.large_dev_rate(1.0) == 0.0
    assert th.large_dev_rate(math.e) == pytest.approx(math.e - 2)
    rng = np.random.default_rng(2)
    k, c, m = 20, 4.0, 10**6
    freq = np.mean(rng.gamma(k, size=m) >= k * math.sqrt(c))
    assert freq <= math.exp(-k * th.large_dev_rate(math.sqrt(c)))


def test_stirling_upper():
    assert th.stirling_upper(1.0) >= 1.0
    assert th.stirling_upper(10.0) > 3628800
    for c in np.linspace(1.0, 50, 100):
        assert th.stirling_upper(float(c)) >= math.gamma(c + 1)
    # the e^(1/12) factor is a constant overshoot, so the ratio tends to it
    assert th.stirling_upper(100.0) / math.gamma(101) == pytest.approx(math.exp(1 / 12), rel=1e-3)
