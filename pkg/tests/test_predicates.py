import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from fpplab import predicates as pr
from fpplab import theory as th
from fpplab.combinat import EnumerationLimitError, path_table
from fpplab.sptsim import PathRecord, spt_restricted
from fpplab.stats import wilson_upper
from fpplab.weights import WeightOracle


def _path(xs, start=0):
    return PathRecord.from_edge_weights(range(start, start + len(xs) + 1), xs)


def test_m_and_s():
    assert pr.m_and_s(1, 2, 5)[0] == 0
    assert pr.m_and_s(1, 6, 5)[1] == 0
    assert pr.m_and_s(3, 9, 10) == (2, 2, 2)
    with pytest.raises(ValueError):
        pr.m_and_s(3, 3, 5)
    with pytest.raises(ValueError):
        pr.m_and_s(1, 7, 5)


def test_legality_basic_cases():
    assert pr.is_legal(_path([0.3]), 0.0).legal
    flat = pr.is_legal(_path([0.7] * 12), 0.0)
    assert flat.legal and np.all(flat.forward_margins <= 1e-9)
    assert pr.required_C([0.7] * 12) == 0.0
    lop = _path([5.0] + [0.01] * 9)
    assert not pr.is_legal(lop, 1.0).legal
    assert pr.is_legal(lop, pr.required_C(lop.edge_weights)).legal
    with pytest.raises(ValueError):
        pr.is_legal(_path([0.0, 0.0]), 1.0)


def test_legality_by_hand():
    # k = 2, x = (1, 3): forward deviation 2/4 - 1 = -0.5 at i = 1, radical sqrt(2)
    rep = pr.is_legal(_path([1.0, 3.0]), 1.0)
    assert rep.forward_margins[0] == pytest.approx(0.5 - math.sqrt(2))
    assert rep.backward_margins[0] == pytest.approx(0.5 - math.sqrt(2))
    assert pr.required_C([1.0, 3.0]) == pytest.approx(0.5 / math.sqrt(2))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-3, 10.0), min_size=1, max_size=40), st.floats(0, 5), st.floats(0, 5))
def test_legal_set_monotone_in_C(xs, a, b):
    lo, hi = sorted((a, b))
    p = _path(xs)
    if pr.is_legal(p, lo).legal:
        assert pr.is_legal(p, hi).legal
    assert pr.is_legal(p, pr.required_C(xs)).legal


def test_subpath_bound_on_legal_paths():
    rng = np.random.default_rng(30)
    k, C = 30, 1.5
    xs = rng.exponential(size=(20000, k))
    legal = xs[pr.required_C(xs) <= C][:1000]
    assert len(legal) == 1000
    for row in legal:
        p = _path(row)
        for i in range(1, k + 1):
            for j in range(i + 1, k + 2):
                assert pr.subpath_deviation(p, i, j, C).holds
    assert pr.subpath_deviation(_path(legal[0]), 1, k + 1).deviation == pytest.approx(0.0, abs=1e-12)
    flat = _path([2.0] * 8)
    assert all(pr.subpath_deviation(flat, i, j).deviation < 1e-12 for i in range(1, 9) for j in range(i + 1, 10))


def test_calibration():
    res = pr.calibrate_C(1.0, 20, 100, np.random.default_rng(0))
    assert res.C == 0.0
    c30 = pr.calibrate_C(0.5, 30, 10**4, np.random.default_rng(1))
    assert 0 < c30.C < 10 and c30.ci_low <= c30.fraction_legal <= c30.ci_high
    cs = [pr.calibrate_C(d, 20, 5000, np.random.default_rng(2)).C for d in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(b <= a for a, b in zip(cs, cs[1:]))


def test_calibrated_C_holds_on_fresh_sample():
    c = pr.calibrate_C(0.5, 20, 10**4, np.random.default_rng(3)).C
    fresh = np.random.default_rng(4).exponential(size=(10**4, 20))
    assert np.mean(pr.required_C(fresh) <= c) >= 0.5


def test_bonsai_two_vertices():
    o = WeightOracle(5)
    rep = pr.is_bonsai(PathRecord.from_oracle((0, 1), o), 1.0, 2, o)
    assert rep.bonsai


def test_bonsai_truncation_soundness():
    o = WeightOracle(12)
    for n, C in [(30, 0.5), (50, 1.0), (80, 2.0)]:
        p = PathRecord.from_oracle(range(6), o)
        rep = pr.is_bonsai(p, C, n, o)
        factor = pr.bonsai_height_factor(p, n)
        assert factor * rep.ell_max_used >= n
        assert factor * (rep.ell_max_used - 1) < n


def test_heights_monotone_in_budget():
    for seed in range(100):
        o = WeightOracle(seed)
        budgets = np.sort(np.random.default_rng(seed).exponential(0.1, size=6))
        heights = [spt_restricted(50, 0, o, (0, 1, 2), b).height for b in budgets]
        assert all(b >= a for a, b in zip(heights, heights[1:]))


def _reference_bonsai(path, C, n, oracle):
    # mean-n scale weights end to end, trees from scipy
    w = oracle.matrix(n) * n
    w1 = oracle.with_layer(1).matrix(n) * n
    vs = path.vertices
    for a, b in zip(vs[:-1], vs[1:]):
        w[a, b] = w[b, a] = w1[a, b]
    k, wp = path.k, path.weight * n
    factor = 9 * k / (10 * wp)
    for idx, v in enumerate(vs):
        m = min(idx, k - idx)
        dist, pred = sp_dijkstra(w, directed=False, indices=v, return_predecessors=True)
        depth = np.zeros(n, dtype=int)
        for u in np.argsort(dist)[1:]:
            depth[u] = depth[pred[u]] + 1
        ell = max(math.ceil(m / 40), 1)
        while factor * ell < n:
            budget = ell + 2 * C * math.sqrt(500 * ell * th.loglog(ell))
            if depth[dist <= budget].max() >= factor * ell:
                return False
            ell += 1
    return True


def test_bonsai_matches_mean_n_reference():
    # scale consistency: internal weights with budgets / n agree with mean-n scale weights
    outcomes = []
    rng = np.random.default_rng(6)
    for seed in range(100):
        o = WeightOracle(seed + 1000)
        n, k = 40, 3 + seed % 4
        C = [0.0, 0.02, 0.05, 0.2][seed % 4]
        per_edge = [0.2, 0.4, 0.8, 1.6][(seed // 4) % 4]  # mean-n scale mean edge weight
        xs = rng.exponential(per_edge / n, size=k)
        p = PathRecord.from_edge_weights(range(k + 1), xs)
        got = pr.is_bonsai(p, C, n, o).bonsai
        assert got == _reference_bonsai(p, C, n, o)
        outcomes.append(got)
    assert 0 < sum(outcomes) < 100


def test_bonsai_scale_parameter():
    o = WeightOracle(77)
    p = PathRecord.from_oracle(range(5), o)
    assert pr.bonsai_height_factor(p, 60) == pytest.approx(9 * 4 / (10 * p.weight * 60))
    assert pr.bonsai_height_factor(p, 60, eps_variant=0.1) == pytest.approx(36 / (9 * math.log(60)))
    assert pr.is_bonsai(p, 0.1, 60, o).violations == pr.is_bonsai(p, 0.1, 60, o, scale=60.0).violations


def test_intersects_once():
    p = (1, 2, 3, 4, 5)
    assert pr.intersects_once(p, p)
    assert not pr.intersects_once(p, (1, 2, 6, 4, 5))
    assert not pr.intersects_once(p, (6, 7, 8, 9, 10))
    assert pr.intersects_once(p, (0, 2, 3, 4, 9))
    with pytest.raises(ValueError):
        pr.intersects_once(p, (1, 2))


def test_local_optimum_n3():
    # with k = 1 no other edge shares an edge with P, so every edge is a local optimum
    o = WeightOracle(1)
    assert all(pr.is_local_optimum(e, 3, o) for e in [(0, 1), (0, 2), (1, 2)])


def test_local_optimum_against_brute_force():
    for seed in range(20):
        o = WeightOracle(seed)
        n, k = 6, 2 + seed % 3
        w = o.matrix(n)
        tab = path_table(n, k)
        wt = w[tab[:, :-1], tab[:, 1:]].sum(axis=1)
        best = tuple(int(v) for v in tab[np.argmin(wt)])
        assert pr.is_local_optimum(best, n, o)
        for row, wr in zip(tab[:40], wt[:40]):
            rivals = [wq for q, wq in zip(tab, wt)
                      if tuple(q) != tuple(row) and pr.intersects_once(tuple(row), tuple(q))]
            assert pr.is_local_optimum(tuple(row), n, o) == all(wq > wr for wq in rivals)
    with pytest.raises(EnumerationLimitError):
        pr.is_local_optimum((0, 1), 10, WeightOracle(0))


def test_key_lemma_filters():
    res = pr.verify_key_lemma(6, 5, 1.0, master_seed=3)
    assert res.candidates >= res.legal >= res.legal_and_bonsai
    small = pr.verify_key_lemma(6, 5, 0.3, master_seed=3)
    assert small.legal <= res.legal
    for ce in res.counterexamples:
        assert ce.rival_weight <= ce.weight
    with pytest.raises(EnumerationLimitError):
        pr.verify_key_lemma(9, 1, 1.0)


def test_key_lemma_counterexample_is_genuine():
    # recheck one counterexample from scratch with scipy and the raw oracle
    res = pr.verify_key_lemma(7, 50, 1.0, master_seed=0)
    if not res.counterexamples:
        pytest.skip("no counterexample in this sample")
    ce = res.counterexamples[0]
    o = WeightOracle(ce.seed)
    p = PathRecord.from_oracle(ce.path, o)
    q = PathRecord.from_oracle(ce.rival, o)
    k = p.k
    assert p.weight * 7 <= k <= 4 * p.weight * 7
    assert pr.is_legal(p, 1.0).legal
    assert _reference_bonsai(p, 1.0, 7, o)
    assert pr.intersects_once(ce.path, ce.rival) and ce.rival != ce.path
    assert q.weight <= p.weight


@pytest.mark.slow
def test_bonsai_pilot_bounded_below():
    n, eps, trials = 200, 0.1, 1000
    k = math.ceil(th.k_eps(n, eps))
    C = pr.calibrate_C(0.5, k, 10**4, np.random.default_rng(0)).C
    from fpplab.experiments import predicate_survey

    rows = predicate_survey(n, k, C, trials, master_seed=0, eps=eps, eps_variant=True)
    hits = sum(r["bonsai"] for r in rows)
    print(f"bonsai pilot: n={n} k={k} C={C:.4g}: {hits}/{trials}, wilson upper {wilson_upper(hits, trials):.4f}")
    assert hits / trials >= 0.05
