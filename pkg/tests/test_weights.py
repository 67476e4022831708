import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from fpplab.weights import (
    Distribution, EdgeKey, InvalidEdgeError, TrialSeed, WeightOracle, derive_trial_seed,
    edge_weight, edge_weights, exp_inverse_cdf, parse_seed, path_weight, stream_key,
    uniform_draw, uniform_draws,
)

MASK = (1 << 64) - 1


def _mix(z):
    # pure-Python splitmix64 finalizer, written out independently of the module
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _reference_uniform(seed, layer, u, v):
    u, v = min(u, v), max(u, v)
    stream = _mix(seed + 0x9E3779B97F4A7C15 * (layer + 1))
    x = _mix(_mix(stream ^ ((u << 32) | v)) + 0x9E3779B97F4A7C15)
    return ((x >> 11) + 0.5) * 2.0**-53


@pytest.mark.parametrize("seed,layer", [(0, 0), (1, 0), (12345, 1), (MASK, 3)])
def test_matches_documented_recipe(seed, layer):
    oracle = WeightOracle(seed, layer)
    for u, v in [(0, 1), (5, 2), (999, 1000), (2**31, 7)]:
        p = _reference_uniform(seed, layer, u, v)
        assert uniform_draw(oracle, (u, v)) == p
        assert edge_weight(oracle, (u, v)) == -math.log1p(-p)


def test_symmetric_and_deterministic():
    o = WeightOracle(42)
    assert o.weight(3, 9) == o.weight(9, 3) == WeightOracle(42).weight(3, 9)
    assert EdgeKey.of(9, 3) == EdgeKey(3, 9)


def test_invalid_edges():
    with pytest.raises(InvalidEdgeError):
        EdgeKey.of(4, 4)
    with pytest.raises(InvalidEdgeError):
        EdgeKey.of(-1, 2)
    with pytest.raises(InvalidEdgeError):
        edge_weights(WeightOracle(1), [1, 2], [1, 3])


def test_matrix_agrees_with_scalar_api():
    o = WeightOracle(7)
    w = o.matrix(12)
    assert np.allclose(w, w.T) and np.all(np.diag(w) == 0)
    for u, v in [(0, 11), (3, 4), (10, 2)]:
        assert w[u, v] == o.weight(u, v)


def test_matrix_weights_are_exponential():
    w = WeightOracle(2024).matrix(400)
    x = w[np.triu_indices(400, 1)]
    assert abs(x.mean() - 1.0) < 0.02
    assert stats.kstest(x, "expon").pvalue > 1e-3


def test_layers_are_independent_streams():
    a = WeightOracle(5).matrix(200)[np.triu_indices(200, 1)]
    b = WeightOracle(5, layer=1).matrix(200)[np.triu_indices(200, 1)]
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02
    assert stream_key(5, 0) != stream_key(5, 1)


def test_uniform_distribution_and_coupling():
    o = WeightOracle(3)
    u = WeightOracle(3, distribution="uniform")
    c = WeightOracle(3, distribution=Distribution.COUPLED)
    us, vs = np.arange(50), np.arange(50) + 50
    p = uniform_draws(o, us, vs)
    assert np.array_equal(edge_weights(u, us, vs), p)
    # the coupled weight is exactly the inverse CDF of the shared uniform
    assert np.array_equal(edge_weights(c, us, vs), [-math.log1p(-x) for x in p])
    assert np.all((p > 0) & (p < 1))


def test_exp_inverse_cdf():
    assert exp_inverse_cdf(0.0) == 0.0
    assert exp_inverse_cdf(1 - math.exp(-2.5)) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        exp_inverse_cdf(1.0)


def test_path_weight():
    o = WeightOracle(11)
    assert path_weight(o, [4]) == 0.0
    assert path_weight(o, [1, 2, 3]) == pytest.approx(o.weight(1, 2) + o.weight(2, 3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, MASK), st.lists(st.integers(0, 2**40), min_size=2, max_size=30, unique=True))
def test_trial_seeds_are_distinct(master, indices):
    seeds = {derive_trial_seed(master, i) for i in indices}
    assert len(seeds) == len(indices)
    assert TrialSeed(master, indices[0]).derive() == derive_trial_seed(master, indices[0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, MASK))
def test_parse_seed_round_trip(value):
    assert parse_seed(str(value)) == value
    assert parse_seed(hex(value)) == value


def test_parse_seed_rejects_overflow():
    with pytest.raises(ValueError):
        parse_seed(str(1 << 64))
    with pytest.raises(ValueError):
        WeightOracle(-1)


def _million_keys():
    rng = np.random.default_rng(0)
    us = rng.integers(0, 2**31, size=10**6)
    vs = us + 1 + rng.integers(0, 2**20, size=10**6)
    return us, vs


def test_million_draws_uniform_and_mean_one():
    us, vs = _million_keys()
    o = WeightOracle(314)
    p = uniform_draws(o, us, vs)
    assert stats.kstest(p, "uniform").statistic < 1.949 / math.sqrt(len(p))
    assert abs(edge_weights(o, us, vs).mean() - 1.0) < 0.01
    changed = np.mean(uniform_draws(o.with_layer(1), us, vs) != p)
    assert changed >= 0.9999


def test_million_trial_seeds_unique():
    seeds = [derive_trial_seed(99, i) for i in range(10**6)]
    assert len(set(seeds)) == 10**6
