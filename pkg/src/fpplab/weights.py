"""Lazily evaluated edge weights for the implicit complete graph.

Every weight is a pure function of ``(seed, layer, edge)``: a 64-bit
avalanche finalizer turns the key into a uniform draw, and the inverse
exponential CDF turns that into a mean-1 weight. Nothing is ever
materialized unless a caller asks for a matrix.

Internal weights use the mean-1 scale. A weight of mean ``n`` (the
``Exp(n)`` convention of the hop-count literature) is ``n`` times the value
returned here; the conversion happens in :mod:`fpplab.experiments` only.

Construction of a draw (all arithmetic modulo 2**64)::

    stream = mix64(seed + GOLDEN * (layer + 1))
    x      = mix64(mix64(stream ^ ((u << 32) | v)) + GOLDEN)      # u < v
    draw   = ((x >> 11) + 0.5) * 2**-53

with ``mix64`` the splitmix64 finalizer (shift-xor-multiply, constants
0xBF58476D1CE4E5B9 / 0x94D049BB133111EB). Third parties can regenerate any
weight table from this recipe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# numba promotes uint64 (op) int64 to float64, so every constant is typed.
_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 2.0**-53

MAX_VERTICES = 1 << 32


class InvalidEdgeError(ValueError):
    """Raised for self-loops or vertex indices outside ``[0, 2**32)``."""


class Distribution(enum.IntEnum):
    EXPONENTIAL = 0
    UNIFORM = 1
    COUPLED = 2

    @classmethod
    def parse(cls, name: str | "Distribution") -> "Distribution":
        if isinstance(name, Distribution):
            return name
        aliases = {
            "exponential": cls.EXPONENTIAL,
            "exp": cls.EXPONENTIAL,
            "uniform": cls.UNIFORM,
            "coupled": cls.COUPLED,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown distribution {name!r}") from None


class EdgeKey(NamedTuple):
    u: int
    v: int

    @classmethod
    def of(cls, a: int, b: int) -> "EdgeKey":
        """Canonical key with ``u < v``; ``EdgeKey.of(a, b) == EdgeKey.of(b, a)``."""
        a, b = int(a), int(b)
        if a == b:
            raise InvalidEdgeError(f"self-loop ({a}, {a}) is not an edge of K_n")
        if a < 0 or b < 0 or a >= MAX_VERTICES or b >= MAX_VERTICES:
            raise InvalidEdgeError(f"vertex index out of range in ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)


@dataclass(frozen=True)
class WeightOracle:
    """Pure map ``(seed, layer, edge) -> weight``.

    Layer 0 holds the base weights; layer 1 holds the independent copies
    used on a fixed path's edges (the graph ``K_n^P``).
    """

    seed: int
    layer: int = 0
    distribution: Distribution = Distribution.EXPONENTIAL

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) <= MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.layer < 0:
            raise ValueError("layer must be non-negative")
        object.__setattr__(self, "distribution", Distribution.parse(self.distribution))

    def with_layer(self, layer: int) -> "WeightOracle":
        return WeightOracle(self.seed, layer, self.distribution)

    def with_distribution(self, distribution: Distribution | str) -> "WeightOracle":
        return WeightOracle(self.seed, self.layer, Distribution.parse(distribution))

    @property
    def stream(self) -> np.uint64:
        return stream_key(self.seed, self.layer)

    @property
    def code(self) -> int:
        return int(self.distribution)

    def weight(self, a: int, b: int) -> float:
        return edge_weight(self, EdgeKey.of(a, b))

    def matrix(self, n: int) -> np.ndarray:
        """Dense symmetric ``n x n`` weight matrix (zero diagonal)."""
        return weight_matrix(n, self.stream, self.code)


# --------------------------------------------------------------------------
# numba kernels; shared by every module that needs weights inside a loop


@numba.njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@numba.njit(cache=True)
def _stream_key(seed, layer):
    return mix64(seed + _U_GOLDEN * (layer + _ONE))


@numba.njit(cache=True, inline="always")
def uniform_bits(stream, u, v):
    # caller guarantees u < v
    key = (np.uint64(u) << _S32) | np.uint64(v)
    return mix64(mix64(stream ^ key) + _U_GOLDEN)


@numba.njit(cache=True, inline="always")
def uniform_at(stream, u, v):
    if u > v:
        u, v = v, u
    x = uniform_bits(stream, u, v)
    return (np.float64(x >> _S11) + 0.5) * _TWO_M53


@numba.njit(cache=True, inline="always")
def weight_at(stream, code, u, v):
    """Weight of edge {u, v}; ``code`` is a :class:`Distribution` value."""
    p = uniform_at(stream, u, v)
    if code == 1:
        return p
    return -math.log1p(-p)


@numba.njit(cache=True)
def _uniform_many(stream, us, vs):
    out = np.empty(us.shape[0], dtype=np.float64)
    for t in range(us.shape[0]):
        out[t] = uniform_at(stream, us[t], vs[t])
    return out


@numba.njit(cache=True)
def _weight_many(stream, code, us, vs):
    out = np.empty(us.shape[0], dtype=np.float64)
    for t in range(us.shape[0]):
        out[t] = weight_at(stream, code, us[t], vs[t])
    return out


@numba.njit(cache=True)
def _weight_matrix(n, stream, code):
    w = np.zeros((n, n), dtype=np.float64)
    for u in range(n):
        for v in range(u + 1, n):
            x = weight_at(stream, code, u, v)
            w[u, v] = x
            w[v, u] = x
    return w


def stream_key(seed: int, layer: int) -> np.uint64:
    # numba boxes uint64 results as Python int; re-wrap so kernels see uint64
    return np.uint64(_stream_key(np.uint64(int(seed) & MASK64), np.uint64(layer)))


def weight_matrix(n: int, stream: np.uint64, code: int) -> np.ndarray:
    return _weight_matrix(int(n), np.uint64(stream), int(code))


# --------------------------------------------------------------------------
# public scalar/array API


def _as_key(key) -> EdgeKey:
    if isinstance(key, EdgeKey):
        if key.u >= key.v:
            return EdgeKey.of(key.u, key.v)
        return key
    a, b = key
    return EdgeKey.of(a, b)


def uniform_draw(oracle: WeightOracle, key) -> float:
    """Uniform in (0, 1) attached to ``key``; symmetric in the endpoints."""
    k = _as_key(key)
    return float(uniform_at(oracle.stream, np.int64(k.u), np.int64(k.v)))


def exp_inverse_cdf(p: float) -> float:
    """Inverse of ``F(t) = 1 - exp(-t)``; maps 0 to 0."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    return -math.log1p(-p)


def edge_weight(oracle: WeightOracle, key) -> float:
    p = uniform_draw(oracle, key)
    if oracle.distribution is Distribution.UNIFORM:
        return p
    return exp_inverse_cdf(p)


def _check_pairs(us: np.ndarray, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if us.shape != vs.shape or us.ndim != 1:
        raise ValueError("endpoint arrays must be 1-d and of equal length")
    if np.any(us == vs):
        raise InvalidEdgeError("self-loop in endpoint arrays")
    if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= MAX_VERTICES):
        raise InvalidEdgeError("vertex index out of range")
    return us, vs


def uniform_draws(oracle: WeightOracle, us, vs) -> np.ndarray:
    us, vs = _check_pairs(us, vs)
    return _uniform_many(oracle.stream, us, vs)


def edge_weights(oracle: WeightOracle, us, vs) -> np.ndarray:
    us, vs = _check_pairs(us, vs)
    return _weight_many(oracle.stream, oracle.code, us, vs)


def path_weight(oracle: WeightOracle, vertices) -> float:
    vs = np.asarray(vertices, dtype=np.int64)
    if vs.size < 2:
        return 0.0
    return float(edge_weights(oracle, vs[:-1], vs[1:]).sum())


# --------------------------------------------------------------------------
# trial seeds


@numba.njit(cache=True)
def _derive(master, index):
    return mix64(mix64(master) ^ mix64(index + _U_GOLDEN))


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial 64-bit seed; a bijection of ``trial_index`` for fixed master."""
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    return int(_derive(np.uint64(int(master_seed) & MASK64), np.uint64(trial_index)))


@dataclass(frozen=True)
class TrialSeed:
    master_seed: int
    trial_index: int

    def derive(self) -> int:
        return derive_trial_seed(self.master_seed, self.trial_index)


def parse_seed(text: str | int) -> int:
    """Accept ``'12345'`` or ``'0x3039'``; result must fit in 64 unsigned bits."""
    if isinstance(text, int):
        value = text
    else:
        s = text.strip().lower()
        value = int(s, 16) if s.startswith("0x") else int(s, 10)
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed {text!r} does not fit in 64 unsigned bits")
    return value
