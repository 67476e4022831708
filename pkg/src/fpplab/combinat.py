"""Exhaustive small-n oracles: path enumeration and pair-intersection counts.

Conventions
-----------
* A path is a self-avoiding vertex sequence; each undirected path is listed
  once, in the orientation with first vertex < last vertex.
* ``N[(i, j)]`` counts **ordered** pairs ``(P, Q)`` of distinct k-edge paths
  whose shared edges number ``i`` and form ``j`` connected pieces. Shared
  vertices that carry no shared edge are ignored.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numba
import numpy as np

from . import theory

# the number of undirected paths at n = 10, k = 9 (10!/2); every n <= 10 fits
MAX_PATHS = 1_814_400


class EnumerationLimitError(ValueError):
    """Raised when an enumeration would exceed :data:`MAX_PATHS` paths."""


def num_paths(n: int, k: int) -> int:
    """Undirected self-avoiding k-edge paths in K_n: ``(n)_{k+1} / 2``."""
    if not 1 <= k <= n - 1:
        return 0
    return math.perm(n, k + 1) // 2


def _guard(n: int, k: int) -> None:
    if n < 2 or not 1 <= k <= n - 1:
        raise ValueError("need n >= 2 and 1 <= k <= n - 1")
    if num_paths(n, k) > MAX_PATHS:
        raise EnumerationLimitError(
            f"{num_paths(n, k)} paths for n={n}, k={k} exceeds the limit {MAX_PATHS}"
        )


def enumerate_paths(n: int, k: int, orientation: str = "first<last") -> Iterator[tuple[int, ...]]:
    """Every undirected k-edge path of K_n exactly once.

    ``orientation`` picks the representative: ``"first<last"`` (default) or
    ``"last<first"``.
    """
    _guard(n, k)
    if orientation not in ("first<last", "last<first"):
        raise ValueError(f"unknown orientation {orientation!r}")
    keep_first_smaller = orientation == "first<last"
    for p in itertools.permutations(range(n), k + 1):
        if (p[0] < p[-1]) == keep_first_smaller:
            yield p


@lru_cache(maxsize=32)
def path_table(n: int, k: int, orientation: str = "first<last") -> np.ndarray:
    """All paths as a read-only ``(num_paths, k+1)`` integer array."""
    rows = list(enumerate_paths(n, k, orientation))
    table = np.array(rows, dtype=np.int64).reshape(len(rows), k + 1)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class PairIntersectionProfile:
    shared_edges: int
    components: int

    def __post_init__(self) -> None:
        if (self.shared_edges == 0) != (self.components == 0) or self.components > self.shared_edges:
            raise ValueError(f"inconsistent profile ({self.shared_edges}, {self.components})")


def _edge_set(path: Sequence[int]) -> set[tuple[int, int]]:
    return {(min(a, b), max(a, b)) for a, b in zip(path[:-1], path[1:])}


def intersection_profile(p: Sequence[int], q: Sequence[int]) -> PairIntersectionProfile:
    """Shared-edge count and the number of edge-components of ``p ∩ q``.

    The shared edges form a subgraph of ``p``, so its components are the
    maximal runs of consecutive shared edges along ``p``.
    """
    eq = _edge_set(q)
    flags = [(min(a, b), max(a, b)) in eq for a, b in zip(p[:-1], p[1:])]
    i = sum(flags)
    j = sum(1 for t, f in enumerate(flags) if f and (t == 0 or not flags[t - 1]))
    return PairIntersectionProfile(i, j)


def _profiles_against(p: np.ndarray, table: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(i, j, shares_vertex) of ``p`` against every row of ``table``."""
    qa = np.minimum(table[:, :-1], table[:, 1:])
    qb = np.maximum(table[:, :-1], table[:, 1:])
    k = p.shape[0] - 1
    i = np.zeros(table.shape[0], dtype=np.int64)
    j = np.zeros(table.shape[0], dtype=np.int64)
    prev = np.zeros(table.shape[0], dtype=bool)
    for t in range(k):
        a, b = min(p[t], p[t + 1]), max(p[t], p[t + 1])
        cur = np.any((qa == a) & (qb == b), axis=1)
        i += cur
        j += cur & ~prev
        prev = cur
    shares_vertex = np.isin(table, p).any(axis=1)
    return i, j, shares_vertex


@dataclass
class PairCountTable:
    n: int
    k: int
    counts: dict[tuple[int, int], int]
    vertex_disjoint: int = 0
    vertex_only: int = 0  # share a vertex but no edge
    total_ordered: int = 0
    method: str = field(default="exhaustive")

    def get(self, i: int, j: int) -> int:
        return self.counts.get((i, j), 0)

    def vanishing_rule_violations(self) -> list[tuple[int, int, int]]:
        """Entries with ``k < i + 2j - 2`` yet a nonzero count."""
        return [(i, j, c) for (i, j), c in sorted(self.counts.items())
                if c > 0 and self.k < i + 2 * j - 2]

    def rows(self) -> list[dict]:
        out = []
        for i in range(1, self.k + 1):
            for j in range(1, i + 1):
                out.append({
                    "n": self.n, "k": self.k, "i": i, "j": j,
                    "count": self.get(i, j),
                    "formula_bound": counting_formula_upper(self.n, self.k, i, j),
                    "lemma_bound": theory.pair_count_bound(self.n, self.k, i, j),
                })
        return out


def count_pairs(n: int, k: int, method: str = "auto") -> PairCountTable:
    """Exact ``N_{k,i,j}`` over ordered pairs of distinct k-edge paths.

    ``"exhaustive"`` loops over every P; ``"symmetric"`` profiles one fixed P
    and multiplies by the number of paths (K_n is path-transitive). ``"auto"``
    uses exhaustive up to 5000 paths.
    """
    _guard(n, k)
    table = path_table(n, k)
    npaths = table.shape[0]
    if method == "auto":
        method = "exhaustive" if npaths <= 5000 else "symmetric"
    if method == "symmetric":
        sources = table[:1]
        mult = npaths
    elif method == "exhaustive":
        sources = table
        mult = 1
    else:
        raise ValueError(f"unknown method {method!r}")
    counts: Counter = Counter()
    vdis = vonly = 0
    for idx, p in enumerate(sources):
        i, j, sv = _profiles_against(p, table)
        i[idx] = -1  # drop Q == P
        keep = i >= 1
        pairs, freq = np.unique(np.stack([i[keep], j[keep]], axis=1), axis=0, return_counts=True)
        for (a, b), c in zip(pairs, freq):
            counts[(int(a), int(b))] += int(c) * mult
        zero = i == 0
        vonly += int(np.sum(zero & sv)) * mult
        vdis += int(np.sum(zero & ~sv)) * mult
    return PairCountTable(
        n=n, k=k, counts=dict(counts), vertex_disjoint=vdis, vertex_only=vonly,
        total_ordered=npaths * (npaths - 1), method=method,
    )


def _binom(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def counting_formula_upper(n: int, k: int, i: int, j: int) -> int:
    """Product of the two intermediate counts used to bound ``N_{k,i,j}``.

    Choices of P with its shared pieces marked,
    ``C(n,k+1)(k+1)! C(i+j,j) C(k-i+1,j)``, times choices of Q,
    ``j! C(n-i-j,k+1-i-j)(k+1-i-j)! C(k-i-j+1,j)``. Undefined binomials
    count as 0.
    """
    if k + 1 - i - j < 0:
        return 0
    p_side = _binom(n, k + 1) * math.factorial(k + 1) * _binom(i + j, j) * _binom(k - i + 1, j)
    q_side = (math.factorial(j) * _binom(n - i - j, k + 1 - i - j)
              * math.factorial(k + 1 - i - j) * _binom(k - i - j + 1, j))
    return p_side * q_side


@dataclass
class DeltaTable:
    n: int
    k: int
    eps: float
    contributions: dict[tuple[int, int], float]
    expectation: float

    @property
    def total(self) -> float:
        return sum(self.contributions.values())

    @property
    def total_j1(self) -> float:
        return sum(v for (i, j), v in self.contributions.items() if j == 1)

    @property
    def total_j2plus(self) -> float:
        return sum(v for (i, j), v in self.contributions.items() if j >= 2)

    @property
    def ratio_j2plus(self) -> float:
        return self.total_j2plus / self.expectation**2

    @property
    def reference_rate(self) -> float:
        return self.n**-0.95


def delta_exact_small(n: int, k: int, eps: float) -> DeltaTable:
    """Exact ``Delta_{i,j} = N_{k,i,j} * q(k, i)`` at threshold ``(1-eps) log n``.

    ``q`` depends only on ``(k, i)``: the shared weight is Gamma(i) and the
    two private parts are independent Gamma(k-i).
    """
    pairs = count_pairs(n, k)
    s = theory.light_threshold(n, eps)
    q = {i: theory.joint_weight_exact(k, i, s) for i in range(1, k)}
    contrib = {(i, j): c * q[i] for (i, j), c in pairs.counts.items() if i < k}
    expectation = theory.expected_light_paths_exact(n, k, eps).exact
    return DeltaTable(n, k, eps, contrib, expectation)


# --------------------------------------------------------------------------
# light paths in a concrete weight matrix


@numba.njit(cache=True)
def _light_dfs(w, k, s, out, fill):
    """Depth-first search for k-edge paths of weight <= s.

    Counts every path with first < last vertex; when ``fill`` is set, writes
    them into ``out`` (which must be large enough).
    """
    n = w.shape[0]
    path = np.empty(k + 1, dtype=np.int64)
    nxt = np.empty(k + 1, dtype=np.int64)
    acc = np.empty(k + 1, dtype=np.float64)
    used = np.zeros(n, dtype=np.bool_)
    count = 0
    for start in range(n):
        path[0] = start
        acc[0] = 0.0
        used[start] = True
        depth = 0
        nxt[0] = 0
        while depth >= 0:
            if depth == k:
                if path[0] < path[k]:
                    if fill:
                        for t in range(k + 1):
                            out[count, t] = path[t]
                    count += 1
                used[path[depth]] = False
                depth -= 1
                continue
            u = path[depth]
            advanced = False
            while nxt[depth] < n:
                v = nxt[depth]
                nxt[depth] += 1
                if used[v]:
                    continue
                c = acc[depth] + w[u, v]
                if c <= s:
                    path[depth + 1] = v
                    acc[depth + 1] = c
                    used[v] = True
                    nxt[depth + 1] = 0
                    depth += 1
                    advanced = True
                    break
            if not advanced:
                used[path[depth]] = False
                depth -= 1
    return count


def count_light_paths(w: np.ndarray, k: int, s: float) -> int:
    """Number of undirected k-edge paths with weight <= ``s`` in matrix ``w``."""
    dummy = np.empty((0, k + 1), dtype=np.int64)
    return int(_light_dfs(np.ascontiguousarray(w), int(k), float(s), dummy, False))


def light_paths(w: np.ndarray, k: int, s: float) -> np.ndarray:
    """The light paths themselves, one row each (first vertex < last)."""
    w = np.ascontiguousarray(w)
    m = _light_dfs(w, int(k), float(s), np.empty((0, k + 1), dtype=np.int64), False)
    out = np.empty((m, k + 1), dtype=np.int64)
    _light_dfs(w, int(k), float(s), out, True)
    return out


@numba.njit(cache=True)
def _profile(p, q):
    k = p.shape[0] - 1
    i = 0
    j = 0
    prev = False
    for t in range(k):
        a, b = p[t], p[t + 1]
        cur = False
        for r in range(k):
            c, d = q[r], q[r + 1]
            if (a == c and b == d) or (a == d and b == c):
                cur = True
                break
        if cur:
            i += 1
            if not prev:
                j += 1
        prev = cur
    return i, j


@numba.njit(cache=True)
def intersecting_pair_counts(paths):
    """Ordered pairs of distinct rows sharing >= 1 edge, split (j == 1, j >= 2)."""
    m = paths.shape[0]
    one = 0
    many = 0
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            i, j = _profile(paths[a], paths[b])
            if i >= 1:
                if j == 1:
                    one += 1
                else:
                    many += 1
    return one, many
