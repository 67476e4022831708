"""Shortest path trees on the implicit complete graph, and the growth process.

Two routes to the same object:

* :func:`dijkstra_spt` runs an exact dense-scan Dijkstra against a
  :class:`~fpplab.weights.WeightOracle` (O(n^2) time, O(n) memory);
* :func:`simulate_growth` samples the tree's law directly: interarrival
  times ``tau_k ~ Exp(rate k(n-k))`` (mean-1 scale) and uniform attachment,
  i.e. a random recursive tree with exponential clocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .weights import WeightOracle, edge_weights, weight_at

NO_PARENT = -1


@dataclass
class ShortestPathTree:
    n: int
    source: int
    parent: np.ndarray
    dist: np.ndarray
    depth: np.ndarray
    order: np.ndarray  # vertices in settling order
    arrival_rank: np.ndarray = field(repr=False)  # -1 for vertices beyond a budget

    @property
    def size(self) -> int:
        return int(self.order.shape[0])

    @property
    def height(self) -> int:
        return int(self.depth[self.order].max())

    def contains(self, v: int) -> bool:
        return bool(self.arrival_rank[v] >= 0)

    def total_weight(self) -> float:
        """Sum of tree-edge weights (mean-1 scale)."""
        inner = self.order[1:]
        return float(np.sum(self.dist[inner] - self.dist[self.parent[inner]]))


@dataclass
class GrowthTrace:
    """Interarrival times and attachment choices of one tree growth.

    ``attach_to[k-1]`` is the parent of the vertex that arrives ``k``-th
    (vertex labels are arrival ranks, the root is 0), uniform on ``[0, k)``.
    """

    n: int
    interarrival: np.ndarray
    attach_to: np.ndarray
    arrival: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.arrival = np.cumsum(self.interarrival)


@dataclass
class PathRecord:
    vertices: tuple[int, ...]
    weight: float
    # per-edge weights in path order, when known
    edge_weights: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(min(a, b), max(a, b)) for a, b in zip(vs[:-1], vs[1:])]

    @classmethod
    def from_oracle(cls, vertices: Sequence[int], oracle: WeightOracle) -> "PathRecord":
        vs = tuple(int(v) for v in vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("path is not self-avoiding")
        if len(vs) < 2:
            return cls(vs, 0.0)
        arr = np.asarray(vs, dtype=np.int64)
        xs = edge_weights(oracle, arr[:-1], arr[1:])
        return cls(vs, float(xs.sum()), xs)

    @classmethod
    def from_edge_weights(cls, vertices: Sequence[int], xs) -> "PathRecord":
        vs = tuple(int(v) for v in vertices)
        xs = np.asarray(xs, dtype=np.float64)
        if xs.shape != (max(len(vs) - 1, 0),):
            raise ValueError("need one weight per edge")
        return cls(vs, float(xs.sum()), xs)


# --------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _override_weight(u, v, ov_u, ov_v, ov_w, fallback):
    a, b = (u, v) if u < v else (v, u)
    for t in range(ov_u.shape[0]):
        if ov_u[t] == a and ov_v[t] == b:
            return ov_w[t]
    return fallback


@numba.njit(cache=True)
def _dense_dijkstra(n, source, stream, code, budget, ov_u, ov_v, ov_w):
    """Dense-scan Dijkstra with lazily computed weights.

    Edges listed in ``(ov_u, ov_v)`` (canonical, u < v) take weight ``ov_w``
    instead of the oracle value. Settling stops once the next distance
    exceeds ``budget``.
    """
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    rank = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    touched = np.zeros(n, dtype=np.bool_)
    for t in range(ov_u.shape[0]):
        touched[ov_u[t]] = True
        touched[ov_v[t]] = True
    # unsettled vertices kept compact; swap-remove on settle
    pending = np.arange(n)
    npend = n
    dist[source] = 0.0
    count = 0
    while npend > 0:
        best = -1
        bd = np.inf
        for t in range(npend):
            d = dist[pending[t]]
            if d < bd or (d == bd and best >= 0 and pending[t] < pending[best]):
                bd = d
                best = t
        if best < 0 or bd > budget:
            break
        u = pending[best]
        npend -= 1
        pending[best] = pending[npend]
        rank[u] = count
        order[count] = u
        count += 1
        du = dist[u]
        for t in range(npend):
            v = pending[t]
            w = weight_at(stream, code, u, v)
            if touched[u] and touched[v]:
                w = _override_weight(u, v, ov_u, ov_v, ov_w, w)
            nd = du + w
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                depth[v] = depth[u] + 1
    return parent, dist, depth, rank, order[:count]


@numba.njit(cache=True)
def _matrix_dijkstra(w, source, parent, dist, depth):
    n = w.shape[0]
    pending = np.arange(n)
    for v in range(n):
        dist[v] = np.inf
        parent[v] = -1
        depth[v] = 0
    dist[source] = 0.0
    npend = n
    while npend > 0:
        best = 0
        bd = dist[pending[0]]
        for t in range(1, npend):
            d = dist[pending[t]]
            if d < bd or (d == bd and pending[t] < pending[best]):
                bd = d
                best = t
        u = pending[best]
        npend -= 1
        pending[best] = pending[npend]
        row = w[u]
        for t in range(npend):
            v = pending[t]
            nd = bd + row[v]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                depth[v] = depth[u] + 1


@numba.njit(cache=True)
def _light_csr(n, stream, code, thresh):
    """Adjacency (CSR) of the edges with weight <= thresh."""
    deg = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            if weight_at(stream, code, u, v) <= thresh:
                deg[u] += 1
                deg[v] += 1
    start = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        start[u + 1] = start[u] + deg[u]
    fill = start[:-1].copy()
    nbr = np.empty(start[n], dtype=np.int64)
    wt = np.empty(start[n], dtype=np.float64)
    for u in range(n):
        for v in range(u + 1, n):
            x = weight_at(stream, code, u, v)
            if x <= thresh:
                nbr[fill[u]] = v
                wt[fill[u]] = x
                fill[u] += 1
                nbr[fill[v]] = u
                wt[fill[v]] = x
                fill[v] += 1
    return start, nbr, wt


@numba.njit(cache=True)
def _heap_push(hd, hv, size, d, v):
    i = size
    hd[i] = d
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] < hd[i] or (hd[p] == hd[i] and hv[p] <= hv[i]):
            break
        hd[p], hd[i] = hd[i], hd[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return size + 1


@numba.njit(cache=True)
def _heap_pop(hd, hv, size):
    d = hd[0]
    v = hv[0]
    size -= 1
    hd[0] = hd[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and (hd[r] < hd[l] or (hd[r] == hd[l] and hv[r] < hv[l])):
            c = r
        if hd[i] < hd[c] or (hd[i] == hd[c] and hv[i] <= hv[c]):
            break
        hd[c], hd[i] = hd[i], hd[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return d, v, size


@numba.njit(cache=True)
def _sparse_all_pairs(n, start, nbr, wt, thresh):
    """Heap Dijkstra from every source over the light-edge graph.

    Returns ``ok=False`` when some distance exceeds ``thresh`` (or a vertex
    is unreachable): only then could a heavier edge matter.
    """
    m = nbr.shape[0]
    dist = np.empty(n)
    depth = np.empty(n, dtype=np.int64)
    pw = np.empty(n)
    done = np.empty(n, dtype=np.bool_)
    hd = np.empty(m + n, dtype=np.float64)
    hv = np.empty(m + n, dtype=np.int64)
    heights = np.zeros(n, dtype=np.int64)
    radii = np.zeros(n)
    hops_12 = 0
    w_12 = 0.0
    tree_w = 0.0
    for s in range(n):
        dist[:] = np.inf
        depth[:] = 0
        pw[:] = 0.0
        done[:] = False
        dist[s] = 0.0
        size = _heap_push(hd, hv, 0, 0.0, s)
        settled = 0
        while size > 0:
            d, u, size = _heap_pop(hd, hv, size)
            if done[u]:
                continue
            done[u] = True
            settled += 1
            if d > thresh:
                return False, heights, radii, hops_12, w_12, tree_w
            if depth[u] > heights[s]:
                heights[s] = depth[u]
            if d > radii[s]:
                radii[s] = d
            for e in range(start[u], start[u + 1]):
                v = nbr[e]
                if done[v]:
                    continue
                nd = d + wt[e]
                if nd < dist[v]:
                    dist[v] = nd
                    depth[v] = depth[u] + 1
                    pw[v] = wt[e]
                    size = _heap_push(hd, hv, size, nd, v)
        if settled < n:
            return False, heights, radii, hops_12, w_12, tree_w
        if s == 0:
            hops_12 = depth[1]
            w_12 = dist[1]
            for v in range(1, n):
                tree_w += pw[v]
    return True, heights, radii, hops_12, w_12, tree_w


@numba.njit(cache=True)
def _depths_from_attach(attach_to):
    m = attach_to.shape[0] + 1
    depth = np.zeros(m, dtype=np.int64)
    for k in range(1, m):
        depth[k] = depth[attach_to[k - 1]] + 1
    return depth


@numba.njit(cache=True)
def _rrt_heights(u):
    """Heights of RRTs with ``u.shape[1] + 1`` nodes; row ``r`` of ``u`` holds
    the uniforms that pick each new node's parent."""
    trials, steps = u.shape
    depth = np.zeros(steps + 1, dtype=np.int64)
    out = np.empty(trials, dtype=np.int64)
    for r in range(trials):
        h = 0
        for k in range(1, steps + 1):
            p = int(u[r, k - 1] * k)
            if p >= k:
                p = k - 1
            d = depth[p] + 1
            depth[k] = d
            if d > h:
                h = d
        out[r] = h
    return out


@numba.njit(cache=True)
def _all_pairs_kernel(w):
    n = w.shape[0]
    parent = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    depth = np.empty(n, dtype=np.int64)
    heights = np.empty(n, dtype=np.int64)
    radii = np.empty(n)
    hops_12 = 0
    w_12 = 0.0
    tree_w = 0.0
    for s in range(n):
        _matrix_dijkstra(w, s, parent, dist, depth)
        heights[s] = depth.max()
        radii[s] = dist.max()
        if s == 0:
            hops_12 = depth[1]
            w_12 = dist[1]
            for v in range(1, n):
                tree_w += w[parent[v], v]
    return heights, radii, hops_12, w_12, tree_w


# --------------------------------------------------------------------------
# public operations


def _empty_overrides():
    return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.float64)


def _build_tree(n, source, parent, dist, depth, rank, order) -> ShortestPathTree:
    return ShortestPathTree(
        n=n, source=source, parent=parent, dist=dist, depth=depth,
        order=order, arrival_rank=rank,
    )


def dijkstra_spt(n: int, source: int, oracle: WeightOracle,
                 budget: float = math.inf, overrides=None) -> ShortestPathTree:
    """Exact single-source shortest path tree in ``K_n`` under ``oracle``.

    ``overrides`` is an optional ``(us, vs, ws)`` triple replacing the
    weights of a few canonical edges.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0 <= source < n:
        raise ValueError("source out of range")
    if overrides is None:
        ov_u, ov_v, ov_w = _empty_overrides()
    else:
        us, vs, ws = overrides
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        ov_u, ov_v = np.minimum(us, vs), np.maximum(us, vs)
        ov_w = np.asarray(ws, dtype=np.float64)
    parent, dist, depth, rank, order = _dense_dijkstra(
        n, source, oracle.stream, oracle.code, float(budget), ov_u, ov_v, ov_w
    )
    return _build_tree(n, source, parent, dist, depth, rank, order)


def resampled_overrides(path: Sequence[int], oracle: WeightOracle, layer: int = 1):
    """Weights of ``path``'s edges drawn from ``layer`` (the graph K_n^P)."""
    vs = np.asarray(path, dtype=np.int64)
    if vs.size < 2:
        return _empty_overrides()
    a, b = vs[:-1], vs[1:]
    ws = edge_weights(oracle.with_layer(layer), a, b)
    return np.minimum(a, b), np.maximum(a, b), ws


def spt_restricted(n: int, source: int, oracle: WeightOracle,
                   forbidden_path: PathRecord | Sequence[int] | None,
                   time_budget: float) -> ShortestPathTree:
    """SPT truncated at ``time_budget`` in K_n^P, P = ``forbidden_path``.

    Edges of the path carry layer-1 weights, everything else layer 0.
    """
    if time_budget < 0:
        raise ValueError("time_budget must be non-negative")
    verts = () if forbidden_path is None else getattr(forbidden_path, "vertices", forbidden_path)
    base = oracle.with_layer(0)
    return dijkstra_spt(n, source, base, budget=time_budget,
                        overrides=resampled_overrides(verts, base))


def simulate_growth(n: int, rng: np.random.Generator, steps: int | None = None) -> GrowthTrace:
    """Sample the SPT growth process in mean-1 scale.

    ``steps`` limits the trace to the first ``steps`` arrivals (default n-1).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    steps = n - 1 if steps is None else min(int(steps), n - 1)
    k = np.arange(1, steps + 1, dtype=np.float64)
    tau = rng.standard_exponential(steps) / (k * (n - k))
    attach = np.floor(rng.random(steps) * k).astype(np.int64)
    np.minimum(attach, k.astype(np.int64) - 1, out=attach)
    return GrowthTrace(n=n, interarrival=tau, attach_to=attach)


def growth_arrivals(n: int, steps: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """``trials x steps`` matrix of arrival times ``t_1..t_steps`` (mean-1 scale).

    Attachment is irrelevant for tree sizes, so only clocks are drawn.
    """
    steps = min(int(steps), n - 1)
    k = np.arange(1, steps + 1, dtype=np.float64)
    rate = k * (n - k)
    tau = rng.standard_exponential((trials, steps))
    tau /= rate
    return np.cumsum(tau, axis=1)


def size_at_time(trace: GrowthTrace, t: float) -> int:
    """``|SPT(t)|`` for a growth trace."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return 1 + int(np.searchsorted(trace.arrival, t, side="right"))


def height_and_depths(tree) -> tuple[int, np.ndarray]:
    """Height and per-vertex depths of a :class:`GrowthTrace` or tree."""
    if isinstance(tree, GrowthTrace):
        depth = _depths_from_attach(np.ascontiguousarray(tree.attach_to, dtype=np.int64))
        return int(depth.max()), depth
    if isinstance(tree, ShortestPathTree):
        depth = tree.depth[tree.order]
        return int(depth.max()), depth
    # bare parent array, -1 marking the root; parents precede children
    parent = np.asarray(tree, dtype=np.int64)
    depth = np.zeros(parent.shape[0], dtype=np.int64)
    for v in range(parent.shape[0]):
        if parent[v] >= 0:
            depth[v] = depth[parent[v]] + 1
    return int(depth.max()), depth


def rrt_heights(m: int, trials: int, rng: np.random.Generator, chunk: int = 64) -> np.ndarray:
    """Heights of ``trials`` independent random recursive trees on ``m`` nodes."""
    if m < 1:
        raise ValueError("need m >= 1")
    out = np.empty(trials, dtype=np.int64)
    for lo in range(0, trials, chunk):
        hi = min(trials, lo + chunk)
        out[lo:hi] = _rrt_heights(rng.random((hi - lo, m - 1)))
    return out


@dataclass
class AllPairsStats:
    n: int
    hops_12: int
    max_hops_from_1: int
    max_hops_all_pairs: int
    w_12: float  # mean-1 scale throughout
    max_w_from_1: float
    max_w_all_pairs: float
    spt1_total_weight: float


def all_pairs_hop_stats(n: int, oracle: WeightOracle, dense: bool = False) -> AllPairsStats:
    """Hop and weight extremes over all sources (vertex 0 plays "1", 1 plays "2").

    By default only edges of weight <= T enter the search, T starting at
    4 log(n)/n. Every shortest path of weight <= T uses such edges only, so
    when all n^2 distances come out <= T the answer is exact; otherwise T
    doubles and the search reruns. ``dense=True`` runs the plain O(n^3)
    matrix Dijkstra instead (reference route for tests).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if dense:
        w = oracle.matrix(n)
        heights, radii, hops_12, w_12, tree_w = _all_pairs_kernel(w)
    else:
        stream, code = oracle.stream, oracle.code
        thresh = 4.0 * max(math.log(n), 1.0) / n
        while True:
            start, nbr, wt = _light_csr(n, stream, code, thresh)
            ok, heights, radii, hops_12, w_12, tree_w = _sparse_all_pairs(n, start, nbr, wt, thresh)
            if ok:
                break
            thresh *= 2.0
    return AllPairsStats(
        n=n,
        hops_12=int(hops_12),
        max_hops_from_1=int(heights[0]),
        max_hops_all_pairs=int(heights.max()),
        w_12=float(w_12),
        max_w_from_1=float(radii[0]),
        max_w_all_pairs=float(radii.max()),
        spt1_total_weight=float(tree_w),
    )


def extract_path(tree: ShortestPathTree, j: int) -> PathRecord:
    """Tree path from the source to ``j``; the source itself gives the empty path."""
    if not 0 <= j < tree.n:
        raise ValueError("vertex out of range")
    if not tree.contains(j):
        raise ValueError(f"vertex {j} is not in the (truncated) tree")
    if j == tree.source:
        return PathRecord((), 0.0)
    chain = [j]
    while chain[-1] != tree.source:
        chain.append(int(tree.parent[chain[-1]]))
    chain.reverse()
    d = tree.dist[np.asarray(chain)]
    return PathRecord(tuple(chain), float(tree.dist[j]), np.diff(d))
