"""Exact clique counting plus the oracles used to cross-check it.

count_cliques orders vertices by degeneracy (iterated minimum degree, ties
by node id), orients every edge from earlier to later, and counts complete
subgraphs by intersecting forward-neighbor lists.  Each clique is counted
exactly once, at its order-minimal vertex, and memory stays O(n + m + k).

brute_force_count enumerates k-subsets outright and is the correctness
oracle at small n; expected_cliques_given_weights sums the product of pair
probabilities over all k-subsets, the conditional mean of the count when
only the edge coin flips are resampled.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from itertools import combinations
from math import comb, prod
from typing import Optional

import numpy as np

from .errors import ParameterError, ResourceLimitError
from .graphs import WeightedGraph

MAX_CLIQUE_SIZE = 12
_BRUTE_BUDGET = 10_000_000


@dataclass(frozen=True)
class CliqueCensus:
    k: int
    count: int
    graph_seed: Optional[int]
    runtime: float


def degeneracy_order(adj: list) -> np.ndarray:
    """Vertices by iterated minimum degree; ties broken by node id."""
    n = len(adj)
    deg = np.array([len(a) for a in adj], dtype=np.int64)
    heap = [(int(deg[v]), v) for v in range(n)]
    heapq.heapify(heap)
    removed = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    pos = 0
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        order[pos] = v
        pos += 1
        for u in adj[v]:
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(heap, (int(deg[u]), int(u)))
    return order


def _forward_lists(graph: WeightedGraph) -> list:
    adj = graph.adjacency()
    order = degeneracy_order(adj)
    pos = np.empty(graph.n, dtype=np.int64)
    pos[order] = np.arange(graph.n)
    fwd = [None] * graph.n
    for p in range(graph.n):
        v = order[p]
        nb = pos[adj[v]]
        fwd[p] = np.sort(nb[nb > p])
    return fwd


def _count_within(fwd: list, cands: np.ndarray, depth: int) -> int:
    """depth-cliques lying entirely inside cands (positions, sorted)."""
    if depth == 1:
        return len(cands)
    if depth == 2:
        return sum(np.intersect1d(fwd[u], cands, assume_unique=True).size
                   for u in cands)
    total = 0
    for idx in range(len(cands) - depth + 1):
        u = cands[idx]
        sub = np.intersect1d(fwd[u], cands, assume_unique=True)
        if sub.size >= depth - 1:
            total += _count_within(fwd, sub, depth - 1)
    return total


def count_cliques(graph: WeightedGraph, k: int) -> CliqueCensus:
    """Exact number of k-vertex complete subgraphs."""
    if k < 1:
        raise ParameterError(f"clique size must be >= 1, got {k}")
    if k > MAX_CLIQUE_SIZE:
        raise ParameterError(
            f"clique size {k} exceeds the supported cap {MAX_CLIQUE_SIZE}")
    start = time.perf_counter()
    if k > graph.n:
        count = 0
    elif k == 1:
        count = graph.n
    elif k == 2:
        count = graph.num_edges
    else:
        fwd = _forward_lists(graph)
        count = 0
        for p in range(graph.n):
            if fwd[p].size >= k - 1:
                count += _count_within(fwd, fwd[p], k - 1)
    return CliqueCensus(k=k, count=count, graph_seed=graph.seed,
                        runtime=time.perf_counter() - start)


def brute_force_count(graph: WeightedGraph, k: int) -> int:
    """Subset-enumeration oracle: checks every k-subset pair by pair."""
    if k < 1:
        raise ParameterError(f"clique size must be >= 1, got {k}")
    if k > graph.n:
        return 0
    if comb(graph.n, k) > _BRUTE_BUDGET:
        raise ResourceLimitError(
            f"C({graph.n}, {k}) subsets exceed the enumeration budget")
    if k == 1:
        return graph.n
    edge_set = {(int(u), int(v)) for u, v in graph.edges}
    count = 0
    for subset in combinations(range(graph.n), k):
        if all(pair in edge_set for pair in combinations(subset, 2)):
            count += 1
    return count


def expected_cliques_given_weights(weights, mu: float, n: int, k: int) -> float:
    """Sum over k-subsets of the product of pair probabilities.

    Equals the conditional expectation of the k-clique count when the
    weights are held fixed and only edges are resampled.
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != n:
        raise ParameterError("need one weight per node")
    if k < 1:
        raise ParameterError(f"clique size must be >= 1, got {k}")
    if k > n:
        return 0.0
    if comb(n, k) > _BRUTE_BUDGET:
        raise ResourceLimitError(
            f"C({n}, {k}) subsets exceed the enumeration budget")
    pmat = np.minimum(np.outer(weights, weights) / (mu * n), 1.0)
    total = 0.0
    for subset in combinations(range(n), k):
        total += prod(pmat[i, j] for i, j in combinations(subset, 2))
    return total
