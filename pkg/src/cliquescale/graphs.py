"""Inhomogeneous random graphs with product-form edge probabilities.

Nodes get i.i.d. weights from a TailDistribution; an unordered pair (i, j)
is wired independently with probability min{h_i h_j / (mu n), 1}.  Two exact
samplers are provided:

* naive   - one Bernoulli test per pair, row by row.  Simple enough to serve
            as the distributional oracle; fine up to n ~ 1e4.
* skip    - nodes sorted by descending weight; within a row the current pair
            probability bounds every later pair, so geometric jumps skip the
            misses and each jump is accepted with ratio actual/bound.  Exact,
            expected O(n + m) work, required for scaling sweeps.

Weights come from stream (seed, "weights"); the naive sampler gives row i
the substream (seed, "edges") ^ i so row blocks can be generated in any
order or in parallel with bit-identical results.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, ResourceLimitError
from .rng import derive_key, stream, substream
from .weights import TailDistribution

_EDGE_BUDGET = 200_000_000       # edges held in memory at desk scale
_NAIVE_LIMIT = 200_000           # above this, quadratic pair scans are refused


def edge_probability(h_i, h_j, mu: float, n: int):
    """min{h_i h_j / (mu n), 1}; symmetric in the two weights."""
    h_i = np.asarray(h_i, dtype=float)
    h_j = np.asarray(h_j, dtype=float)
    if np.any(h_i < 1.0) or np.any(h_j < 1.0):
        raise ParameterError("weights are >= 1 by construction")
    if not (mu >= 1.0 and n >= 1):
        raise ParameterError("need mu >= 1 and n >= 1")
    out = np.minimum(h_i * h_j / (mu * n), 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SamplerConfig:
    n: int
    seed: int = 0
    method: str = "auto"        # auto | naive | skip

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"node count must be >= 1, got {self.n}")
        if self.method not in ("auto", "naive", "skip"):
            raise ParameterError(f"unknown sampling method {self.method!r}")

    def resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        return "naive" if self.n <= 10_000 else "skip"


@dataclass
class WeightedGraph:
    """One sampled graph: weights per node plus a deduplicated edge set.

    edges is an (m, 2) int array with u < v, lexicographically sorted, which
    makes equality, hashing into files, and round-trips canonical.
    """

    n: int
    weights: np.ndarray
    edges: np.ndarray
    seed: Optional[int] = None
    _adj: Optional[list] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.weights.shape != (self.n,):
            raise ParameterError("need one weight per node")
        if np.any(self.weights < 1.0):
            raise ParameterError("weights are >= 1 by construction")
        if self.edges.size:
            if np.any(self.edges[:, 0] >= self.edges[:, 1]):
                raise ParameterError("edges must satisfy u < v (no self-loops)")
            if np.any(self.edges < 0) or np.any(self.edges >= self.n):
                raise ParameterError("edge endpoint out of range")

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency(self) -> list:
        """Neighbor lists as sorted int arrays (cached; treat as read-only)."""
        if self._adj is None:
            order = np.lexsort((self.edges[:, 1], self.edges[:, 0]))
            e = self.edges[order]
            both_src = np.concatenate([e[:, 0], e[:, 1]])
            both_dst = np.concatenate([e[:, 1], e[:, 0]])
            perm = np.argsort(both_src, kind="stable")
            split = np.searchsorted(both_src[perm], np.arange(1, self.n))
            parts = np.split(both_dst[perm], split)
            self._adj = [np.sort(p) for p in parts]
        return self._adj

    # -- plain-text edge-list format ------------------------------------------

    def write(self, fh, header_lines=()) -> None:
        """Dump as text: comments, 'n <count>', weight lines, edge lines."""
        for line in header_lines:
            fh.write(f"# {line}\n")
        if self.seed is not None:
            fh.write(f"# seed {self.seed}\n")
        fh.write(f"n {self.n}\n")
        for i, w in enumerate(self.weights):
            fh.write(f"w {i} {float(w)!r}\n")
        for u, v in self.edges:
            fh.write(f"{u} {v}\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()

    @classmethod
    def read(cls, fh) -> "WeightedGraph":
        n = None
        seed = None
        weights = None
        src, dst = [], []
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "seed":
                    seed = int(parts[1])
                continue
            parts = line.split()
            if parts[0] == "n":
                n = int(parts[1])
                weights = np.ones(n)
            elif n is None:
                raise ParameterError("graph file must start with an 'n <count>' line")
            elif parts[0] == "w":
                weights[int(parts[1])] = float(parts[2])
            else:
                u, v = int(parts[0]), int(parts[1])
                src.append(u)
                dst.append(v)
        if n is None:
            raise ParameterError("graph file has no 'n <count>' line")
        edges = np.array([src, dst], dtype=np.int64).T if src else np.empty((0, 2), np.int64)
        return cls(n=n, weights=weights, edges=edges, seed=seed)

    @classmethod
    def loads(cls, text: str) -> "WeightedGraph":
        return cls.read(io.StringIO(text))


def _canonical_edges(src, dst) -> np.ndarray:
    if not len(src):
        return np.empty((0, 2), dtype=np.int64)
    e = np.stack([np.asarray(src, np.int64), np.asarray(dst, np.int64)], axis=1)
    e = np.stack([e.min(axis=1), e.max(axis=1)], axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return e[order]


def sample_edges_naive(weights: np.ndarray, mu: float, seed: int) -> np.ndarray:
    """Pairwise Bernoulli pass with per-row substreams; O(n^2) uniforms."""
    n = len(weights)
    if n > _NAIVE_LIMIT:
        raise ResourceLimitError(
            f"naive sampler refuses n={n} (> {_NAIVE_LIMIT}); use method='skip'")
    mun = mu * n
    key = derive_key(seed, "edges")
    src_parts, dst_parts = [], []
    for i in range(n - 1):
        rng = substream(key, i)
        u = rng.random(n - 1 - i)
        p = np.minimum(weights[i] * weights[i + 1:] / mun, 1.0)
        hit = np.nonzero(u < p)[0]
        if hit.size:
            src_parts.append(np.full(hit.size, i, dtype=np.int64))
            dst_parts.append(hit.astype(np.int64) + i + 1)
    if not src_parts:
        return np.empty((0, 2), dtype=np.int64)
    return _canonical_edges(np.concatenate(src_parts), np.concatenate(dst_parts))


def sample_edges_skip(weights: np.ndarray, mu: float, seed: int) -> np.ndarray:
    """Geometric-jump pass over weight-sorted rows; exact and O(n + m).

    Within row i (weights descending) the bound p = p(i, j_current) only
    shrinks as j grows, so the number of misses before the next candidate is
    geometric with that bound, and the candidate is kept with ratio q/p.
    """
    n = len(weights)
    order = np.argsort(-weights, kind="stable")
    w = weights[order]
    mun = mu * n
    key = derive_key(seed, "skip-edges")
    src, dst = [], []
    for i in range(n - 1):
        rng = substream(key, i)
        wi = w[i]
        j = i + 1
        p = min(wi * w[j] / mun, 1.0)
        while j < n:
            if p < 1.0:
                r = 1.0 - rng.random()       # uniform on (0, 1]
                j += int(math.log(r) / math.log1p(-p))
                if j >= n:
                    break
            q = min(wi * w[j] / mun, 1.0)
            if p * rng.random() < q:
                src.append(order[i])
                dst.append(order[j])
            p = q
            j += 1
    return _canonical_edges(src, dst)


def sample_edges(weights: np.ndarray, mu: float, seed: int,
                 method: str = "auto") -> np.ndarray:
    n = len(weights)
    if method == "auto":
        method = "naive" if n <= 10_000 else "skip"
    if method == "naive":
        return sample_edges_naive(weights, mu, seed)
    if method == "skip":
        return sample_edges_skip(weights, mu, seed)
    raise ParameterError(f"unknown sampling method {method!r}")


def _check_edge_budget(dist: TailDistribution, n: int):
    # expected edge count ~ n * E[degree] / 2 with E[degree] <= E[H]
    est = 0.5 * n * dist.mu
    if est > _EDGE_BUDGET:
        raise ResourceLimitError(
            f"expected ~{est:.2e} edges exceeds the in-memory budget "
            f"({_EDGE_BUDGET:.0e}); reduce n or stream edges to disk")


def sample_graph(dist: TailDistribution, config: SamplerConfig) -> WeightedGraph:
    """Weights then edges, all reproducible from config.seed."""
    _check_edge_budget(dist, config.n)
    rng = stream(config.seed, "weights")
    weights = dist.sample(rng, config.n)
    edges = sample_edges(weights, dist.mu, config.seed, config.resolved_method())
    return WeightedGraph(n=config.n, weights=weights, edges=edges, seed=config.seed)


def sample_graph_skip(dist: TailDistribution, config: SamplerConfig) -> WeightedGraph:
    """Same law as sample_graph, forced onto the skip path."""
    _check_edge_budget(dist, config.n)
    rng = stream(config.seed, "weights")
    weights = dist.sample(rng, config.n)
    edges = sample_edges_skip(weights, dist.mu, config.seed)
    return WeightedGraph(n=config.n, weights=weights, edges=edges, seed=config.seed)
