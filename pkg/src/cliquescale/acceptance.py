"""The acceptance checks behind ``cliquescale verify``.

Each criterion function runs a self-contained check with pinned seeds and
tolerances and returns a CriterionResult; the test suite asserts on these
and the CLI prints one line per criterion.  Everything here is desk scale:
seeds are constants so reruns are bit-stable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .cliques import brute_force_count, count_cliques
from .evaluate import clique_prob_mc, clique_prob_quadrature
from .graphs import (SamplerConfig, WeightedGraph, sample_edges_naive,
                     sample_edges_skip, sample_graph_skip)
from .rng import stream
from .slowvary import make_l
from .weights import TailDistribution


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: list = field(default_factory=list)
    runtime: float = 0.0

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} criterion {self.number}: {self.name} [{self.runtime:.1f}s]"


def _timed(fn):
    def wrapper(*args, **kwargs) -> CriterionResult:
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - start
        return res
    return wrapper


GRID_K = (2, 3, 4)
GRID_ALPHA = (2.5, 3.5, 4.5)
GRID_N = (100, 1000, 10000)


@_timed
def criterion_1(mc_samples: int = 1_000_000) -> CriterionResult:
    """Quadrature total vs plain Monte Carlo mean within 3 stderr on the
    (k, alpha, n) grid with l == 1."""
    details = []
    ok = True
    for k in GRID_K:
        for alpha in GRID_ALPHA:
            dist = TailDistribution(alpha)
            for n in GRID_N:
                rep = clique_prob_quadrature(dist, k, n)
                est = clique_prob_mc(dist, k, n, mc_samples,
                                     seed=1_0000 + 97 * k + round(10 * alpha) + n)
                gap = abs(rep.total - est.mean)
                cell_ok = gap <= 3.0 * est.stderr
                ok &= cell_ok
                z = gap / est.stderr if est.stderr > 0 else math.inf
                details.append(
                    f"{'ok ' if cell_ok else 'FAIL'} k={k} alpha={alpha} n={n}: "
                    f"quad={rep.total:.6e} mc={est.mean:.6e} "
                    f"stderr={est.stderr:.2e} z={z:.2f}")
    return CriterionResult(1, "quadrature total within 3 MC stderr on the grid",
                           ok, details)


@_timed
def criterion_2(replicas: int = 500) -> CriterionResult:
    """Mean triangle census over sampled graphs vs C(n,3) * P(K_3)."""
    details = []
    ok = True
    for alpha in (2.5, 3.5):
        dist = TailDistribution(alpha)
        for n in (500, 2000):
            rep = clique_prob_quadrature(dist, 3, n)
            target = comb(n, 3) * rep.total
            counts = np.empty(replicas)
            for r in range(replicas):
                g = sample_graph_skip(dist, SamplerConfig(
                    n=n, seed=20_000 + 1000 * round(alpha * 10) + 17 * n + r))
                counts[r] = count_cliques(g, 3).count
            stderr = counts.std(ddof=1) / math.sqrt(replicas)
            sigma = math.hypot(stderr, comb(n, 3) * rep.max_term_error)
            gap = abs(counts.mean() - target)
            cell_ok = gap <= 4.0 * sigma
            ok &= cell_ok
            details.append(
                f"{'ok ' if cell_ok else 'FAIL'} alpha={alpha} n={n}: "
                f"mean={counts.mean():.3f} target={target:.3f} "
                f"sigma={sigma:.3f} z={gap / sigma:.2f}")
    return CriterionResult(2, "graph-level triangle closure within 4 sigma",
                           ok, details)


@_timed
def criterion_3() -> CriterionResult:
    """Fitted log-log slopes of quadrature P(K_k) against the growth laws."""
    from .asymptotics import scaling_study
    cases = [(3, 2.5, -2.25, 0.15), (3, 4.5, -3.0, 0.10), (4, 2.5, -3.0, 0.20)]
    grid = [10 ** e for e in range(2, 7)]
    details = []
    ok = True
    for k, alpha, target, tol in cases:
        study = scaling_study(TailDistribution(alpha), k, grid,
                              method="quadrature")
        cell_ok = abs(study.fit.slope - target) <= tol
        ok &= cell_ok
        details.append(
            f"{'ok ' if cell_ok else 'FAIL'} k={k} alpha={alpha}: "
            f"slope={study.fit.slope:+.4f} target={target} tol={tol}")
    return CriterionResult(3, "growth-law exponents from quadrature sweeps",
                           ok, details)


@_timed
def criterion_4() -> CriterionResult:
    """Expected 4-clique count strictly decreases when alpha = 3.5."""
    dist = TailDistribution(3.5)
    values = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        rep = clique_prob_quadrature(dist, 4, n)
        values.append(comb(n, 4) * rep.total)
    ok = all(b < a for a, b in zip(values, values[1:]))
    details = [f"A_4 along the grid: " + ", ".join(f"{v:.4g}" for v in values)]
    return CriterionResult(4, "expected 4-clique count decreases for alpha=3.5",
                           ok, details)


@_timed
def criterion_5() -> CriterionResult:
    """k = alpha = 3 with l == 1: P(K_3) tracks n^-3 log(sqrt n)^3."""
    dist = TailDistribution(3.0)
    grid = [10 ** e for e in range(3, 8)]
    ratios = []
    for n in grid:
        rep = clique_prob_quadrature(dist, 3, n)
        ratios.append(rep.total / (n ** -3.0 * math.log(math.sqrt(n)) ** 3))
    last = ratios[-2:]          # the final decade of the grid
    spread = max(last) / min(last) - 1.0
    ok = spread < 0.10
    details = ["ratios: " + ", ".join(f"{r:.5g}" for r in ratios),
               f"last-decade spread {spread:.2%} (< 10% required)"]
    return CriterionResult(5, "integer-alpha poly-log factor for k = alpha = 3",
                           ok, details)


@_timed
def criterion_6() -> CriterionResult:
    """Closed forms of the resonant moment functional Q."""
    details = []
    ok = True
    xs = (math.e, 10.0, 1e3)
    for alpha in (3, 4, 5):
        dist = TailDistribution(float(alpha))
        for x in xs:
            got = dist.q_function(x)
            want = (alpha - 1) * math.log(x)
            err = abs(got - want) / abs(want)
            cell_ok = err <= 1e-8
            ok &= cell_ok
            details.append(f"{'ok ' if cell_ok else 'FAIL'} l=1 alpha={alpha} "
                           f"x={x:g}: rel err {err:.2e}")
        formal = TailDistribution(float(alpha), make_l("log-formal"), formal=True)
        for x in xs:
            got = formal.q_function(x)
            want = (alpha - 1) / 2.0 * math.log(x) ** 2 - math.log(x)
            err = abs(got - want) / max(abs(want), 1.0)
            cell_ok = err <= 1e-8
            ok &= cell_ok
            details.append(f"{'ok ' if cell_ok else 'FAIL'} l=log alpha={alpha} "
                           f"x={x:g}: rel err {err:.2e}")
    return CriterionResult(6, "Q closed forms for l = 1 and formal l = log",
                           ok, details)


@_timed
def criterion_7(instances: int = 500, replicas: int = 10_000,
                pair_count: int = 50) -> CriterionResult:
    """Clique counter vs brute force, and skip vs naive edge marginals."""
    details = []
    rng = stream(7000, "instances")
    mismatches = 0
    for t in range(instances):
        n = int(rng.integers(3, 26))
        p = 0.1 + 0.7 * rng.random()
        pairs = [pr for pr in combinations(range(n), 2) if rng.random() < p]
        g = WeightedGraph(n, np.ones(n),
                          np.array(pairs) if pairs else np.empty((0, 2)))
        for k in (3, 4, 5):
            if count_cliques(g, k).count != brute_force_count(g, k):
                mismatches += 1
    counter_ok = mismatches == 0
    details.append(f"{'ok ' if counter_ok else 'FAIL'} counter vs brute force: "
                   f"{mismatches} mismatches over {instances} graphs x k=3..5")

    # pairwise-marginal equivalence of the two samplers on fixed weights
    n = 300
    dist = TailDistribution(2.5)
    weights = dist.sample(stream(7001, "weights"), n)
    mu = dist.mu
    order = np.argsort(weights)
    anchors = order[np.round(np.linspace(0, n - 1, 11)).astype(int)]
    pairs = [tuple(sorted(map(int, p))) for p in combinations(anchors, 2)]
    pairs = pairs[:pair_count]
    codes = np.sort(np.array([u * n + v for u, v in pairs], dtype=np.int64))
    hits = {"naive": np.zeros(codes.size), "skip": np.zeros(codes.size)}
    for name, sampler in (("naive", sample_edges_naive), ("skip", sample_edges_skip)):
        for r in range(replicas):
            e = sampler(weights, mu, 7100 + r)
            enc = e[:, 0] * n + e[:, 1]
            hits[name] += np.isin(codes, enc)
    worst = 0.0
    marg_ok = True
    for i, (u, v) in enumerate(pairs):
        p1 = hits["naive"][i] / replicas
        p2 = hits["skip"][i] / replicas
        pbar = 0.5 * (p1 + p2)
        sigma = math.sqrt(max(pbar * (1 - pbar), 1e-12) * 2.0 / replicas)
        z = abs(p1 - p2) / sigma
        worst = max(worst, z)
        if z > 4.0:
            marg_ok = False
            details.append(f"FAIL pair ({u},{v}): naive={p1:.4f} skip={p2:.4f} z={z:.2f}")
    details.append(f"{'ok ' if marg_ok else 'FAIL'} sampler marginals: worst z = "
                   f"{worst:.2f} over {len(pairs)} pairs x {replicas} replicas")
    ok = counter_ok and marg_ok
    return CriterionResult(7, "clique counter exactness and sampler equivalence",
                           ok, details)


@_timed
def criterion_8() -> CriterionResult:
    """Report integrity (term identity, ranges) plus low-block dominance."""
    details = []
    ok = True
    for k in (2, 3, 4):
        for alpha in (2.5, 3.0, 4.5):
            for n in (100, 10_000):
                rep = clique_prob_quadrature(TailDistribution(alpha), k, n)
                ident = rep.term_sum() == rep.total
                ranged = (0.0 <= rep.extreme_low <= 1.0
                          and 0.0 <= rep.extreme_high <= 1.0
                          and all(0.0 <= v <= 1.0 for v in rep.intermediate)
                          and 0.0 <= rep.total <= 1.0)
                if not (ident and ranged):
                    ok = False
                    details.append(f"FAIL integrity k={k} alpha={alpha} n={n}")
    details.append("ok  term-sum identity and [0,1] ranges on the integrity grid")
    rep = clique_prob_quadrature(TailDistribution(4.5), 3, 10 ** 6)
    ratio = rep.extreme_low / rep.total
    dom_ok = ratio > 0.9
    ok &= dom_ok
    details.append(f"{'ok ' if dom_ok else 'FAIL'} low-block dominance at n=1e6: "
                   f"extreme_low/total = {ratio:.4f} (> 0.9 required)")
    return CriterionResult(8, "decomposition integrity and low-block dominance",
                           ok, details)


ALL_CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_all(numbers=None) -> list:
    chosen = sorted(numbers) if numbers else sorted(ALL_CRITERIA)
    return [ALL_CRITERIA[i]() for i in chosen]
