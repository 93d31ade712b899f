"""Exact clique probability for a k-set of nodes, two independent ways.

Writing c = sqrt(mu n) for the weight cutoff at which pair probabilities
saturate, the probability that k tagged nodes form a clique splits by how
many weights fall below c:

    P(K_k) = (all below)  +  sum_m C(k, m) I_m  +  (all above),

      all above = Fbar(c)^k                       (every pair is certain)
      all below = (mu n)^(-k(k-1)/2) * (int_1^c h^(k-1) dF)^k
      I_m       = P(clique, exactly the first m weights <= c)

Conditioned on the m low weights, the k-m high nodes are exchangeable and
independent, each contributing one factor of the inner integral

    inner(h_1..h_m) = int_c^inf prod_i min{h_i h_j/(mu n), 1} dF(h_j),

which expands exactly over the breakpoints mu*n/h_i into moment integrals
plus a far-tail term.  I_m then reduces to an m-dimensional integral over
the ordered block 1 <= h_m <= ... <= h_1 <= c, evaluated here by an
adaptive outer pass over h_1 with fixed log-panel tensor rules for the
inner dimensions (the integrand is smooth on the ordered block).  The
independent cross-check is direct Monte Carlo over weight draws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Optional

import numpy as np

from .errors import ConvergenceWarning, ParameterError
from .quadrature import adaptive_quad
from .rng import derive_key, substream
from .weights import TailDistribution

_TENSOR_ORDER = 12          # Gauss order for the fixed inner dimensions
_TENSOR_PPD = 3             # log panels per decade for the fixed dimensions
_BATCH_ROWS = 1_000_000     # chunk size for inner-integral batches


# ---------------------------------------------------------------------------
# report types


@dataclass
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


@dataclass
class DecompositionReport:
    """Per-term values of the conditioning split of P(K_k)_.

    total is literally extreme_low + sum_m C(k,m) I_m + extreme_high as
    floating-point sums; log10_terms carries the same information in logs
    for regimes where the linear values underflow.
    """

    k: int
    n: int
    alpha: float
    l_name: str
    mu: float
    extreme_low: float
    intermediate: list
    binomial_weights: list
    extreme_high: float
    total: float
    term_errors: list = field(default_factory=list)
    max_term_error: float = 0.0
    resonant_terms: list = field(default_factory=list)
    term_methods: list = field(default_factory=list)
    log10_terms: dict = field(default_factory=dict)

    def term_sum(self) -> float:
        return (self.extreme_low
                + sum(w * v for w, v in zip(self.binomial_weights, self.intermediate))
                + self.extreme_high)

    CSV_INTERMEDIATE_COLUMNS = 8

    @classmethod
    def csv_header(cls) -> str:
        cols = (["k", "n", "alpha", "l_name", "extreme_low"]
                + [f"I_{m}" for m in range(1, cls.CSV_INTERMEDIATE_COLUMNS + 1)]
                + ["extreme_high", "total", "max_term_error"])
        return ",".join(cols)

    def csv_row(self) -> str:
        pad = self.CSV_INTERMEDIATE_COLUMNS
        if len(self.intermediate) > pad:
            raise ParameterError(
                f"CSV schema holds {pad} intermediate columns; k={self.k} needs "
                f"{len(self.intermediate)}")
        ivals = [repr(float(v)) for v in self.intermediate]
        ivals += [""] * (pad - len(ivals))
        cells = ([str(self.k), str(self.n), repr(self.alpha), self.l_name,
                  repr(float(self.extreme_low))] + ivals
                 + [repr(float(self.extreme_high)), repr(float(self.total)),
                    repr(float(self.max_term_error))])
        return ",".join(cells)


@dataclass(frozen=True)
class InnerIntegrandContext:
    """Ordered low-weight block feeding the inner integral.

    weights are h_1 >= h_2 >= ... >= h_m, all within [1, sqrt(mu n)]; the
    cutoff itself acts as h_0.
    """

    weights: tuple
    n: int
    mu: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ParameterError("need at least one ordered weight")
        cut = math.sqrt(self.mu * self.n)
        if np.any(np.diff(w) > 1e-12):
            raise ParameterError("weights must be nonincreasing")
        if w[0] > cut * (1 + 1e-12) or w[-1] < 1.0:
            raise ParameterError(
                f"weights must lie in [1, sqrt(mu n)] = [1, {cut:.6g}]")

    @property
    def m(self) -> int:
        return len(self.weights)


# ---------------------------------------------------------------------------
# inner integral over the high-weight node


def _inner_batch(dist: TailDistribution, H: np.ndarray, n: int) -> np.ndarray:
    """inner(h_1..h_m) for rows of H (each row sorted descending)."""
    mun = dist.mu * n
    cut = math.sqrt(mun)
    m = H.shape[1]
    # suffix products prod_{i>=s} h_i, s = 1..m
    suffix = np.cumprod(H[:, ::-1], axis=1)[:, ::-1]
    out = dist.tail(np.maximum(mun / H[:, -1], 1.0))
    for s in range(1, m + 1):
        a = mun / (cut if s == 1 else H[:, s - 2])
        b = mun / H[:, s - 1]
        beta = m - s + 1
        out = out + mun ** (-beta) * suffix[:, s - 1] * dist.moment_batch(beta, a, b)
    return out


def inner_integral(ctx: InnerIntegrandContext, dist: TailDistribution) -> float:
    """int_c^inf prod_i min{h_i h_j/(mu n), 1} dF(h_j), exactly expanded."""
    H = np.asarray(ctx.weights, dtype=float)[None, :]
    return float(_inner_batch(dist, H, ctx.n)[0])


# ---------------------------------------------------------------------------
# extreme terms


def extreme_high_term(dist: TailDistribution, k: int, n: int) -> float:
    """All k weights above the cutoff: every edge certain, Fbar(cutoff)^k."""
    if k < 2:
        raise ParameterError("extreme terms are defined for k >= 2")
    return float(dist.tail(dist.cutoff(n))) ** k


def extreme_low_term(dist: TailDistribution, k: int, n: int,
                     rtol: float = 1e-10) -> float:
    """All k weights below the cutoff: the k-fold integral collapses by
    symmetry to a power of one moment integral."""
    if k < 2:
        raise ParameterError("extreme terms are defined for k >= 2")
    mun = dist.mu * n
    mk = dist.moment_integral(k - 1, 1.0, dist.cutoff(n), rtol=rtol)
    return mun ** (-k * (k - 1) / 2.0) * mk ** k


# ---------------------------------------------------------------------------
# intermediate terms


def _ordered_tensor(levels: int, uppers: np.ndarray,
                    ppd: int | None = None, order: int | None = None):
    """Nodes and weights for the ordered block below per-row uppers.

    Returns (H, W): H has shape (R, levels) with 1 <= h_levels <= ... <= h_1
    <= upper for the originating row, W the product quadrature weights.
    Rows with upper <= 1 get zero weight automatically.
    """
    ppd = _TENSOR_PPD if ppd is None else ppd
    order = _TENSOR_ORDER if order is None else order
    x, w = np.polynomial.legendre.leggauss(order)
    H = np.empty((uppers.size, 0))
    W = np.ones(uppers.size)
    U = uppers.copy()
    for _ in range(levels):
        decades = math.log10(max(float(np.max(U)), 1.0) + 1e-300)
        panels = int(np.clip(math.ceil(ppd * max(decades, 0.5)), 2, 48))
        t = np.linspace(0.0, 1.0, panels + 1)
        edges = np.maximum(U, 1.0)[:, None] ** t[None, :]       # geometric from 1 to U
        lo, hi = edges[:, :-1], edges[:, 1:]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        nodes = mid[..., None] + half[..., None] * x            # (R, panels, order)
        wts = half[..., None] * w                               # (R, panels, order)
        R = H.shape[0]
        H = np.repeat(H, panels * order, axis=0)
        H = np.concatenate([H, nodes.reshape(-1, 1)], axis=1)
        W = (W[:, None, None] * wts).reshape(-1)
        U = nodes.reshape(-1)
    return H, W


def _low_block_integral(dist: TailDistribution, r: int, m: int, v: int, n: int,
                        n_ones: int, rtol: float):
    """Integral over 1 < h_r < ... < h_1 < cutoff of
    prod_i h_i^(m-1) f(h_i) * inner(h_1..h_r, 1...1)^v.

    The h_1 axis is integrated adaptively; the remaining axes use fixed
    log-panel Gauss rules, evaluated in one batch per adaptive refinement.
    """
    cut = dist.cutoff(n)
    if cut <= 1.0:
        return 0.0, 0.0

    def integrand(h1: np.ndarray) -> np.ndarray:
        h1 = np.asarray(h1, dtype=float)
        base = h1 ** (m - 1) * dist.density(h1)
        if r == 1:
            rows = h1[:, None]
            row_w = np.ones_like(h1)
        else:
            Hsub, Wsub = _ordered_tensor(r - 1, h1)
            reps = Wsub.size // h1.size
            owner = np.repeat(np.arange(h1.size), reps)
            rows = np.concatenate([h1[owner][:, None], Hsub], axis=1)
            row_w = Wsub
            for d in range(1, r):
                row_w = row_w * rows[:, d] ** (m - 1) * dist.density(rows[:, d])
        if n_ones:
            rows = np.concatenate([rows, np.ones((rows.shape[0], n_ones))], axis=1)
        vals = np.empty(rows.shape[0])
        for s in range(0, rows.shape[0], _BATCH_ROWS):
            vals[s:s + _BATCH_ROWS] = _inner_batch(dist, rows[s:s + _BATCH_ROWS], n)
        contrib = row_w * vals ** v
        # tensor rows are grouped contiguously under their h1 node
        per_h1 = contrib.reshape(h1.size, -1).sum(axis=1)
        return base * per_h1

    res = adaptive_quad(integrand, 1.0, cut, rtol=rtol, warn=False)
    if not res.converged:
        warnings.warn(
            f"ordered-block integral (m={m}, depth={r}) stopped at error bound "
            f"{res.error:.3e} of {res.value:.6e}",
            ConvergenceWarning, stacklevel=2)
    return res.value, res.error


def _intermediate_quadrature(dist, k, m, n, rtol):
    mun = dist.mu * n
    a0 = dist.atom_at_one
    v = k - m
    total = 0.0
    err = 0.0
    for j in range(m + 1):                      # j weights pinned on the atom at 1
        if j > 0 and a0 == 0.0:
            break
        r = m - j
        coef = comb(m, j) * a0 ** j * factorial(r)
        if r == 0:
            ones = InnerIntegrandContext(weights=(1.0,) * m, n=n, mu=dist.mu)
            block, berr = inner_integral(ones, dist) ** v, 0.0
        else:
            block, berr = _low_block_integral(dist, r, m, v, n, j, rtol)
        total += coef * block
        err += coef * berr
    pref = mun ** (-m * (m - 1) / 2.0)
    return pref * total, pref * err


def _intermediate_mc(dist, k, m, n, samples, seed, strata=64):
    """Conditional Monte Carlo fallback: weights drawn below the cutoff via
    the inverse tail, first coordinate stratified, integrand exact."""
    mun = dist.mu * n
    cut = dist.cutoff(n)
    ustar = float(dist.tail(cut))
    p_low = 1.0 - ustar
    if p_low <= 0.0:
        return 0.0, 0.0
    v = k - m
    rng = substream(derive_key(seed, "interm-mc", k, m, n), 0)
    u = rng.random((samples, m))
    s_count = max(1, min(strata, samples // 64))
    u[:, 0] = (np.arange(samples) % s_count + u[:, 0]) / s_count
    u_cond = ustar + p_low * (1.0 - u)           # uniforms mapped into (ustar, 1]
    H = np.sort(dist.inverse_tail(u_cond), axis=1)[:, ::-1]
    vals = np.prod(H ** (m - 1), axis=1) * _inner_batch(dist, H, n) ** v
    coef = p_low ** m * mun ** (-m * (m - 1) / 2.0)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return coef * mean, coef * stderr


def intermediate_term(dist: TailDistribution, k: int, m: int, n: int, *,
                      rtol: float = 1e-8, method: str = "auto",
                      mc_samples: int = 400_000, seed: int = 0):
    """I_m with its error bound: quadrature for m <= 4, conditional MC above.

    Returns (value, error_bound, method_used).
    """
    if not 1 <= m <= k - 1:
        raise ParameterError(f"need 1 <= m <= k-1, got m={m}, k={k}")
    if float(dist.tail(dist.cutoff(n))) == 0.0:
        return 0.0, 0.0, "exact"
    if method == "auto":
        method = "quadrature" if m <= 4 else "mc"
    if method == "quadrature":
        if m > 4:
            raise ParameterError("the nested quadrature path is limited to m <= 4")
        val, err = _intermediate_quadrature(dist, k, m, n, rtol)
        return val, err, "quadrature"
    if method == "mc":
        val, err = _intermediate_mc(dist, k, m, n, mc_samples, seed)
        return val, err, "mc"
    raise ParameterError(f"unknown intermediate-term method {method!r}")


# ---------------------------------------------------------------------------
# full decomposition and the Monte Carlo cross-check


def _log10_or_ninf(x: float) -> float:
    return math.log10(x) if x > 0 else -math.inf


def _resonant_labels(alpha: float, k: int) -> list:
    """Integer-alpha terms whose moment exponent hits beta = alpha - 1."""
    a = round(alpha)
    if abs(alpha - a) > 1e-9:
        return []
    labels = []
    if k - 1 == a - 1:
        labels.append("extreme_low")
    for m in range(1, k):
        if m >= a - 1:
            labels.append(f"I_{m}")
    return labels


def clique_prob_quadrature(dist: TailDistribution, k: int, n: int, *,
                           rtol: float = 1e-8, mc_samples: int = 400_000,
                           seed: int = 0) -> DecompositionReport:
    """Assemble the full conditioning decomposition of P(K_k)."""
    if k < 0:
        raise ParameterError(f"clique size must be >= 0, got {k}")
    base = dict(k=k, n=n, alpha=dist.alpha, l_name=dist.l.label, mu=dist.mu)
    if k <= 1:
        # a single node (or the empty set) is always a clique
        return DecompositionReport(**base, extreme_low=0.0, intermediate=[],
                                   binomial_weights=[], extreme_high=0.0,
                                   total=1.0, log10_terms={"total": 0.0})
    lo = extreme_low_term(dist, k, n, rtol=min(rtol, 1e-10))
    hi = extreme_high_term(dist, k, n)
    mun = dist.mu * n
    mk = dist.moment_integral(k - 1, 1.0, dist.cutoff(n), rtol=min(rtol, 1e-10))
    log10_terms = {
        "extreme_low": (-k * (k - 1) / 2.0) * math.log10(mun) + k * _log10_or_ninf(mk),
        "extreme_high": k * _log10_or_ninf(float(dist.tail(dist.cutoff(n)))),
    }
    inter, errors, methods = [], [rtol * lo], []
    for m in range(1, k):
        val, err, how = intermediate_term(dist, k, m, n, rtol=rtol,
                                          mc_samples=mc_samples, seed=seed)
        inter.append(val)
        errors.append(err)
        methods.append(how)
        log10_terms[f"I_{m}"] = _log10_or_ninf(val)
    weightsb = [comb(k, m) for m in range(1, k)]
    total = lo + sum(w * v for w, v in zip(weightsb, inter)) + hi
    finite_logs = [log10_terms["extreme_low"], log10_terms["extreme_high"]]
    finite_logs += [math.log10(w) + log10_terms[f"I_{m}"]
                    for m, w in zip(range(1, k), weightsb)
                    if log10_terms[f"I_{m}"] > -math.inf]
    peak = max(finite_logs)
    log10_terms["total"] = (peak + math.log10(sum(10.0 ** (g - peak)
                                                  for g in finite_logs
                                                  if g > -math.inf))
                            if peak > -math.inf else -math.inf)
    if not 0.0 <= total <= 1.0 + 1e-9:
        raise ParameterError(
            f"decomposition produced total={total!r} outside [0, 1]; "
            f"this indicates a tolerance failure, rerun with smaller rtol")
    return DecompositionReport(
        **base, extreme_low=lo, intermediate=inter, binomial_weights=weightsb,
        extreme_high=hi, total=total, term_errors=errors,
        max_term_error=max(errors, default=0.0),
        resonant_terms=_resonant_labels(dist.alpha, k),
        term_methods=methods, log10_terms=log10_terms)


def clique_prob_mc(dist: TailDistribution, k: int, n: int, samples: int,
                   seed: int, block_size: int = 1_000_000) -> McEstimate:
    """Plain Monte Carlo: k i.i.d. weights per sample, average the product
    of pair probabilities.  Unbiased; deterministic per (seed, block_size)."""
    if samples < 1_000:
        raise ParameterError(f"need at least 1000 samples, got {samples}")
    if k < 0:
        raise ParameterError(f"clique size must be >= 0, got {k}")
    if k <= 1:
        return McEstimate(mean=1.0, stderr=0.0, samples=samples, seed=seed)
    mun = dist.mu * n
    key = derive_key(seed, "clique-mc", k, n)
    mean = 0.0
    m2 = 0.0
    done = 0
    block = 0
    while done < samples:
        count = min(block_size, samples - done)
        rng = substream(key, block)
        u = 1.0 - rng.random((count, k))
        h = dist.inverse_tail(u)
        p = np.ones(count)
        for i in range(k):
            for j in range(i + 1, k):
                p *= np.minimum(h[:, i] * h[:, j] / mun, 1.0)
        # numerically stable pairwise combine of (mean, centered second moment)
        bmean = float(p.mean())
        bm2 = float(((p - bmean) ** 2).sum())
        delta = bmean - mean
        mean += delta * count / (done + count)
        m2 += bm2 + delta * delta * done * count / (done + count)
        done += count
        block += 1
    var = m2 / (samples - 1) if samples > 1 else 0.0
    return McEstimate(mean=mean, stderr=math.sqrt(var / samples),
                      samples=samples, seed=seed)


# ---------------------------------------------------------------------------
# the ordered-integral functional used by the intermediate terms


def eval_J(dist: TailDistribution, i: int, m: int, integrand, prefix, n: int,
           rtol: float = 1e-8) -> float:
    """One layer of the ordered integral:
    int_1^{h_(i-1)} h^(m-1) g(n, h_1..h_(i-1), h) dF(h), with the cutoff
    sqrt(mu n) acting as h_0.  The atom at 1 is included.

    ``integrand`` is called as integrand(n, *prefix, h) with h vectorized;
    composing the layers i = 1..m reproduces the ordered block integral of
    the intermediate terms (for atomless weight laws).
    """
    if not 1 <= i <= m:
        raise ParameterError(f"need 1 <= i <= m, got i={i}, m={m}")
    prefix = tuple(float(p) for p in prefix)
    if len(prefix) != i - 1:
        raise ParameterError(f"layer {i} needs {i - 1} outer weights")
    cut = dist.cutoff(n)
    bounds = (cut,) + prefix
    if any(b1 > b0 * (1 + 1e-12) for b0, b1 in zip(bounds, bounds[1:])) \
            or (prefix and prefix[-1] < 1.0):
        raise ParameterError("outer weights must be ordered within [1, cutoff]")
    upper = bounds[-1]
    atom = dist.atom_at_one * float(np.asarray(integrand(n, *prefix, np.array([1.0]))).ravel()[0])
    if upper <= 1.0:
        return atom
    res = adaptive_quad(
        lambda h: h ** (m - 1) * dist.density(h)
        * np.asarray(integrand(n, *prefix, h), dtype=float),
        1.0, upper, rtol=rtol)
    return atom + res.value
