"""Predicted growth laws for clique probabilities and their empirical fits.

For clique size k and tail exponent alpha > 2 the probability that k tagged
nodes form a clique follows a power of n:

    k < alpha             P ~ n^(k(1-k)/2)                   (sharp)
    k > alpha, non-int.   P ~ n^(k(1-alpha)/2) l(sqrt n)^k   (sharp)

With integer alpha the resonant moment functional Q enters:

    k = alpha             P <= n^(k(1-k)/2) Q(sqrt n)^(k-1) Q(n)
    k > alpha             P <= n^(k(1-alpha)/2) l(sqrt n)^(alpha-1) Q(n)^(k-alpha+1)

and two integer-alpha cases are sharp with explicit logs: constant l gives
log(sqrt n)^k at k = alpha and a clean power (no log) above, while l = log
gives log(sqrt n)^(2k) at k = alpha and only the upper bound beyond.

Expected counts over the whole graph scale as n^k times the probability.
fit_exponent does ordinary least squares on log value vs log n, and
scaling_study drives either the quadrature evaluator, the Monte Carlo
estimator, or sampled-graph censuses across a geometric n grid.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cliques import count_cliques
from .errors import ConvergenceWarning, ParameterError
from .evaluate import clique_prob_mc, clique_prob_quadrature
from .graphs import SamplerConfig, sample_graph
from .weights import TailDistribution

_INTEGER_EPS = 1e-9


@dataclass
class AsymptoticPrediction:
    k: int
    alpha: float
    regime: str                 # k_below_alpha | k_equal_alpha_integer | k_above_alpha
    p_exponent: float           # power of n in P(K_k)
    a_exponent: float           # power of n in the expected count
    sv_factor: str              # human-readable slowly varying correction
    sharp: bool                 # asymptotic equivalence vs upper bound
    correction: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False)

    def correction_at(self, n) -> np.ndarray:
        if self.correction is None:
            return np.ones_like(np.asarray(n, dtype=float))
        return np.asarray(self.correction(np.asarray(n, dtype=float)), dtype=float)


def predict(k: int, alpha: float, l=None,
            integer_mode: Optional[bool] = None) -> AsymptoticPrediction:
    """Growth-law prediction for (k, alpha) and a catalogue l.

    integer_mode defaults to |alpha - round(alpha)| < 1e-9; passing a bool
    forces the branch (forcing non-integer handling at k == alpha is
    rejected, since k is an integer).
    """
    if not alpha > 2.0:
        raise ParameterError(f"growth laws require alpha > 2, got {alpha}")
    if k < 2:
        raise ParameterError(f"growth laws cover clique sizes k >= 2, got {k}")
    if integer_mode is None:
        integer_mode = abs(alpha - round(alpha)) < _INTEGER_EPS
    l_name = l.name if l is not None else "one"
    const_like = l_name in ("one", "const")

    if k < alpha:
        return AsymptoticPrediction(
            k=k, alpha=alpha, regime="k_below_alpha",
            p_exponent=k * (1 - k) / 2.0, a_exponent=k * (1 - k) / 2.0 + k,
            sv_factor="1", sharp=True)

    if not integer_mode:
        if k == alpha:
            raise ParameterError(
                "k == alpha only arises for integer alpha; cannot force the "
                "non-integer branch there")
        p = k * (1 - alpha) / 2.0
        if const_like:
            return AsymptoticPrediction(
                k=k, alpha=alpha, regime="k_above_alpha",
                p_exponent=p, a_exponent=p + k, sv_factor="1", sharp=True)
        lfun = l
        return AsymptoticPrediction(
            k=k, alpha=alpha, regime="k_above_alpha",
            p_exponent=p, a_exponent=p + k,
            sv_factor=f"l(sqrt(n))^{k}", sharp=True,
            correction=lambda n: lfun(np.sqrt(n)) ** k)

    # integer alpha from here on
    a_int = round(alpha)
    if k == a_int:
        p = k * (1 - k) / 2.0
        if const_like:
            return AsymptoticPrediction(
                k=k, alpha=alpha, regime="k_equal_alpha_integer",
                p_exponent=p, a_exponent=p + k,
                sv_factor=f"log(sqrt(n))^{k}", sharp=True,
                correction=lambda n: np.log(np.sqrt(n)) ** k)
        if l_name == "log":
            return AsymptoticPrediction(
                k=k, alpha=alpha, regime="k_equal_alpha_integer",
                p_exponent=p, a_exponent=p + k,
                sv_factor=f"log(sqrt(n))^{2 * k}", sharp=True,
                correction=lambda n: np.log(np.sqrt(n)) ** (2 * k))
        qf = _q_correction(alpha, l)
        return AsymptoticPrediction(
            k=k, alpha=alpha, regime="k_equal_alpha_integer",
            p_exponent=p, a_exponent=p + k,
            sv_factor=f"Q(sqrt(n))^{k - 1} Q(n)", sharp=False,
            correction=lambda n: qf(np.sqrt(n)) ** (k - 1) * qf(n))

    # k > integer alpha
    p = k * (1 - alpha) / 2.0
    if const_like:
        return AsymptoticPrediction(
            k=k, alpha=alpha, regime="k_above_alpha",
            p_exponent=p, a_exponent=p + k, sv_factor="1", sharp=True)
    if l_name == "log":
        e = 2 * k - a_int - 1
        return AsymptoticPrediction(
            k=k, alpha=alpha, regime="k_above_alpha",
            p_exponent=p, a_exponent=p + k,
            sv_factor=f"log(sqrt(n))^{e}", sharp=False,
            correction=lambda n: np.log(np.sqrt(n)) ** e)
    lfun = l
    qf = _q_correction(alpha, l)
    return AsymptoticPrediction(
        k=k, alpha=alpha, regime="k_above_alpha",
        p_exponent=p, a_exponent=p + k,
        sv_factor=f"l(sqrt(n))^{a_int - 1} Q(n)^{k - a_int + 1}", sharp=False,
        correction=lambda n: lfun(np.sqrt(n)) ** (a_int - 1)
        * qf(n) ** (k - a_int + 1))


def _q_correction(alpha: float, l) -> Callable:
    dist = TailDistribution(round(alpha), l, formal=l.formal_only)
    def qf(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([dist.q_function(float(t)) for t in x])
    return qf


@dataclass
class ScalingFit:
    points: list                    # (n, fitted value) pairs
    slope: float
    slope_stderr: float
    r_squared: float
    theory_exponent: Optional[float]
    verdict: str                    # pass | fail | inconclusive


def fit_exponent(points, theory_exponent: Optional[float] = None,
                 tolerance: float = 0.15) -> ScalingFit:
    """OLS slope of log value against log n.

    verdict needs a theory exponent: pass when the fitted slope is within
    max(2 * stderr, tolerance); without one the fit is inconclusive.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 4:
        raise ParameterError(f"need at least 4 points, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(vs <= 0):
        raise ParameterError("all values must be positive for a log-log fit")
    if np.any(np.diff(ns) <= 0):
        raise ParameterError("n values must be strictly increasing")
    x = np.log(ns)
    y = np.log(vs)
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - y.mean())).sum() / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    ssr = float((resid ** 2).sum())
    sst = float(((y - y.mean()) ** 2).sum())
    stderr = math.sqrt(ssr / (len(pts) - 2) / sxx) if len(pts) > 2 else 0.0
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    if theory_exponent is None:
        verdict = "inconclusive"
    elif abs(slope - theory_exponent) <= max(2 * stderr, tolerance):
        verdict = "pass"
    else:
        verdict = "fail"
    return ScalingFit(points=pts, slope=slope, slope_stderr=stderr,
                      r_squared=r2, theory_exponent=theory_exponent,
                      verdict=verdict)


@dataclass
class StudyRow:
    n: int
    value: float
    predicted_factor: float
    residual: float
    error: float


@dataclass
class StudyResult:
    prediction: AsymptoticPrediction
    rows: list
    fit: ScalingFit
    method: str

    def csv_lines(self) -> list:
        lines = ["n,value,predicted_factor,residual,error"]
        for r in self.rows:
            lines.append(f"{r.n},{r.value!r},{r.predicted_factor!r},"
                         f"{r.residual!r},{r.error!r}")
        f = self.fit
        lines.append("slope,slope_stderr,theory_exponent,r_squared,verdict")
        lines.append(f"{f.slope!r},{f.slope_stderr!r},{f.theory_exponent!r},"
                     f"{f.r_squared!r},{f.verdict}")
        return lines


def _check_geometric(n_grid) -> list:
    ns = [int(n) for n in n_grid]
    if len(ns) < 4:
        raise ParameterError("scaling studies need at least 4 grid points")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("n grid must be strictly increasing")
    steps = np.diff(np.log(np.array(ns, dtype=float)))
    if steps.max() > 1.6 * steps.min():
        raise ParameterError("n grid must be (close to) geometric")
    return ns


def scaling_study(dist: TailDistribution, k: int, n_grid, *,
                  method: str = "quadrature", seed: int = 0,
                  samples: int = 1_000_000, graphs_per_point: int = 50,
                  tolerance: float = 0.15, rtol: float = 1e-8,
                  threads: int = 1) -> StudyResult:
    """Evaluate P(K_k) (or expected counts) across a geometric n grid,
    strip the predicted slowly varying factor, and fit the residual slope.
    """
    ns = _check_geometric(n_grid)
    pred = predict(k, dist.alpha, dist.l)
    theory = pred.a_exponent if method == "graphs" else pred.p_exponent

    def value_at(n: int):
        if method == "quadrature":
            rep = clique_prob_quadrature(dist, k, n, rtol=rtol, seed=seed)
            return rep.total, rep.max_term_error
        if method == "mc":
            est = clique_prob_mc(dist, k, n, samples, seed)
            return est.mean, est.stderr
        if method == "graphs":
            counts = [count_cliques(
                sample_graph(dist, SamplerConfig(n=n, seed=seed + 7919 * r + n)),
                k).count for r in range(graphs_per_point)]
            mean = float(np.mean(counts))
            err = float(np.std(counts, ddof=1) / math.sqrt(len(counts)))
            return mean, err
        raise ParameterError(f"unknown scaling method {method!r}")

    degraded = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(value_at, ns))
        else:
            results = [value_at(n) for n in ns]
        degraded = any(issubclass(w.category, ConvergenceWarning) for w in caught)

    rows = []
    for n, (val, err) in zip(ns, results):
        factor = float(pred.correction_at(n))
        rows.append(StudyRow(n=n, value=float(val), predicted_factor=factor,
                             residual=float(val) / factor, error=float(err)))
    fit = fit_exponent([(r.n, r.residual) for r in rows],
                       theory_exponent=theory, tolerance=tolerance)
    if degraded:
        fit.verdict = "inconclusive"
    return StudyResult(prediction=pred, rows=rows, fit=fit, method=method)
