import math
from math import comb

import numpy as np
import pytest
from scipy import integrate

from cliquescale.errors import ConvergenceWarning, ParameterError
from cliquescale.evaluate import (DecompositionReport, InnerIntegrandContext,
                                  clique_prob_mc, clique_prob_quadrature,
                                  eval_J, extreme_high_term, extreme_low_term,
                                  inner_integral, intermediate_term)
from cliquescale.rng import stream
from cliquescale.slowvary import make_l
from cliquescale.weights import TailDistribution

D3 = TailDistribution(3.0)          # mu = 2, cutoff(50) = 10


# -- extreme terms ------------------------------------------------------------

def test_extreme_high_examples():
    assert extreme_high_term(D3, 2, 50) == pytest.approx(1e-4, rel=1e-12)
    d = TailDistribution(2.5)
    want = ((3.0 * 10 ** 4) ** -0.75) ** 3
    assert extreme_high_term(d, 3, 10 ** 4) == pytest.approx(want, rel=1e-9)
    # k-fold tail integral collapses to the same power
    cross = float(d.tail(d.cutoff(10 ** 4))) ** 3
    assert extreme_high_term(d, 3, 10 ** 4) == pytest.approx(cross, rel=1e-12)


def test_extreme_low_examples():
    assert extreme_low_term(D3, 2, 50) == pytest.approx(0.0324, rel=1e-9)
    # essentially all mass on the atom at 1: the term collapses to (mu n)^-1
    atom = TailDistribution(3.0, make_l("const", (1e-300,)))
    assert atom.mu == 1.0
    assert extreme_low_term(atom, 2, 100) == pytest.approx(1e-2, rel=1e-9)


def test_extreme_low_matches_tensor_quadrature():
    # independent 3-D oracle for the symmetric collapse (k = 3)
    d = TailDistribution(4.5)
    n = 1000
    cut = d.cutoff(n)
    mun = d.mu * n
    f = lambda h: (d.alpha - 1) * h ** -d.alpha
    inner2 = lambda h1: integrate.quad(
        lambda h2: h2 ** 2 * f(h2), 1, cut, epsabs=1e-14, epsrel=1e-10)[0]
    per_axis = integrate.quad(lambda h1: h1 ** 2 * f(h1), 1, cut,
                              epsabs=1e-14, epsrel=1e-10)[0]
    oracle = integrate.tplquad(
        lambda h3, h2, h1: (h1 * h2 * h3) ** 2 * f(h1) * f(h2) * f(h3),
        1, cut, 1, cut, 1, cut, epsabs=1e-16, epsrel=1e-9)[0] / mun ** 3
    got = extreme_low_term(d, 3, n)
    assert got == pytest.approx(oracle, rel=1e-6)
    assert got == pytest.approx(per_axis ** 3 / mun ** 3, rel=1e-9)


def test_extreme_terms_need_k_at_least_two():
    with pytest.raises(ParameterError):
        extreme_high_term(D3, 1, 50)
    with pytest.raises(ParameterError):
        extreme_low_term(D3, 1, 50)


# -- inner integral -------------------------------------------------------------

def test_inner_boundary_collapses_to_tail():
    ctx = InnerIntegrandContext(weights=(10.0,), n=50, mu=2.0)
    assert inner_integral(ctx, D3) == pytest.approx(0.01, rel=1e-12)


def test_inner_closed_form_single_weight():
    ctx = InnerIntegrandContext(weights=(5.0,), n=50, mu=2.0)
    assert inner_integral(ctx, D3) == pytest.approx(0.0075, rel=1e-10)


def test_inner_breakpoint_sum_exact_for_pareto():
    # hand-rolled antiderivative oracle, independent of the moment machinery
    alpha, mu, n = 2.5, 3.0, 400
    d = TailDistribution(alpha)
    assert d.mu == pytest.approx(mu, rel=1e-9)
    mun = mu * n
    cut = math.sqrt(mun)
    hs = (20.0, 7.0, 1.3)
    m = len(hs)

    def antider(beta, a, b):
        e = beta - alpha + 1
        return (alpha - 1) / e * (b ** e - a ** e)

    bounds = (cut,) + hs
    want = float(d.tail(mun / hs[-1]))
    for s in range(1, m + 1):
        coef = mun ** -(m - s + 1) * np.prod(hs[s - 1:])
        want += coef * antider(m - s + 1, mun / bounds[s - 1], mun / bounds[s])
    ctx = InnerIntegrandContext(weights=hs, n=n, mu=mu)
    assert inner_integral(ctx, d) == pytest.approx(want, rel=1e-10)


def test_inner_matches_direct_quadrature_two_weights():
    d = TailDistribution(2.5)
    n = 200
    mun = d.mu * n
    cut = math.sqrt(mun)
    hs = (11.0, 2.5)
    big = 1e6 * mun
    f = lambda h: (d.alpha - 1) * h ** (-d.alpha)
    # piecewise between the saturation breakpoints, log-split for the far tail
    splits = [cut, mun / hs[0], mun / hs[1]] + list(
        np.geomspace(mun / hs[1], big, 30)[1:])
    direct = sum(
        integrate.quad(
            lambda h: min(hs[0] * h / mun, 1.0) * min(hs[1] * h / mun, 1.0) * f(h),
            a, b, epsabs=1e-16, epsrel=1e-11)[0]
        for a, b in zip(splits, splits[1:]))
    direct += float(d.tail(big))        # beyond, both pair probabilities are 1
    ctx = InnerIntegrandContext(weights=hs, n=n, mu=d.mu)
    assert inner_integral(ctx, d) == pytest.approx(direct, rel=1e-8)


def test_inner_context_validation():
    with pytest.raises(ParameterError):
        InnerIntegrandContext(weights=(2.0, 5.0), n=50, mu=2.0)   # wrong order
    with pytest.raises(ParameterError):
        InnerIntegrandContext(weights=(99.0,), n=50, mu=2.0)      # above cutoff


# -- intermediate terms -----------------------------------------------------------

def test_intermediate_against_conditional_sampling_oracle():
    # P(K_2, H_1 <= cutoff < H_2) by direct conditional simulation
    n, samples = 50, 2_000_000
    mun = 2.0 * n
    cut = math.sqrt(mun)
    ustar = float(D3.tail(cut))
    rng = stream(12345, "cond-oracle")
    u_low = ustar + (1 - ustar) * (1 - rng.random(samples))
    u_high = ustar * (1 - rng.random(samples))
    h1 = D3.inverse_tail(u_low)
    h2 = D3.inverse_tail(u_high)
    vals = np.minimum(h1 * h2 / mun, 1.0)
    scale = (1 - ustar) * ustar
    oracle = scale * vals.mean()
    se = scale * vals.std(ddof=1) / math.sqrt(samples)
    got, err, how = intermediate_term(D3, 2, 1, n)
    assert how == "quadrature"
    assert abs(got - oracle) <= 3 * se + err


def test_intermediate_quadrature_vs_mc_paths():
    d = TailDistribution(2.5)
    q, qerr, _ = intermediate_term(d, 4, 2, 1000, rtol=1e-10)
    m, merr, how = intermediate_term(d, 4, 2, 1000, method="mc",
                                     mc_samples=400_000, seed=99)
    assert how == "mc"
    assert abs(q - m) <= 3 * math.hypot(qerr, merr) + 1e-16


def test_intermediate_zero_when_no_mass_above_cutoff():
    # smallest-subnormal constant factor: the tail underflows to exactly 0
    d = TailDistribution(3.0, make_l("const", (5e-324,)))
    assert float(d.tail(d.cutoff(100))) == 0.0
    val, err, how = intermediate_term(d, 3, 1, 100)
    assert val == 0.0 and how == "exact"


def test_intermediate_validates_m():
    with pytest.raises(ParameterError):
        intermediate_term(D3, 3, 3, 50)
    with pytest.raises(ParameterError):
        intermediate_term(D3, 3, 0, 50)
    with pytest.raises(ParameterError):
        intermediate_term(D3, 8, 5, 50, method="quadrature")


def test_intermediate_atom_mass_enters_blocks():
    # with an atom at 1, pinned coordinates must contribute; compare against
    # a direct conditional MC estimate of I_1 for k = 2
    d = TailDistribution(3.0, make_l("const", (0.5,)))
    n = 80
    mun = d.mu * n
    cut = d.cutoff(n)
    ustar = float(d.tail(cut))
    rng = stream(777, "atom-oracle")
    samples = 1_000_000
    h1 = d.inverse_tail(ustar + (1 - ustar) * (1 - rng.random(samples)))
    h2 = d.inverse_tail(ustar * (1 - rng.random(samples)))
    vals = np.minimum(h1 * h2 / mun, 1.0)
    scale = (1 - ustar) * ustar
    oracle = scale * vals.mean()
    se = scale * vals.std(ddof=1) / math.sqrt(samples)
    got, err, _ = intermediate_term(d, 2, 1, n)
    assert abs(got - oracle) <= 3 * se + err


# -- full decomposition ------------------------------------------------------------

def test_decomposition_k2_worked_case():
    rep = clique_prob_quadrature(D3, 2, 50)
    assert rep.extreme_low == pytest.approx(0.0324, rel=1e-9)
    assert rep.extreme_high == pytest.approx(1e-4, rel=1e-9)
    assert rep.binomial_weights == [2]
    assert rep.total == rep.term_sum()
    est = clique_prob_mc(D3, 2, 50, 1_000_000, seed=42)
    assert abs(rep.total - est.mean) <= 3 * est.stderr


def test_single_node_convention():
    for k in (0, 1):
        rep = clique_prob_quadrature(D3, k, 50)
        assert rep.total == 1.0
        est = clique_prob_mc(D3, k, 50, 1_000, seed=1)
        assert est.mean == 1.0 and est.stderr == 0.0


def test_growth_ratio_converges_for_k_above_alpha():
    # P(K_3) / n^(3(1-alpha)/2) approaches a constant from below; at desk
    # scale the increments must be shrinking decade over decade
    d = TailDistribution(2.5)
    ratios = []
    for n in (10 ** 2, 10 ** 3, 10 ** 4):
        rep = clique_prob_quadrature(d, 3, n)
        ratios.append(rep.total / n ** (3 * (1 - d.alpha) / 2))
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] - ratios[1] < ratios[1] - ratios[0]


def test_low_block_dominance_trend_below_alpha():
    d = TailDistribution(4.5)
    ratios = []
    for n in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        rep = clique_prob_quadrature(d, 3, n)
        ratios.append(rep.extreme_low / rep.total)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 0.9


def test_decomposition_identity_against_restricted_mc():
    # direct MC and per-configuration indicator MC must both agree with the
    # assembled quadrature total
    d = TailDistribution(2.5)
    k, n, samples = 3, 100, 4_000_000
    rep = clique_prob_quadrature(d, k, n)
    est = clique_prob_mc(d, k, n, samples, seed=31)
    assert abs(rep.total - est.mean) <= 3 * est.stderr

    mun = d.mu * n
    cut = d.cutoff(n)
    rng = stream(313, "restricted")
    h = d.inverse_tail(1 - rng.random((samples, k)))
    p = np.ones(samples)
    for i in range(k):
        for j in range(i + 1, k):
            p *= np.minimum(h[:, i] * h[:, j] / mun, 1.0)
    low = h <= cut
    total_rest = 0.0
    var_rest = 0.0
    for m_low in range(k + 1):
        # all C(k, m) configurations pooled: indicator on the number below
        sel = low.sum(axis=1) == m_low
        vals = p * sel
        total_rest += vals.mean()
        var_rest += vals.var(ddof=1) / samples
    se = math.sqrt(var_rest)
    assert abs(rep.total - total_rest) <= 3 * se
    # and the restricted means match the assembled terms themselves
    mid = [p[low.sum(axis=1) == m].sum() / samples for m in range(1, k)]
    for m, got in zip(range(1, k), mid):
        want = comb(k, m) * rep.intermediate[m - 1]
        band = 3 * math.sqrt(np.var(p * (low.sum(axis=1) == m), ddof=1) / samples)
        assert abs(got - want) <= band + 1e-12


def test_report_terms_within_unit_interval():
    for k, alpha, n in [(2, 2.5, 100), (3, 3.0, 1000), (4, 4.5, 100)]:
        rep = clique_prob_quadrature(TailDistribution(alpha), k, n)
        assert 0.0 <= rep.extreme_low <= 1.0
        assert 0.0 <= rep.extreme_high <= 1.0
        assert all(0.0 <= v <= 1.0 for v in rep.intermediate)
        assert 0.0 <= rep.total <= 1.0
        assert rep.total == rep.term_sum()


def test_resonance_annotation_for_integer_alpha():
    rep = clique_prob_quadrature(TailDistribution(3.0), 3, 100)
    assert "extreme_low" in rep.resonant_terms
    assert "I_2" in rep.resonant_terms and "I_1" not in rep.resonant_terms
    rep = clique_prob_quadrature(TailDistribution(2.5), 3, 100)
    assert rep.resonant_terms == []


def test_mc_fallback_beyond_depth_four():
    # k = 6 forces I_5 onto the conditional Monte Carlo path
    d = TailDistribution(3.5)
    rep = clique_prob_quadrature(d, 6, 200, mc_samples=50_000, seed=3)
    assert rep.term_methods[:4] == ["quadrature"] * 4
    assert rep.term_methods[4] == "mc"
    assert 0.0 <= rep.total <= 1.0
    assert np.isfinite(rep.log10_terms["total"])


def test_log10_terms_consistent():
    rep = clique_prob_quadrature(TailDistribution(4.5), 4, 10 ** 4)
    assert rep.log10_terms["extreme_low"] == pytest.approx(
        math.log10(rep.extreme_low), abs=1e-9)
    assert rep.log10_terms["total"] == pytest.approx(
        math.log10(rep.total), abs=1e-9)


# -- Monte Carlo estimator ----------------------------------------------------------

def test_mc_degenerate_atom_distribution():
    d = TailDistribution(3.0, make_l("const", (1e-300,)))
    est = clique_prob_mc(d, 2, 100, 10_000, seed=5)
    assert est.mean == pytest.approx(0.01, rel=1e-12)
    assert est.stderr == 0.0


def test_mc_matches_two_dim_quadrature():
    n = 50
    mun = 2.0 * n
    oracle, _ = integrate.dblquad(
        lambda u, v: min(u ** -0.5 * v ** -0.5 / mun, 1.0),
        0, 1, 0, 1, epsabs=1e-12, epsrel=1e-10)
    est = clique_prob_mc(D3, 2, n, 1_000_000, seed=8)
    assert abs(est.mean - oracle) <= 3 * est.stderr


def test_mc_deterministic_and_blocked():
    a = clique_prob_mc(D3, 3, 100, 250_000, seed=9)
    b = clique_prob_mc(D3, 3, 100, 250_000, seed=9)
    assert a.mean == b.mean and a.stderr == b.stderr
    c = clique_prob_mc(D3, 3, 100, 250_000, seed=9, block_size=100_000)
    assert c.mean != a.mean      # different block layout, same law


def test_mc_validates_sample_count():
    with pytest.raises(ParameterError):
        clique_prob_mc(D3, 2, 50, 999, seed=0)


# -- the ordered-layer functional ----------------------------------------------------

def test_layer_functional_total_mass():
    got = eval_J(D3, 1, 1, lambda n, h: np.ones_like(h), (), 50)
    assert got == pytest.approx(1.0 - 0.01, rel=1e-9)


def test_layer_functional_monomial_reduces_to_moment():
    beta, m = 1.3, 2
    got = eval_J(D3, 2, m, lambda n, h1, h: h ** beta, (7.0,), 50)
    want = D3.moment_integral(beta + m - 1, 1.0, 7.0)
    assert got == pytest.approx(want, rel=1e-8)


def test_layer_functional_composition_matches_triangle_quadrature():
    n = 50
    cut = math.sqrt(2.0 * n)
    f = lambda h: 2.0 * h ** -3.0
    oracle, _ = integrate.dblquad(
        lambda h2, h1: h1 * h2 * f(h1) * f(h2),
        1, cut, 1, lambda h1: h1, epsabs=1e-14, epsrel=1e-10)
    inner_layer = lambda nn, h1, h2: np.ones_like(h2)
    composed = eval_J(
        D3, 1, 2,
        lambda nn, h1: np.array([eval_J(D3, 2, 2, inner_layer, (float(x),), nn)
                                 for x in np.atleast_1d(h1)]),
        (), n)
    assert composed == pytest.approx(oracle, rel=1e-8)


def test_layer_functional_validates_prefix():
    with pytest.raises(ParameterError):
        eval_J(D3, 2, 2, lambda n, a, h: h, (), 50)
    with pytest.raises(ParameterError):
        eval_J(D3, 2, 2, lambda n, a, h: h, (3.0, 2.0), 50)


# -- CSV serialization ---------------------------------------------------------------

def test_csv_row_schema():
    rep = clique_prob_quadrature(D3, 3, 100)
    header = DecompositionReport.csv_header()
    row = rep.csv_row()
    assert header.split(",")[:5] == ["k", "n", "alpha", "l_name", "extreme_low"]
    cells = row.split(",")
    assert len(cells) == len(header.split(","))
    assert cells[0] == "3" and cells[3] == "one"
    assert float(cells[4]) == rep.extreme_low
    assert cells[7] == ""       # I_3 column is blank for k = 3
    assert float(cells[-2]) == rep.total


def test_csv_rejects_oversized_k():
    rep = clique_prob_quadrature(D3, 3, 100)
    rep.intermediate = [0.0] * 9
    with pytest.raises(ParameterError):
        rep.csv_row()


def test_convergence_warning_carries_error_bound():
    with pytest.warns(ConvergenceWarning):
        import cliquescale.quadrature as q
        res = q.adaptive_quad(lambda x: np.sin(50 * x) ** 2 * x ** -1.5,
                              1e-6, 1.0, rtol=1e-14, max_panels=6)
    assert res.error > 0.0
