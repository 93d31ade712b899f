import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliquescale.asymptotics import (fit_exponent, predict, scaling_study)
from cliquescale.errors import ParameterError
from cliquescale.evaluate import clique_prob_quadrature
from cliquescale.slowvary import make_l
from cliquescale.weights import TailDistribution


# -- predictions ----------------------------------------------------------------

def test_predict_below_alpha():
    p = predict(3, 4.5)
    assert p.regime == "k_below_alpha"
    assert p.p_exponent == -3.0 and p.a_exponent == 0.0
    assert p.sharp


def test_predict_above_alpha_with_log_factor():
    p = predict(3, 2.5, make_l("log"))
    assert p.p_exponent == pytest.approx(3 * (1 - 2.5) / 2)
    assert p.sv_factor == "l(sqrt(n))^3"
    assert p.sharp
    # the correction is the slowly varying factor cubed
    n = np.array([1e4])
    assert p.correction_at(n)[0] == pytest.approx((1 + math.log(100.0)) ** 3)


def test_predict_above_alpha_pure_power():
    p = predict(3, 2.5)
    assert p.p_exponent == -2.25 and p.sharp and p.sv_factor == "1"


def test_predict_integer_alpha_equal_k():
    p = predict(4, 4.0)
    assert p.regime == "k_equal_alpha_integer"
    assert p.p_exponent == -6.0
    assert p.sv_factor == "log(sqrt(n))^4"
    assert p.sharp
    p = predict(4, 4.0, make_l("log"))
    assert p.sv_factor == "log(sqrt(n))^8" and p.sharp
    p = predict(4, 4.0, make_l("logpow", (1.5,)))
    assert not p.sharp and p.sv_factor.startswith("Q(sqrt(n))")


def test_predict_integer_alpha_above():
    p = predict(4, 3.0)
    assert p.p_exponent == -4.0 and p.sharp and p.sv_factor == "1"
    p = predict(4, 3.0, make_l("log"))
    assert not p.sharp
    assert p.sv_factor == "log(sqrt(n))^4"      # 2k - alpha - 1 = 4


def test_predict_validation():
    with pytest.raises(ParameterError):
        predict(3, 2.0)
    with pytest.raises(ParameterError):
        predict(1, 3.5)
    with pytest.raises(ParameterError):
        predict(3, 3.0, integer_mode=False)


@given(st.integers(min_value=2, max_value=8),
       st.floats(min_value=2.01, max_value=9.0))
@settings(max_examples=60, deadline=None)
def test_count_exponent_exceeds_probability_exponent_by_k(k, alpha):
    p = predict(k, alpha)
    assert p.a_exponent - p.p_exponent == pytest.approx(k)


def test_regime_boundary_nearly_continuous():
    k = 3
    above = predict(k, k + 0.01)     # k below alpha
    below = predict(k, k - 0.01)     # k above alpha
    assert abs(above.p_exponent - below.p_exponent) <= k * 0.01 / 2 + 1e-12


def test_integer_upper_bound_holds_at_finite_n():
    # integer alpha = 3, k = 4, l = 1: the bound carries Q(n)^(k-alpha+1)
    # poly-log factors the sharp power law does not have, so the ratio
    # value/bound must not grow
    d = TailDistribution(3.0)
    ratios = []
    for n in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5):
        rep = clique_prob_quadrature(d, 4, n)
        bound = (n ** (4 * (1 - 3.0) / 2)
                 * d.q_function(float(n)) ** (4 - 3 + 1))
        ratios.append(rep.total / bound)
    fitted_c = max(ratios[:2])
    assert max(ratios[2:]) <= 1.05 * fitted_c


def test_integer_equal_case_lower_bound():
    # k = alpha = 3: value / (n^(k(1-k)/2) Q(sqrt n)^k) stays bounded away
    # from zero and settles
    d = TailDistribution(3.0)
    ratios = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        rep = clique_prob_quadrature(d, 3, n)
        denom = n ** -3.0 * d.q_function(math.sqrt(n)) ** 3
        ratios.append(rep.total / denom)
    assert min(ratios) > 0.01
    assert abs(ratios[-1] / ratios[-2] - 1.0) < 0.2


# -- exponent fitting ---------------------------------------------------------------

def test_fit_noiseless_power_law():
    ns = np.geomspace(1e2, 1e6, 6)
    fit = fit_exponent([(n, 5.0 * n ** -2.25) for n in ns], theory_exponent=-2.25)
    assert fit.slope == pytest.approx(-2.25, abs=1e-10)
    assert fit.slope_stderr < 1e-10
    assert fit.r_squared > 1.0 - 1e-12
    assert fit.verdict == "pass"


def test_fit_constant_series():
    ns = np.geomspace(10, 1e4, 4)
    fit = fit_exponent([(n, 2.5) for n in ns])
    assert fit.slope == 0.0
    assert fit.verdict == "inconclusive"


def test_fit_log_factor_biases_slope_upward():
    make = lambda lo, hi: fit_exponent(
        [(n, n ** -3.0 * math.log(n)) for n in np.geomspace(lo, hi, 6)],
        theory_exponent=-3.0, tolerance=0.2)
    narrow = make(1e2, 1e4)
    wide = make(1e2, 1e8)
    assert narrow.slope > -3.0 and wide.slope > -3.0
    # the bias shrinks as the grid widens
    assert abs(wide.slope + 3.0) < abs(narrow.slope + 3.0)


def test_fit_validation():
    with pytest.raises(ParameterError):
        fit_exponent([(10, 1.0), (100, 1.0), (1000, 1.0)])
    with pytest.raises(ParameterError):
        fit_exponent([(10, 1.0), (100, -1.0), (1000, 1.0), (10000, 1.0)])
    with pytest.raises(ParameterError):
        fit_exponent([(10, 1.0), (10, 2.0), (1000, 1.0), (10000, 1.0)])


def test_fit_verdict_fail_when_theory_is_off():
    ns = np.geomspace(1e2, 1e6, 5)
    fit = fit_exponent([(n, n ** -2.0) for n in ns], theory_exponent=-3.0)
    assert fit.verdict == "fail"


# -- scaling studies ------------------------------------------------------------------

def test_study_quadrature_k2_slope():
    study = scaling_study(TailDistribution(3.7), 2, [10 ** e for e in range(2, 7)])
    assert abs(study.fit.slope + 1.0) < 0.05
    assert study.fit.verdict == "pass"
    assert len(study.rows) == 5
    assert study.rows[0].predicted_factor == 1.0


def test_study_divides_out_poly_log_at_equal_case():
    # k = alpha = 3: without the log(sqrt n)^3 correction the slope is biased;
    # with it the residual slope sits within the verdict tolerance
    study = scaling_study(TailDistribution(3.0), 3,
                          [10 ** e for e in range(3, 8)])
    assert study.prediction.sv_factor == "log(sqrt(n))^3"
    assert study.fit.verdict == "pass"
    raw = fit_exponent([(r.n, r.value) for r in study.rows],
                       theory_exponent=-3.0, tolerance=0.15)
    assert raw.verdict == "fail"        # the poly-log drags the raw slope


def test_study_monte_carlo_method():
    study = scaling_study(TailDistribution(4.0), 2,
                          [100, 400, 1600, 6400], method="mc",
                          samples=200_000, seed=5, tolerance=0.2)
    assert study.fit.verdict == "pass"


def test_study_graph_method_tracks_count_exponent():
    study = scaling_study(TailDistribution(4.0), 2, [100, 200, 400, 800],
                          method="graphs", graphs_per_point=40, seed=2,
                          tolerance=0.2)
    assert study.prediction.a_exponent == 1.0
    assert study.fit.theory_exponent == 1.0
    assert study.fit.verdict == "pass"


def test_study_threaded_matches_serial():
    grid = [10 ** e for e in range(2, 6)]
    a = scaling_study(TailDistribution(2.5), 3, grid, threads=1)
    b = scaling_study(TailDistribution(2.5), 3, grid, threads=4)
    assert [r.value for r in a.rows] == [r.value for r in b.rows]
    assert a.fit.slope == b.fit.slope


def test_study_grid_validation():
    d = TailDistribution(3.0)
    with pytest.raises(ParameterError):
        scaling_study(d, 2, [100, 1000, 10000])              # too short
    with pytest.raises(ParameterError):
        scaling_study(d, 2, [100, 200, 300, 400, 100000])    # not geometric


def test_study_csv_shape():
    study = scaling_study(TailDistribution(3.7), 2, [100, 1000, 10000, 100000])
    lines = study.csv_lines()
    assert lines[0] == "n,value,predicted_factor,residual,error"
    assert len(lines) == 1 + 4 + 2
    assert lines[-2].startswith("slope,")
