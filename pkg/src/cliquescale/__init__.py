"""cliquescale: heavy-tailed random graphs and their clique statistics.

The model: n nodes get i.i.d. weights with tail P(H > h) = h^(1-alpha) l(h)
(alpha > 2, l slowly varying), and each pair (i, j) is independently wired
with probability min{h_i h_j / (mu n), 1}, mu = E[H].  The package samples
such graphs, counts cliques exactly, evaluates the probability that k nodes
form a clique both by a conditioning decomposition (quadrature) and by
Monte Carlo, and fits empirical growth exponents against the predicted
scaling laws.
"""

__version__ = "0.1.0"

from .asymptotics import (AsymptoticPrediction, ScalingFit, StudyResult,
                          fit_exponent, predict, scaling_study)
from .cliques import (CliqueCensus, brute_force_count, count_cliques,
                      expected_cliques_given_weights)
from .errors import (ConvergenceWarning, DivergenceError, ParameterError,
                     ResourceLimitError, UnsupportedSamplingError)
from .evaluate import (DecompositionReport, InnerIntegrandContext, McEstimate,
                       clique_prob_mc, clique_prob_quadrature, eval_J,
                       extreme_high_term, extreme_low_term, inner_integral,
                       intermediate_term)
from .graphs import (SamplerConfig, WeightedGraph, edge_probability,
                     sample_edges_naive, sample_edges_skip, sample_graph,
                     sample_graph_skip)
from .slowvary import SlowlyVaryingSpec, check_slow_variation, make_l
from .weights import QFunctional, TailDistribution, mean_weight, sample_weight

__all__ = [
    "AsymptoticPrediction", "CliqueCensus", "ConvergenceWarning",
    "DecompositionReport", "DivergenceError", "InnerIntegrandContext",
    "McEstimate", "ParameterError", "QFunctional", "ResourceLimitError",
    "SamplerConfig", "ScalingFit", "SlowlyVaryingSpec", "StudyResult",
    "TailDistribution", "UnsupportedSamplingError", "WeightedGraph",
    "brute_force_count", "check_slow_variation", "clique_prob_mc",
    "clique_prob_quadrature", "count_cliques", "edge_probability", "eval_J",
    "expected_cliques_given_weights", "extreme_high_term", "extreme_low_term",
    "fit_exponent", "inner_integral", "intermediate_term", "make_l",
    "mean_weight", "predict", "sample_edges_naive", "sample_edges_skip",
    "sample_graph", "sample_graph_skip", "sample_weight", "scaling_study",
    "__version__",
]
