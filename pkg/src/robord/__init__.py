"""Robust estimation of cumulative-link ordinal response models.

Maximum likelihood, density-power (DP) divergence and gamma-divergence
estimators, influence-function diagnostics, sandwich inference and a
contamination simulation harness.
"""

from robord.links import LinkKind, cdf, pdf, quantile
from robord.model import (
    Dataset,
    Method,
    Params,
    category_prob,
    dp_objective,
    gamma_objective,
    neg_log_lik,
    score,
)
from robord.estimate import FitConfig, FitResult, fit, from_constrained, init_params, to_constrained

__all__ = [
    "LinkKind",
    "cdf",
    "pdf",
    "quantile",
    "Dataset",
    "Method",
    "Params",
    "category_prob",
    "dp_objective",
    "gamma_objective",
    "neg_log_lik",
    "score",
    "FitConfig",
    "FitResult",
    "fit",
    "from_constrained",
    "init_params",
    "to_constrained",
]
