"""Median-of-means (epsilon, delta) approximation schemes for Monte Carlo means.

The headline estimator, :class:`ScaledMedianOfMeans`, multiplies each group
average by an independent Uniform[1 - eps, 1 + eps] factor before taking the
median. This needs about ``6.95 (c/eps)^2 ln(1/delta)`` draws, against about
``19.35 (c/eps)^2 ln(1/delta)`` for classic median-of-means.
"""

__version__ = "0.1.0"

from .distributions import make_source, parse_distribution, worst_case_group_source
from .estimators import (
    Estimate,
    EstimatorConfig,
    MedianOfMeans,
    SampleMean,
    ScaledMedianOfMeans,
    estimate,
    mom_estimate,
    scaled_median_estimate,
)
from .plan import Accuracy, PlanKind, SamplingPlan, mom_plan, nuisance_factor, scaled_plan
from .rng import RngStream

__all__ = [
    "Accuracy",
    "Estimate",
    "EstimatorConfig",
    "MedianOfMeans",
    "PlanKind",
    "RngStream",
    "SampleMean",
    "SamplingPlan",
    "ScaledMedianOfMeans",
    "estimate",
    "make_source",
    "mom_estimate",
    "mom_plan",
    "nuisance_factor",
    "parse_distribution",
    "scaled_median_estimate",
    "scaled_plan",
    "worst_case_group_source",
]
