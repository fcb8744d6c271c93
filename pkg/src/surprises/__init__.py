"""Temporal abduction: explain timed observations by minimal sets of surprises and rank them."""

__version__ = "0.1.0"

from .dsl import FluentParamsDecl, Scenario, ScenarioDoc, parse, render
from .explanation import CmeResult, Status, compact_minimal_explanations, compactify
from .logic import Change, Explanation, Fluent, PointwiseExplanation, Surprise, TimedFormula, TimedModel
from .probability import ProbModel, approx_posteriors, derive_params, exact_posteriors

__all__ = [
    "Change",
    "CmeResult",
    "Explanation",
    "Fluent",
    "FluentParamsDecl",
    "PointwiseExplanation",
    "ProbModel",
    "Scenario",
    "ScenarioDoc",
    "Status",
    "Surprise",
    "TimedFormula",
    "TimedModel",
    "approx_posteriors",
    "compact_minimal_explanations",
    "compactify",
    "derive_params",
    "exact_posteriors",
    "parse",
    "render",
]
