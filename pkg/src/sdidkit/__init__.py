"""Synthetic difference-in-differences and companion estimators for event-impact panels."""

__version__ = "0.1.0"

from .config import AnalysisConfig
from .errors import (
    AssignmentError,
    BalanceError,
    ConfigError,
    ConvergenceError,
    DegenerateOutcomeError,
    DimensionError,
    DuplicateError,
    InferenceError,
    ParseError,
    SdidkitError,
)
from .estimators import EstimateResult, estimate, relative_effect, treated_pre_mean
from .inference import ConfidenceInterval, PlaceboDistribution, confidence_interval, placebo_inference
from .optim import SimplexLSProblem, SolverSettings, WeightVector, objective, solve_simplex_ls
from .panel import CsvSchema, Panel, demean_pre, growth_transform, load_panel, restrict_treated

__all__ = [
    "AnalysisConfig",
    "AssignmentError",
    "BalanceError",
    "ConfidenceInterval",
    "ConfigError",
    "ConvergenceError",
    "CsvSchema",
    "DegenerateOutcomeError",
    "DimensionError",
    "DuplicateError",
    "EstimateResult",
    "InferenceError",
    "Panel",
    "ParseError",
    "PlaceboDistribution",
    "SdidkitError",
    "SimplexLSProblem",
    "SolverSettings",
    "WeightVector",
    "confidence_interval",
    "demean_pre",
    "estimate",
    "growth_transform",
    "load_panel",
    "objective",
    "placebo_inference",
    "relative_effect",
    "restrict_treated",
    "solve_simplex_ls",
    "treated_pre_mean",
]
