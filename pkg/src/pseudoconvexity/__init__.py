"""Numerical toolkit for pseudoconvexity constructions in several complex variables.

Modules
-------
cantor_bump
    Bump schedules, the Cantor interval tree and the function ``F``.
hartogs
    Hartogs graph domains over a Cantor cap and their Levi sign maps.
levi
    Defining functions, Levi forms, tangent discs and Taylor residuals.
bergman
    Series and Monte-Carlo Gram estimates of the diagonal Bergman kernel.
witness
    Plurisubharmonic peak functions, their regularized supremum and the
    greedy square-integrable witness.
pipeline, cli
    Config-driven pipelines, reports and the command line.
"""
from .cantor_bump import construct_F, solve_parameters
from .config import PipelineConfig
from .errors import (
    CacheCorruption, ConfigError, DomainError, GrowthTargetUnreachable, PseudoconvexityError,
)
from .pipeline import run_pipeline
from .verification import VerificationReport, verify_all

__version__ = "0.1.0"

__all__ = [
    "CacheCorruption", "ConfigError", "DomainError", "GrowthTargetUnreachable", "PipelineConfig",
    "PseudoconvexityError", "VerificationReport", "construct_F", "run_pipeline",
    "solve_parameters", "verify_all",
]
