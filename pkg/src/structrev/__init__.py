"""Structure-reversibility of two-dimensional reflecting random walks."""
from .analysis import AnalysisReport, Verdict, analyze
from .geometry import GeometricSolution, gamma, sample_curve, solve_eta
from .model import (Face, FaceDistribution, ReflectingWalkModel, ValidationReport, load_model,
                    parse_model, validate)
from .reversal import ReversedModel, analyze_singular, build_reversed_model, reversed_kernel_at
from .reversibility import ReversibilityConstants, check_conditions
from .stationary import StationaryDistribution, build_stationary, pi_at, verify_stationary_equations

__all__ = [
    "AnalysisReport", "Face", "FaceDistribution", "GeometricSolution", "ReflectingWalkModel",
    "ReversedModel", "ReversibilityConstants", "StationaryDistribution", "ValidationReport",
    "Verdict", "analyze", "analyze_singular", "build_reversed_model", "build_stationary",
    "check_conditions", "gamma", "load_model", "parse_model", "pi_at", "reversed_kernel_at",
    "sample_curve", "solve_eta", "validate", "verify_stationary_equations",
]
