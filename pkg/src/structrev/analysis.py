"""End-to-end classification of a model."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .geometry import GeometricSolution, GeometryError, solve_eta
from .model import ReflectingWalkModel, ValidationReport, validate
from .reversal import NotApplicable, ReversalError, SingularSolution, analyze_singular, singular_stationary
from .reversibility import DEFAULT_TOL, ConditionReport, check_conditions
from .stationary import (StationaryDistribution, build_stationary, product_form_test,
                         verify_stationary_equations)

BALANCE_TOL = 1e-9


class Verdict(str, enum.Enum):
    STRUCTURE_REVERSIBLE = "StructureReversible"
    SINGULAR = "Singular"
    NOT_STRUCTURE_REVERSIBLE = "NotStructureReversible"
    INVALID = "Invalid"


@dataclass
class AnalysisReport:
    validation: ValidationReport
    verdict: Verdict
    conditions: ConditionReport | None = None
    solution: GeometricSolution | None = None
    singular: SingularSolution | None = None
    stationary: StationaryDistribution | None = None
    balance_residual: float | None = None
    product_form: bool | None = None
    reason: str = ""
    reversed_model_path: str | None = None
    oracle_tv: float | None = None

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict in (Verdict.STRUCTURE_REVERSIBLE, Verdict.SINGULAR) else 1

    def to_dict(self) -> dict:
        out: dict = {"verdict": self.verdict.value, "validation": self.validation.to_dict()}
        if self.reason:
            out["reason"] = self.reason
        if self.conditions is not None:
            out["conditions"] = self.conditions.to_dict()
        if self.solution is not None:
            out["solution"] = self.solution.to_dict()
        if self.singular is not None:
            out["singular"] = self.singular.to_dict()
        if self.stationary is not None:
            out["stationary"] = self.stationary.to_dict()
            out["balance_residual"] = self.balance_residual
        if self.product_form is not None:
            out["product_form"] = self.product_form
        if self.reversed_model_path is not None:
            out["reversed_model_path"] = self.reversed_model_path
        if self.oracle_tv is not None:
            out["oracle_tv"] = self.oracle_tv
        return out


def analyze(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> AnalysisReport:
    """Validate, test the reversibility conditions, and build the closed form.

    ``tol`` is the relative tolerance for constant ratios and the residual
    tolerance for the decay-rate equations.
    """
    validation = validate(model)
    if not validation.ok:
        return AnalysisReport(validation, Verdict.INVALID, reason="model violates its invariants")
    if not validation.free_walk_irreducible:
        try:
            sol = analyze_singular(model)
        except NotApplicable as exc:
            return AnalysisReport(validation, Verdict.NOT_STRUCTURE_REVERSIBLE,
                                  reason=f"interior walk is not irreducible: {exc}")
        except ReversalError as exc:
            return AnalysisReport(validation, Verdict.NOT_STRUCTURE_REVERSIBLE, singular=None,
                                  reason=str(exc))
        dist = singular_stationary(sol)
        balance = verify_stationary_equations(model, dist).max_residual
        verdict = Verdict.SINGULAR if balance <= BALANCE_TOL else Verdict.NOT_STRUCTURE_REVERSIBLE
        return AnalysisReport(validation, verdict, singular=sol, stationary=dist,
                              balance_residual=balance)
    conditions = check_conditions(model, tol)
    report = AnalysisReport(validation, Verdict.NOT_STRUCTURE_REVERSIBLE, conditions=conditions)
    failed = [n for n in ("a1", "a2", "a3") if not getattr(conditions, n).passed]
    if failed:
        report.reason = f"conditions {', '.join(failed)} fail"
        return report
    constants = conditions.constants
    try:
        report.solution = solve_eta(model, constants, tol=max(tol, 1e-10))
    except GeometryError as exc:
        report.reason = f"decay-rate equations: {exc}"
        return report
    dist = build_stationary(constants, report.solution)
    report.stationary = dist
    report.balance_residual = verify_stationary_equations(model, dist).max_residual
    report.product_form = product_form_test(constants, tol)
    if report.balance_residual > max(BALANCE_TOL, tol):
        report.reason = "closed form fails the balance equations"
        return report
    report.verdict = Verdict.STRUCTURE_REVERSIBLE
    return report
