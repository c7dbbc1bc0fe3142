"""Proportionality constants between faces and the conditions built on them.

The interior law is compared with each axis law on the steps that move away
from that axis, and each axis law with the origin law on the steps that move
along it.  A single common ratio per comparison gives the constants
``c1plus``, ``c2plus`` (axis vs. interior) and ``c10``, ``c20`` (origin vs.
axis).  Zero entries are structural: they are compared exactly, never with a
tolerance.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .model import ReflectingWalkModel

DEFAULT_TOL = 1e-9


class ReversibilityError(Exception):
    """Base class for failures to extract a constant from a model."""

    def details(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class RatioMismatch(ReversibilityError):
    def __init__(self, face: str, index: int, observed: float, expected: float,
                 ratios: dict[int, float]):
        self.face, self.index = face, index
        self.observed, self.expected = observed, expected
        self.ratios = ratios
        super().__init__(f"{face}: ratio at index {index} is {observed:.6g}, "
                         f"reference ratio is {expected:.6g}")

    def details(self) -> dict:
        d = super().details()
        d.update(face=self.face, index=self.index, observed=self.observed,
                 expected=self.expected, ratios={str(k): v for k, v in self.ratios.items()})
        return d


class SupportMismatch(ReversibilityError):
    def __init__(self, face: str, index: int, numerator: float, denominator: float):
        self.face, self.index = face, index
        self.numerator, self.denominator = numerator, denominator
        super().__init__(f"{face}: index {index} is zero on one side only "
                         f"({numerator:.6g} vs {denominator:.6g})")

    def details(self) -> dict:
        d = super().details()
        d.update(face=self.face, index=self.index, numerator=self.numerator,
                 denominator=self.denominator)
        return d


class AllZeroRow(ReversibilityError):
    """Every interior step leaving an axis has probability zero (singular walk)."""

    def __init__(self, face: str):
        self.face = face
        super().__init__(f"{face}: all interior probabilities of the compared row are zero")


class NotIrreducible(ReversibilityError):
    """Both origin constants vanish, which rules out an irreducible walk."""


def _common_ratio(pairs: dict[int, tuple[float, float]], tol: float, name: str) -> float | None:
    """Common value of num/den over ``pairs``; None when every entry is zero.

    The entry with the largest denominator is the reference so small
    denominators never set the scale.
    """
    for idx, (num, den) in pairs.items():
        if (num == 0.0) != (den == 0.0):
            raise SupportMismatch(name, idx, num, den)
    live = {idx: num / den for idx, (num, den) in pairs.items() if den > 0.0}
    if not live:
        return None
    ref_idx = max(live, key=lambda idx: pairs[idx][1])
    ref = live[ref_idx]
    for idx, r in live.items():
        if abs(r - ref) > tol * abs(ref):
            raise RatioMismatch(name, idx, r, ref, live)
    return ref


def face_interior_constants(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Return ``(c1plus, c2plus)`` with ``p1(i,1) = c1plus * pplus(i,1)`` and
    ``p2(1,i) = c2plus * pplus(1,i)`` for i in {-1, 0, 1}."""
    p1, p2, pp = model.p1, model.p2, model.pplus
    c1 = _common_ratio({i: (p1(i, 1), pp(i, 1)) for i in (-1, 0, 1)}, tol, "Horizontal/Interior")
    if c1 is None:
        raise AllZeroRow("Horizontal/Interior")
    c2 = _common_ratio({i: (p2(1, i), pp(1, i)) for i in (-1, 0, 1)}, tol, "Vertical/Interior")
    if c2 is None:
        raise AllZeroRow("Vertical/Interior")
    return c1, c2


def boundary_origin_constants(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Return ``(c10, c20)`` with ``p0(1,j) = c10 * p1(1,j)`` and
    ``p0(j,1) = c20 * p2(j,1)`` for j in {0, 1}.

    A constant is zero when both compared rows vanish; both zero is an error.
    """
    p0, p1, p2 = model.p0, model.p1, model.p2
    c10 = _common_ratio({j: (p0(1, j), p1(1, j)) for j in (0, 1)}, tol, "Origin/Horizontal")
    c20 = _common_ratio({j: (p0(j, 1), p2(j, 1)) for j in (0, 1)}, tol, "Origin/Vertical")
    c10 = 0.0 if c10 is None else c10
    c20 = 0.0 if c20 is None else c20
    if c10 == 0.0 and c20 == 0.0:
        raise NotIrreducible("c10 = c20 = 0: the origin never moves along an axis")
    return c10, c20


@dataclass(frozen=True)
class ReversibilityConstants:
    c1plus: float
    c2plus: float
    c10: float
    c20: float
    tolerance_used: float = DEFAULT_TOL

    def __post_init__(self):
        if not (self.c1plus > 0 and self.c2plus > 0):
            raise ValueError("c1plus and c2plus must be positive")
        if self.c10 < 0 or self.c20 < 0 or (self.c10 == 0 and self.c20 == 0):
            raise ValueError("c10, c20 must be nonnegative and not both zero")

    @property
    def c0(self) -> float:
        return max(self.c10 * self.c1plus, self.c20 * self.c2plus)

    def to_dict(self) -> dict:
        return {"c1plus": self.c1plus, "c2plus": self.c2plus, "c10": self.c10,
                "c20": self.c20, "c0": self.c0, "tolerance_used": self.tolerance_used}


def reversibility_constants(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> ReversibilityConstants:
    c1, c2 = face_interior_constants(model, tol)
    c10, c20 = boundary_origin_constants(model, tol)
    return ReversibilityConstants(c1, c2, c10, c20, tol)


def a3_products(constants: ReversibilityConstants) -> tuple[float, float]:
    return constants.c10 * constants.c1plus, constants.c20 * constants.c2plus


def check_a3(constants: ReversibilityConstants, tol: float = DEFAULT_TOL) -> bool:
    """Both routes from the origin into the interior must carry the same constant."""
    if constants.c10 == 0.0 or constants.c20 == 0.0:
        return True
    left, right = a3_products(constants)
    return abs(left - right) <= tol * max(left, right)


# ---------------------------------------------------------------- reports

class Status(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class Check:
    status: Status
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_dict(self) -> dict:
        return {"status": self.status.value, "details": self.details}


@dataclass
class ConditionReport:
    a1: Check
    a2: Check
    a3: Check
    b1: Check
    b2: Check
    constants: ReversibilityConstants | None = None

    def to_dict(self) -> dict:
        out = {name: getattr(self, name).to_dict() for name in ("a1", "a2", "a3", "b1", "b2")}
        if self.constants is not None:
            out["constants"] = self.constants.to_dict()
        return out


def _ratio_witness(model: ReflectingWalkModel) -> dict:
    p1, p2, pp = model.p1, model.p2, model.pplus

    def ratios(pairs):
        return {str(k): (n / d if d > 0 else None) for k, (n, d) in pairs.items()}

    return {
        "horizontal": ratios({i: (p1(i, 1), pp(i, 1)) for i in (-1, 0, 1)}),
        "vertical": ratios({i: (p2(1, i), pp(1, i)) for i in (-1, 0, 1)}),
    }


def is_flexible_template(model: ReflectingWalkModel) -> bool:
    """Interior without diagonal (1,1)/(-1,-1) moves and no (1,1) moves on the boundary."""
    pp = model.pplus
    if pp(1, 1) != 0 or pp(-1, -1) != 0:
        return False
    if any(model.face(f)(1, 1) != 0 for f in (model.p0.face, model.p1.face, model.p2.face)):
        return False
    return all(v > 0 for v in (pp(1, 0), pp(0, 1), pp(-1, 1), pp(1, -1)))


def check_flexible_boundary(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> tuple[Check, Check]:
    """The two boundary conditions of a queueing network flexible at the boundary.

    The interior supplies ``lambda1 = pplus(1,0)``, ``lambda2 = pplus(0,1)``,
    ``mu1 r12 = pplus(-1,1)`` and ``mu2 r21 = pplus(1,-1)``.
    """
    if not is_flexible_template(model):
        na = Check(Status.NOT_APPLICABLE, {"reason": "model is not flexible at the boundary"})
        return na, Check(Status.NOT_APPLICABLE, dict(na.details))
    p0, p1, p2, pp = model.p0, model.p1, model.p2, model.pplus

    def close(a, b):
        return abs(a - b) <= tol * max(abs(a), abs(b))

    h_obs = p1(0, 1) / p1(-1, 1) if p1(-1, 1) > 0 else float("inf")
    h_ref = pp(0, 1) / pp(-1, 1)
    v_obs = p2(1, 0) / p2(1, -1) if p2(1, -1) > 0 else float("inf")
    v_ref = pp(1, 0) / pp(1, -1)
    b1_ok = close(h_obs, h_ref) and close(v_obs, v_ref)
    b1 = Check(Status.PASS if b1_ok else Status.FAIL,
               {"horizontal": [h_obs, h_ref], "vertical": [v_obs, v_ref]})
    h_iff = (p1(1, 0) == 0) == (p0(1, 0) == 0)
    v_iff = (p2(0, 1) == 0) == (p0(0, 1) == 0)
    b2 = Check(Status.PASS if h_iff and v_iff else Status.FAIL,
               {"horizontal": h_iff, "vertical": v_iff})
    return b1, b2


def check_conditions(model: ReflectingWalkModel, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Evaluate (a1)-(a3), (b1), (b2); failures are recorded, not raised."""
    constants = None
    c1 = c2 = None
    try:
        c1, c2 = face_interior_constants(model, tol)
        a1 = Check(Status.PASS, {"c1plus": c1, "c2plus": c2, **_ratio_witness(model)})
    except ReversibilityError as exc:
        a1 = Check(Status.FAIL, {**exc.details(), **_ratio_witness(model)})
    try:
        c10, c20 = boundary_origin_constants(model, tol)
        a2 = Check(Status.PASS, {"c10": c10, "c20": c20})
    except ReversibilityError as exc:
        c10 = c20 = None
        a2 = Check(Status.FAIL, exc.details())
    if c1 is not None and c10 is not None:
        constants = ReversibilityConstants(c1, c2, c10, c20, tol)
        left, right = a3_products(constants)
        ok = check_a3(constants, tol)
        a3 = Check(Status.PASS if ok else Status.FAIL, {"c10*c1plus": left, "c20*c2plus": right})
    else:
        a3 = Check(Status.NOT_APPLICABLE, {"reason": "constants unavailable"})
    b1, b2 = check_flexible_boundary(model, tol)
    return ConditionReport(a1, a2, a3, b1, b2, constants)
