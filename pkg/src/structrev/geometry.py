"""Generating-function boundaries and the decay-rate equations.

Each face gets a Laurent polynomial ``gamma(z1, z2)`` stored as a 3x3
coefficient array ``w`` with ``gamma = sum w[i+1, j+1] z1**i z2**j``.  The
decay rates are ``eta = 1/z`` for a point ``z > 1`` where all four
polynomials equal one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import Face, ReflectingWalkModel
from .reversibility import ReversibilityConstants

SOLVER_TOL = 1e-10
CURVE_TOL = 1e-10
Z_MIN = 1.0 + 1e-9
Z_MAX = 1e6
SCAN_POINTS = 4096
SEGMENT_POINTS = 512
FACE_ORDER = (Face.INTERIOR, Face.HORIZONTAL, Face.VERTICAL, Face.ORIGIN)


class GeometryError(Exception):
    def details(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class NonpositiveArgument(GeometryError, ValueError):
    pass


class NoRoot(GeometryError):
    pass


class CrossCheckFailed(GeometryError):
    def __init__(self, message: str, candidates: list[dict]):
        super().__init__(message)
        self.candidates = candidates

    def details(self) -> dict:
        d = super().details()
        d["candidates"] = self.candidates
        return d


class MultipleRoots(GeometryError):
    def __init__(self, solutions: list["GeometricSolution"]):
        super().__init__(f"{len(solutions)} verified decay-rate pairs")
        self.solutions = solutions


def gamma_coefficients(model: ReflectingWalkModel, constants: ReversibilityConstants | None,
                       face: Face) -> np.ndarray:
    """Coefficient array of ``gamma_face``; only the interior needs no constants."""
    pp = model.pplus.probs
    if face is Face.INTERIOR:
        return pp.copy()
    if constants is None:
        raise ValueError(f"gamma for face {face.value} needs the reversibility constants")
    c1, c2 = constants.c1plus, constants.c2plus
    w = np.zeros((3, 3))
    if face is Face.HORIZONTAL:
        w[:, 1] = model.p1.probs[:, 1]
        w[:, 0] = c1 * pp[:, 0]
    elif face is Face.VERTICAL:
        w[1, :] = model.p2.probs[1, :]
        w[0, :] = c2 * pp[0, :]
    else:
        # c0/c1plus collapses to c10 (resp. c0/c2plus to c20) when that constant is positive
        c10, c20, c0 = constants.c10, constants.c20, constants.c0
        if c10 > 0:
            h, v = c10, c10 * c1 / c2
        else:
            h, v = c20 * c2 / c1, c20
        w[1, 1] = model.p0(0, 0)
        w[0, 1] = h * model.p1(-1, 0)
        w[1, 0] = v * model.p2(0, -1)
        w[0, 0] = c0 * model.pplus(-1, -1)
    return w


def _evaluate(w: np.ndarray, z1: float, z2: float) -> float:
    terms = [w[i + 1, j + 1] * z1 ** i * z2 ** j
             for i in (-1, 0, 1) for j in (-1, 0, 1) if w[i + 1, j + 1] != 0.0]
    return math.fsum(terms)


def gamma(model: ReflectingWalkModel, constants: ReversibilityConstants | None,
          face: Face, z1: float, z2: float) -> float:
    if not (z1 > 0 and z2 > 0):
        raise NonpositiveArgument(f"gamma needs positive arguments, got ({z1}, {z2})")
    return _evaluate(gamma_coefficients(model, constants, face), z1, z2)


# ---------------------------------------------------------------- solver

@dataclass
class GeometricSolution:
    eta1: float
    eta2: float
    residuals: dict[str, float]
    multiplicity_note: str = ""
    alternatives: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if not (0 < self.eta1 < 1 and 0 < self.eta2 < 1):
            raise ValueError(f"decay rates must lie in (0,1), got ({self.eta1}, {self.eta2})")

    @property
    def z(self) -> tuple[float, float]:
        return 1.0 / self.eta1, 1.0 / self.eta2

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        return {"eta1": self.eta1, "eta2": self.eta2, "residuals": self.residuals,
                "multiplicity_note": self.multiplicity_note}


def _face_residuals(ws: dict[Face, np.ndarray], z1: float, z2: float) -> dict[str, float]:
    return {face.value: abs(_evaluate(ws[face], z1, z2) - 1.0) for face in FACE_ORDER}


def _horizontal_inverse_z2(w1: np.ndarray, z1: float) -> float:
    """1/z2 solving gamma_1(z1, z2) = 1, which is linear in 1/z2."""
    a = w1[0, 1] / z1 + w1[1, 1] + w1[2, 1] * z1
    b = w1[0, 0] / z1 + w1[1, 0] + w1[2, 0] * z1
    if b <= 0.0:
        return math.nan
    return float((1.0 - a) / b)


def _feasible_segments(w1: np.ndarray) -> list[tuple[float, float]]:
    """Maximal z1 intervals in the search box on which ``0 < 1/z2 < 1``.

    The endpoints solve ``gamma_1(z1, 1) = 1`` or ``gamma_1(z1, z2) = 1`` as
    ``z2 -> inf``; both are quadratics in z1 after multiplying through.
    """
    quads = [(w1[2, 1] + w1[2, 0], w1[1, 1] + w1[1, 0] - 1.0, w1[0, 1] + w1[0, 0]),
             (w1[2, 1], w1[1, 1] - 1.0, w1[0, 1])]
    cuts = {Z_MIN, Z_MAX}
    for coeffs in quads:
        for r in np.roots(np.trim_zeros(np.array(coeffs), "f")) if any(coeffs) else []:
            if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and Z_MIN < r.real < Z_MAX:
                cuts.add(float(r.real))
    cuts = sorted(cuts)
    segments = []
    for lo, hi in zip(cuts, cuts[1:]):
        mid = math.sqrt(lo * hi)
        if 0.0 < _horizontal_inverse_z2(w1, mid) < 1.0:
            segments.append((lo, hi))
    return segments


def solve_eta(model: ReflectingWalkModel, constants: ReversibilityConstants,
              tol: float = SOLVER_TOL, strict: bool = False) -> GeometricSolution:
    """Find ``eta`` in (0,1)^2 with all four gamma polynomials equal to one at ``1/eta``.

    The horizontal equation fixes ``1/z2`` as a function of ``z1``; the
    interior equation then becomes one-dimensional.  It is scanned on a log
    grid of ``z1``, densified on each interval where ``0 < 1/z2 < 1``; sign
    changes are refined with Brent's method, tangential roots are picked up
    by local minimisation of ``|f|``, and every candidate is cross-checked
    against the vertical and origin equations.
    """
    ws = {face: gamma_coefficients(model, constants, face) for face in Face}
    w1, wp = ws[Face.HORIZONTAL], ws[Face.INTERIOR]

    def f(z1: float) -> float:
        inv = _horizontal_inverse_z2(w1, z1)
        if not (0.0 < inv < 1.0):
            return math.nan
        return _evaluate(wp, z1, 1.0 / inv) - 1.0

    grid = [1.0 + np.geomspace(Z_MIN - 1.0, Z_MAX - 1.0, SCAN_POINTS)]
    for lo, hi in _feasible_segments(w1):
        # narrow windows would otherwise hold only a point or two of the global grid
        grid.append(1.0 + np.geomspace(lo - 1.0, hi - 1.0, SEGMENT_POINTS)[1:-1])
    grid = np.unique(np.concatenate(grid))
    vals = np.array([f(z) for z in grid])
    roots: list[float] = []
    for k in range(len(grid) - 1):
        a, b = vals[k], vals[k + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(grid[k])
        elif a * b < 0.0:
            roots.append(brentq(f, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if np.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(grid[-1])
    # tangential roots: |f| has a local minimum without a sign change
    for k in range(1, len(grid) - 1):
        trio = vals[k - 1:k + 2]
        if not np.all(np.isfinite(trio)) or np.sign(trio[0]) != np.sign(trio[2]):
            continue
        if abs(trio[1]) <= abs(trio[0]) and abs(trio[1]) <= abs(trio[2]) and abs(trio[1]) < 1e-3:
            sgn = 1.0 if trio[1] > 0 else -1.0
            res = minimize_scalar(lambda z: sgn * f(z), bounds=(grid[k - 1], grid[k + 1]),
                                  method="bounded", options={"xatol": 1e-14})
            if abs(f(res.x)) <= tol:
                roots.append(float(res.x))

    candidates = []
    for z1 in sorted(set(roots)):
        inv = _horizontal_inverse_z2(w1, z1)
        if not (0.0 < inv < 1.0):
            continue
        z2 = 1.0 / inv
        if any(abs(z1 - c[0]) <= 1e-9 * z1 and abs(z2 - c[1]) <= 1e-9 * z2 for c in candidates):
            continue
        candidates.append((z1, z2, _face_residuals(ws, z1, z2)))
    if not candidates:
        raise NoRoot("no point with z1, z2 > 1 solves the interior and horizontal equations")
    verified = [c for c in candidates if max(c[2].values()) <= tol]
    if not verified:
        raise CrossCheckFailed(
            "interior/horizontal roots fail the vertical or origin equation",
            [{"z1": z1, "z2": z2, "residuals": res} for z1, z2, res in candidates])
    solutions = [GeometricSolution(1.0 / z1, 1.0 / z2, res) for z1, z2, res in verified]
    if len(solutions) > 1:
        if strict:
            raise MultipleRoots(solutions)
        best = min(solutions, key=lambda s: s.max_residual)
        best.multiplicity_note = (f"{len(solutions)} verified roots; returned the one with the "
                                  f"smallest residual")
        best.alternatives = [(s.eta1, s.eta2) for s in solutions if s is not best]
        return best
    return solutions[0]


# ---------------------------------------------------------------- curves

@dataclass
class CurveSample:
    face: Face
    points: list[tuple[float, float]]
    skipped: int = 0

    def residuals(self, model, constants) -> list[float]:
        w = gamma_coefficients(model, constants, self.face)
        return [abs(_evaluate(w, z1, z2) - 1.0) for z1, z2 in self.points]


def _polish(w: np.ndarray, z1: float, z2: float) -> float:
    """Newton steps in z2 on gamma - 1 to squeeze out rounding from the closed form."""
    for _ in range(3):
        g = _evaluate(w, z1, z2) - 1.0
        dg = math.fsum(j * w[i + 1, j + 1] * z1 ** i * z2 ** (j - 1)
                       for i in (-1, 0, 1) for j in (-1, 1))
        if g == 0.0 or dg == 0.0:
            break
        step = g / dg
        if not (z2 - step > 0):
            break
        z2 -= step
    return z2


def sample_curve(model: ReflectingWalkModel, constants: ReversibilityConstants | None,
                 face: Face, z1_grid) -> CurveSample:
    """Points of ``gamma_face(z1, z2) = 1`` above each abscissa.

    Multiplying by ``z2`` turns every face equation into a quadratic (linear
    for the boundary faces, whose ``z2`` coefficient may vanish); all
    positive real roots are kept if they verify to ``CURVE_TOL``.  A face
    without vertical moves can hold the whole line above ``z1``; that line
    is sampled at the grid values themselves.
    """
    w = gamma_coefficients(model, constants, face)
    line = sorted(float(z) for z in z1_grid if z > 0)
    points: list[tuple[float, float]] = []
    skipped = 0
    for z1 in z1_grid:
        z1 = float(z1)
        if not z1 > 0:
            skipped += 1
            continue
        col = [math.fsum(w[i + 1, j + 1] * z1 ** i for i in (-1, 0, 1)) for j in (-1, 0, 1)]
        c, b, a = col[0], col[1] - 1.0, col[2]
        found = []
        if a == 0.0 and c == 0.0:
            if abs(b) <= CURVE_TOL:
                points.extend((z1, z2) for z2 in line)
            else:
                skipped += 1
            continue
        if a == 0.0:
            if b != 0.0:
                found.append(-c / b)
        else:
            disc = b * b - 4.0 * a * c
            if disc >= 0.0:
                sq = math.sqrt(disc)
                # numerically stable pair of roots
                q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq
                if q != 0.0:
                    found.extend([q / a, c / q])
                else:
                    found.append(0.0)
        kept = []
        for z2 in found:
            if not (z2 > 0 and math.isfinite(z2)):
                continue
            z2 = _polish(w, z1, z2)
            if abs(_evaluate(w, z1, z2) - 1.0) <= CURVE_TOL and all(abs(z2 - k) > 1e-12 * z2 for k in kept):
                kept.append(z2)
        if not kept:
            skipped += 1
        points.extend((z1, z2) for z2 in sorted(kept))
    return CurveSample(face, points, skipped)


def write_curve_csv(sample: CurveSample, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["face", "z1", "z2"])
        for z1, z2 in sample.points:
            writer.writerow([sample.face.value, repr(z1), repr(z2)])
