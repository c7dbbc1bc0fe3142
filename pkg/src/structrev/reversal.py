"""Time reversal under a stationary distribution, and the singular walk.

The reversed chain moves from ``n`` to ``n'`` with probability
``pi(n') P(n' -> n) / pi(n)``.  For a structure-reversible walk this kernel
depends on the state only through its face.  Because ``pi`` is geometric on
each face, every ratio ``pi(n')/pi(n)`` is one of finitely many constants
once ``n`` is at distance two from the axes, so agreement at a few
representative states per face implies agreement everywhere.  States at
distance one from an axis are checked separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import STEPS, Face, FaceDistribution, ReflectingWalkModel, model_to_dict
from .stationary import StationaryDistribution, from_prefactors, pi_at

ROW_SUM_TOL = 1e-10
HOMOGENEITY_TOL = 1e-9

# Representative states per face; the first one defines the face law.
REPRESENTATIVES = {
    Face.INTERIOR: [(3, 3), (4, 5), (1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (5, 1), (1, 5)],
    Face.HORIZONTAL: [(3, 0), (5, 0), (1, 0), (2, 0)],
    Face.VERTICAL: [(0, 3), (0, 5), (0, 1), (0, 2)],
    Face.ORIGIN: [(0, 0)],
}


class ReversalError(Exception):
    def details(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class ZeroMass(ReversalError):
    pass


class NotHomogeneous(ReversalError):
    def __init__(self, face: Face, discrepancy: float, state: tuple[int, int]):
        self.face, self.discrepancy, self.state = face, discrepancy, state
        super().__init__(f"reversed kernel on face {face.value} differs by {discrepancy:.3g} "
                         f"at state {state}")

    def details(self) -> dict:
        d = super().details()
        d.update(face=self.face.value, discrepancy=self.discrepancy, state=list(self.state))
        return d


class NotApplicable(ReversalError):
    pass


class NotStructureReversible(ReversalError):
    pass


def _as_pi(dist):
    if isinstance(dist, StationaryDistribution):
        return lambda a, b: pi_at(dist, a, b)
    return dist


def reversed_kernel_at(model: ReflectingWalkModel, dist, state: tuple[int, int]) -> np.ndarray:
    """3x3 array of reversed step probabilities out of ``state``."""
    pi = _as_pi(dist)
    n1, n2 = state
    here = pi(n1, n2)
    if not here > 0:
        raise ZeroMass(f"pi{state} = {here}")
    out = np.zeros((3, 3))
    for i, j in STEPS:
        m1, m2 = n1 + i, n2 + j
        if m1 < 0 or m2 < 0:
            continue
        p = model.at(m1, m2)(-i, -j)
        if p:
            out[i + 1, j + 1] = pi(m1, m2) * p / here
    return out


@dataclass
class ReversedModel:
    model: ReflectingWalkModel
    homogeneity_residual: float
    row_sum_residual: float

    def is_self_reversed(self, original: ReflectingWalkModel, tol: float = 1e-10) -> bool:
        return all(np.max(np.abs(a.probs - b.probs)) <= tol
                   for a, b in zip(self.model.faces(), original.faces()))

    def to_document(self) -> dict:
        """Model document with 15 significant digits, each face summing to one."""
        faces = []
        for dist in self.model.faces():
            arr = np.array([[float(f"{v:.15g}") for v in row] for row in dist.probs])
            k = np.unravel_index(np.argmax(arr), arr.shape)
            arr[k] = 0.0
            arr[k] = 1.0 - math.fsum(arr.ravel())
            faces.append(FaceDistribution(dist.face, arr))
        return model_to_dict(ReflectingWalkModel(*faces, label=self.model.label))


def build_reversed_model(model: ReflectingWalkModel, dist, tol: float = HOMOGENEITY_TOL) -> ReversedModel:
    """Assemble the reversed walk, certifying that its kernel is face-homogeneous."""
    kernels = {}
    worst = 0.0
    for face, states in REPRESENTATIVES.items():
        ref = reversed_kernel_at(model, dist, states[0])
        for s in states[1:]:
            gap = float(np.max(np.abs(reversed_kernel_at(model, dist, s) - ref)))
            if gap > tol:
                raise NotHomogeneous(face, gap, s)
            worst = max(worst, gap)
        kernels[face] = ref
    row = max(abs(math.fsum(k.ravel()) - 1.0) for k in kernels.values())
    label = f"reversed {model.label}".strip() if model.label else "reversed"
    rev = ReflectingWalkModel(*(FaceDistribution(f, kernels[f]) for f in
                                (Face.ORIGIN, Face.HORIZONTAL, Face.VERTICAL, Face.INTERIOR)),
                              label=label)
    return ReversedModel(rev, worst, row)


# ---------------------------------------------------------------- singular walk

@dataclass
class SingularSolution:
    eta1: float
    eta2: float
    alpha1: float
    c2plus: float
    c10: float
    c20: float
    required_zeros_ok: bool
    transposed: bool = False

    def to_dict(self) -> dict:
        return {"eta1": self.eta1, "eta2": self.eta2, "alpha1": self.alpha1,
                "c2plus": self.c2plus, "c10": self.c10, "c20": self.c20,
                "required_zeros_ok": self.required_zeros_ok, "transposed": self.transposed}


def _horizontal_only(model: ReflectingWalkModel) -> bool:
    pp = model.pplus
    moves_vertically = any(pp(i, j) != 0 for i in (-1, 0, 1) for j in (-1, 1))
    return not moves_vertically and all(pp(i, 0) > 0 for i in (-1, 0, 1))


def _analyze_horizontal(model: ReflectingWalkModel) -> SingularSolution:
    p0, p1, p2, pp = model.p0, model.p1, model.p2, model.pplus
    zeros_ok = (all(p1(i, 1) == 0 for i in (-1, 0, 1))
                and all(p2(1, j) == 0 for j in (-1, 1)) and p0(1, 1) == 0)
    if not zeros_ok:
        raise NotStructureReversible("a boundary step that the reversed walk cannot mirror has positive mass")
    denominators = {"p1(1,0)": p1(1, 0), "p1(-1,0)": p1(-1, 0), "p2(0,1)": p2(0, 1),
                    "p2(0,-1)": p2(0, -1)}
    missing = [k for k, v in denominators.items() if not v > 0]
    if missing:
        raise NotStructureReversible(f"zero probabilities where a rate is needed: {missing}")
    sol = SingularSolution(
        eta1=pp(1, 0) / pp(-1, 0), eta2=p2(0, 1) / p2(0, -1), alpha1=p1(1, 0) / p1(-1, 0),
        c2plus=p2(1, 0) / pp(1, 0), c10=p0(1, 0) / p1(1, 0), c20=p0(0, 1) / p2(0, 1),
        required_zeros_ok=True)
    bad = [k for k in ("eta1", "eta2", "alpha1") if not 0 < getattr(sol, k) < 1]
    if bad:
        raise NotStructureReversible(f"rates outside (0,1): {bad}")
    if not (sol.c2plus > 0 and sol.c10 > 0 and sol.c20 > 0):
        raise NotStructureReversible("boundary constants must be positive")
    return sol


def analyze_singular(model: ReflectingWalkModel) -> SingularSolution:
    """Decay rates of a walk whose interior moves only along one axis.

    Interior steps that are vertical only are handled by swapping the axes;
    the returned rates then refer to the swapped model (``transposed``).
    """
    if _horizontal_only(model):
        return _analyze_horizontal(model)
    if _horizontal_only(model.transpose()):
        sol = _analyze_horizontal(model.transpose())
        sol.transposed = True
        return sol
    raise NotApplicable("interior steps are not confined to one axis")


def singular_stationary(sol: SingularSolution) -> StationaryDistribution:
    """Stationary distribution of the singular walk, in the model's own orientation."""
    k_h, k_v, k_int = sol.c10, sol.c20, sol.c20 * sol.c2plus
    if not sol.transposed:
        return from_prefactors(sol.eta1, sol.eta2, k_h, k_v, k_int, rate_h=sol.alpha1)
    return from_prefactors(sol.eta2, sol.eta1, k_v, k_h, k_int, rate_v=sol.alpha1)
