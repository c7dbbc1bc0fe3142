"""Two-dimensional skip-free reflecting random walks on the quarter plane.

A model is four step distributions on {-1, 0, 1}^2, one per region of the
state space: the origin, the horizontal axis {(n, 0); n >= 1}, the vertical
axis {(0, n); n >= 1} and the interior {n1, n2 >= 1}.  Probabilities are
stored as 3x3 arrays indexed ``[i + 1, j + 1]`` for the step ``(i, j)``.
"""
from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

SUM_TOL = 1e-12
STEPS: tuple[tuple[int, int], ...] = tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))

# Radius of the partial-sum search used for the free-walk check.
SEMIGROUP_RADIUS = 16
SEMIGROUP_MAX_LENGTH = 32
# Box side for the chain-irreducibility check; doubled twice before giving up.
CHAIN_BOX = 6


class ModelError(ValueError):
    """Raised for malformed or inconsistent model documents."""


class Face(enum.Enum):
    ORIGIN = "Origin"
    HORIZONTAL = "Horizontal"
    VERTICAL = "Vertical"
    INTERIOR = "Interior"

    @property
    def key(self) -> str:
        return _FACE_KEYS[self]

    def allows(self, i: int, j: int) -> bool:
        """Whether the step (i, j) keeps a walker on this face inside the quadrant."""
        if self is Face.ORIGIN:
            return i >= 0 and j >= 0
        if self is Face.HORIZONTAL:
            return j >= 0
        if self is Face.VERTICAL:
            return i >= 0
        return True


_FACE_KEYS = {
    Face.ORIGIN: "p_origin",
    Face.HORIZONTAL: "p_face1",
    Face.VERTICAL: "p_face2",
    Face.INTERIOR: "p_plus",
}


def face_of(n1: int, n2: int) -> Face:
    if n1 < 0 or n2 < 0:
        raise ValueError(f"state ({n1}, {n2}) is outside the quadrant")
    if n1 == 0 and n2 == 0:
        return Face.ORIGIN
    if n2 == 0:
        return Face.HORIZONTAL
    if n1 == 0:
        return Face.VERTICAL
    return Face.INTERIOR


def step_key(i: int, j: int) -> str:
    return f"{i},{j}"


def parse_step_key(key: str) -> tuple[int, int]:
    try:
        a, b = key.split(",")
        i, j = int(a), int(b)
    except ValueError:
        raise ModelError(f"unknown step key {key!r}") from None
    if i not in (-1, 0, 1) or j not in (-1, 0, 1):
        raise ModelError(f"unknown step key {key!r}")
    return i, j


@dataclass(frozen=True, eq=False)
class FaceDistribution:
    """Step distribution used while the walk sits on ``face``."""

    face: Face
    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float).reshape(3, 3)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def __call__(self, i: int, j: int) -> float:
        return float(self.probs[i + 1, j + 1])

    def __eq__(self, other):
        if not isinstance(other, FaceDistribution):
            return NotImplemented
        return self.face is other.face and np.array_equal(self.probs, other.probs)

    def total(self) -> float:
        return float(np.sum(self.probs))

    def support(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in STEPS if self.probs[i + 1, j + 1] > 0]

    def as_dict(self) -> dict[str, float]:
        return {step_key(i, j): float(self.probs[i + 1, j + 1])
                for i, j in STEPS if self.probs[i + 1, j + 1] != 0.0}

    @classmethod
    def from_mapping(cls, face: Face, probs: Mapping) -> "FaceDistribution":
        arr = np.zeros((3, 3))
        for key, value in probs.items():
            i, j = parse_step_key(key) if isinstance(key, str) else tuple(key)
            arr[i + 1, j + 1] = float(value)
        return cls(face, arr)


@dataclass(frozen=True, eq=False)
class ReflectingWalkModel:
    p0: FaceDistribution
    p1: FaceDistribution
    p2: FaceDistribution
    pplus: FaceDistribution
    label: str = ""

    def face(self, face: Face) -> FaceDistribution:
        return {Face.ORIGIN: self.p0, Face.HORIZONTAL: self.p1,
                Face.VERTICAL: self.p2, Face.INTERIOR: self.pplus}[face]

    def at(self, n1: int, n2: int) -> FaceDistribution:
        """Step distribution in force at state (n1, n2)."""
        return self.face(face_of(n1, n2))

    def faces(self) -> tuple[FaceDistribution, ...]:
        return self.p0, self.p1, self.p2, self.pplus

    def transpose(self) -> "ReflectingWalkModel":
        """Swap the coordinate axes (and with them the two boundary faces)."""
        return ReflectingWalkModel(
            FaceDistribution(Face.ORIGIN, self.p0.probs.T),
            FaceDistribution(Face.HORIZONTAL, self.p2.probs.T),
            FaceDistribution(Face.VERTICAL, self.p1.probs.T),
            FaceDistribution(Face.INTERIOR, self.pplus.probs.T),
            self.label + " (transposed)" if self.label else "",
        )

    def __eq__(self, other):
        if not isinstance(other, ReflectingWalkModel):
            return NotImplemented
        return all(a == b for a, b in zip(self.faces(), other.faces()))

    @classmethod
    def from_arrays(cls, p0, p1, p2, pplus, label: str = "") -> "ReflectingWalkModel":
        return cls(FaceDistribution(Face.ORIGIN, p0), FaceDistribution(Face.HORIZONTAL, p1),
                   FaceDistribution(Face.VERTICAL, p2), FaceDistribution(Face.INTERIOR, pplus),
                   label)


# ---------------------------------------------------------------- documents

def model_from_dict(doc: Mapping, strict: bool = True) -> ReflectingWalkModel:
    """Build a model from a decoded JSON document.

    With ``strict`` the document must describe a valid model; otherwise only
    the structure is checked and :func:`validate` reports the rest.
    """
    if not isinstance(doc, Mapping):
        raise ModelError("model document must be a JSON object")
    allowed = {"label"} | set(_FACE_KEYS.values())
    unknown = set(doc) - allowed
    if unknown:
        raise ModelError(f"unknown top-level keys: {sorted(unknown)}")
    faces = {}
    for face in Face:
        entry = doc.get(face.key)
        if not isinstance(entry, Mapping):
            raise ModelError(f"missing or malformed face {face.key!r}")
        for key, value in entry.items():
            parse_step_key(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ModelError(f"{face.key}[{key!r}] is not a number")
        faces[face] = FaceDistribution.from_mapping(face, entry)
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ModelError("label must be a string")
    model = ReflectingWalkModel(faces[Face.ORIGIN], faces[Face.HORIZONTAL],
                                faces[Face.VERTICAL], faces[Face.INTERIOR], label)
    if strict:
        problems = _face_violations(model)
        if problems:
            raise ModelError("; ".join(desc for _, desc in problems))
    return model


def parse_model(document: str, strict: bool = True) -> ReflectingWalkModel:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed document: {exc}") from None
    return model_from_dict(doc, strict=strict)


def model_to_dict(model: ReflectingWalkModel) -> dict:
    doc: dict = {"label": model.label} if model.label else {}
    for face in Face:
        doc[face.key] = model.face(face).as_dict()
    return doc


def dump_model(model: ReflectingWalkModel, indent: int | None = 2) -> str:
    return json.dumps(model_to_dict(model), indent=indent)


def load_model(path, strict: bool = True) -> ReflectingWalkModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), strict=strict)


# ---------------------------------------------------------------- validation

class Irreducibility(enum.Enum):
    YES = "Yes"
    NO = "No"
    UNDETERMINED = "Undetermined"


@dataclass
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)
    chain_irreducible: Irreducibility = Irreducibility.UNDETERMINED
    free_walk_irreducible: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"face": f, "description": d} for f, d in self.violations],
            "chain_irreducible": self.chain_irreducible.value,
            "free_walk_irreducible": self.free_walk_irreducible,
        }


def _face_violations(model: ReflectingWalkModel) -> list[tuple[str, str]]:
    out = []
    for dist in model.faces():
        name = dist.face.value
        p = dist.probs
        if not np.all(np.isfinite(p)):
            out.append((name, f"face {name} has non-finite probabilities"))
            continue
        for i, j in STEPS:
            v = p[i + 1, j + 1]
            if v < 0.0 or v > 1.0:
                out.append((name, f"face {name} step {step_key(i, j)} has probability {v:.12g} outside [0,1]"))
            elif v > 0.0 and not dist.face.allows(i, j):
                out.append((name, f"face {name} puts mass {v:.12g} on step {step_key(i, j)} leaving the quadrant"))
        total = dist.total()
        if abs(total - 1.0) > SUM_TOL:
            out.append((name, f"face {name} sums to {total:.12g}"))
    return out


def validate(model: ReflectingWalkModel) -> ValidationReport:
    """Report every violated model invariant plus both irreducibility checks."""
    report = ValidationReport(violations=_face_violations(model))
    if report.ok:
        report.free_walk_irreducible = check_free_walk_irreducible(model)
        report.chain_irreducible = check_chain_irreducible(model)
    return report


def check_free_walk_irreducible(model: ReflectingWalkModel) -> bool:
    """Whether the interior step law, with the boundary removed, is irreducible on Z^2.

    The walk is irreducible iff the additive semigroup generated by the
    interior support is all of Z^2, i.e. iff each of the four unit vectors is
    a sum of support steps.  Partial sums are explored breadth-first inside
    ``[-SEMIGROUP_RADIUS, SEMIGROUP_RADIUS]^2`` and up to
    ``SEMIGROUP_MAX_LENGTH`` steps.  With steps of sup-norm at most one every
    minimal witness is far shorter than this.
    """
    pp = model.pplus
    axis = [pp(1, 0), pp(-1, 0), pp(0, 1), pp(0, -1)]
    support = [s for s in pp.support() if s != (0, 0)]
    if not support:
        return False
    # diagonal steps alone keep n1 + n2 even
    if not any(a > 0 for a in axis):
        return False
    targets = {(1, 0), (-1, 0), (0, 1), (0, -1)}
    seen = {(0, 0): 0}
    queue = deque([(0, 0)])
    reached = set()
    while queue:
        x = queue.popleft()
        depth = seen[x]
        if depth >= SEMIGROUP_MAX_LENGTH:
            continue
        for i, j in support:
            y = (x[0] + i, x[1] + j)
            if y in targets:
                reached.add(y)
                if reached == targets:
                    return True
            if max(abs(y[0]), abs(y[1])) > SEMIGROUP_RADIUS or y in seen:
                continue
            seen[y] = depth + 1
            queue.append(y)
    return reached == targets


def _box_reachability(model: ReflectingWalkModel, k: int):
    """Forward/backward reachability from the origin inside the box {0..k}^2."""
    size = k + 1
    succ = [[[] for _ in range(size)] for _ in range(size)]
    pred = [[[] for _ in range(size)] for _ in range(size)]
    for a in range(size):
        for b in range(size):
            dist = model.at(a, b)
            for i, j in dist.support():
                c, d = a + i, b + j
                if 0 <= c < size and 0 <= d < size and (i, j) != (0, 0):
                    succ[a][b].append((c, d))
                    pred[c][d].append((a, b))

    def sweep(adj):
        mark = np.zeros((size, size), dtype=bool)
        mark[0, 0] = True
        queue = deque([(0, 0)])
        while queue:
            a, b = queue.popleft()
            for c, d in adj[a][b]:
                if not mark[c, d]:
                    mark[c, d] = True
                    queue.append((c, d))
        return mark

    return sweep(succ), sweep(pred)


def _closed_axis(model: ReflectingWalkModel) -> bool:
    """An axis (with the origin) that the walk can never leave."""
    p0, p1, p2 = model.p0, model.p1, model.p2
    horizontal = all(p0(i, 1) == 0 for i in (0, 1)) and all(p1(i, 1) == 0 for i in (-1, 0, 1))
    vertical = all(p0(1, j) == 0 for j in (0, 1)) and all(p2(1, j) == 0 for j in (-1, 0, 1))
    return horizontal or vertical


def check_chain_irreducible(model: ReflectingWalkModel, box: int = CHAIN_BOX) -> Irreducibility:
    """Finite-box irreducibility check of the reflecting walk.

    Paths that stay inside a box are genuine paths of the walk, so a box in
    which every state reaches and is reached by the origin certifies the
    states of that box; face homogeneity carries the pattern outward.  The
    box is doubled twice before concluding.  ``No`` is returned when an axis
    is closed (a proof of reducibility) or when the same in-box obstruction
    persists at all three sizes; anything else is ``Undetermined``.
    """
    if _closed_axis(model):
        return Irreducibility.NO
    patterns = []
    for k in (box, 2 * box, 4 * box):
        fwd, bwd = _box_reachability(model, k)
        if fwd.all() and bwd.all():
            return Irreducibility.YES
        patterns.append((fwd[: box + 1, : box + 1].copy(), bwd[: box + 1, : box + 1].copy()))
    first = patterns[0]
    if all(np.array_equal(p[0], first[0]) and np.array_equal(p[1], first[1]) for p in patterns):
        return Irreducibility.NO
    return Irreducibility.UNDETERMINED
