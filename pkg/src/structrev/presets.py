"""Concrete model families: Jackson networks, their boundary variants, and fixed instances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (Face, FaceDistribution, Irreducibility, ReflectingWalkModel,
                    check_chain_irreducible, check_free_walk_irreducible, validate)
from .reversibility import ReversibilityConstants
from .stationary import fit_geometric_prefactors

PARAM_TOL = 1e-12
INSTANCE_NAMES = ("jackson-extra-5.10", "appendixD-product-nonreversible", "singular-A-demo")


class PresetError(ValueError):
    pass


class DegenerateRouting(PresetError):
    pass


class NegativeProbability(PresetError):
    pass


class UnknownInstance(PresetError, KeyError):
    def __str__(self):
        return f"unknown instance {self.args[0]!r}; known: {', '.join(preset_names())}"


def _array(entries: dict[tuple[int, int], float]) -> np.ndarray:
    arr = np.zeros((3, 3))
    for (i, j), v in entries.items():
        arr[i + 1, j + 1] = v
    return arr


def _model(p0, p1, p2, pp, label: str) -> ReflectingWalkModel:
    return ReflectingWalkModel.from_arrays(_array(p0), _array(p1), _array(p2), _array(pp), label)


# ---------------------------------------------------------------- Jackson networks

@dataclass(frozen=True)
class JacksonParameters:
    """Two-node discrete-time network; ``r = (r10, r11, r12, r20, r21, r22)``.

    ``r_k0`` is the probability of leaving the network after service at node
    k and ``r_kl`` of joining node l.  Routing entries may be zero; arrival
    and service probabilities must be positive.
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    r: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))
        if len(self.r) != 6:
            raise PresetError("routing table needs six entries r10, r11, r12, r20, r21, r22")
        if min(self.lambda1, self.lambda2, self.mu1, self.mu2) <= 0:
            raise PresetError("arrival and service probabilities must be positive")
        if min(self.r) < 0:
            raise PresetError("routing probabilities must be nonnegative")
        if abs(self.lambda1 + self.lambda2 + self.mu1 + self.mu2 - 1.0) > PARAM_TOL:
            raise PresetError("lambda1 + lambda2 + mu1 + mu2 must equal 1")
        if abs(sum(self.r[:3]) - 1.0) > PARAM_TOL or abs(sum(self.r[3:]) - 1.0) > PARAM_TOL:
            raise PresetError("each routing row must sum to 1")

    @property
    def r10(self): return self.r[0]

    @property
    def r11(self): return self.r[1]

    @property
    def r12(self): return self.r[2]

    @property
    def r20(self): return self.r[3]

    @property
    def r21(self): return self.r[4]

    @property
    def r22(self): return self.r[5]


@dataclass(frozen=True)
class TrafficSolution:
    alpha1: float
    alpha2: float
    rho1: float
    rho2: float

    @property
    def stable(self) -> bool:
        return self.rho1 < 1 and self.rho2 < 1


def solve_traffic(params: JacksonParameters) -> TrafficSolution:
    """Throughputs from ``alpha = lambda + alpha R`` for the two-node network."""
    p = params
    d = (1.0 - p.r11) * (1.0 - p.r22) - p.r12 * p.r21
    if d <= 0:
        raise DegenerateRouting(f"traffic equations are singular (determinant {d:.3g})")
    a1 = (p.lambda1 * (1.0 - p.r22) + p.lambda2 * p.r21) / d
    a2 = (p.lambda2 * (1.0 - p.r11) + p.lambda1 * p.r12) / d
    defect = max(abs(p.lambda1 + a2 * p.r21 + a1 * p.r11 - a1),
                 abs(p.lambda2 + a1 * p.r12 + a2 * p.r22 - a2))
    if defect > PARAM_TOL * max(1.0, a1, a2):
        raise DegenerateRouting(f"traffic solution fails substitution by {defect:.3g}")
    return TrafficSolution(a1, a2, a1 / p.mu1, a2 / p.mu2)


def _interior(p: JacksonParameters) -> dict:
    return {(1, 0): p.lambda1, (0, 1): p.lambda2, (-1, 0): p.mu1 * p.r10,
            (-1, 1): p.mu1 * p.r12, (0, -1): p.mu2 * p.r20, (1, -1): p.mu2 * p.r21,
            (0, 0): p.mu1 * p.r11 + p.mu2 * p.r22}


def jackson(params: JacksonParameters, label: str = "jackson") -> ReflectingWalkModel:
    """Discrete-time Jackson network; an idle server's slot becomes a self-loop."""
    p = params
    pp = _interior(p)
    p1 = {(1, 0): p.lambda1, (0, 1): p.lambda2, (-1, 0): p.mu1 * p.r10,
          (-1, 1): p.mu1 * p.r12, (0, 0): p.mu1 * p.r11 + p.mu2}
    p2 = {(1, 0): p.lambda1, (0, 1): p.lambda2, (0, -1): p.mu2 * p.r20,
          (1, -1): p.mu2 * p.r21, (0, 0): p.mu1 + p.mu2 * p.r22}
    p0 = {(1, 0): p.lambda1, (0, 1): p.lambda2, (0, 0): p.mu1 + p.mu2}
    return _model(p0, p1, p2, pp, label)


@dataclass(frozen=True)
class ExtraArrivalParameters:
    """Extra arrivals when a node is empty: ``lambda2_1`` joins node 2 while node 2
    is empty and node 1 busy, ``lambda1_2`` symmetrically, ``lambda1_0`` and
    ``lambda2_0`` when both are empty."""

    base: JacksonParameters
    lambda2_1: float = 0.0
    lambda1_2: float = 0.0
    lambda1_0: float = 0.0
    lambda2_0: float = 0.0

    def __post_init__(self):
        b = self.base
        if min(self.lambda2_1, self.lambda1_2, self.lambda1_0, self.lambda2_0) < 0:
            raise NegativeProbability("extra arrival probabilities must be nonnegative")
        if self.lambda2_1 > b.mu2 + PARAM_TOL:
            raise NegativeProbability("lambda2_1 exceeds mu2")
        if self.lambda1_2 > b.mu1 + PARAM_TOL:
            raise NegativeProbability("lambda1_2 exceeds mu1")
        if self.lambda1_0 + self.lambda2_0 > b.mu1 + b.mu2 + PARAM_TOL:
            raise NegativeProbability("lambda1_0 + lambda2_0 exceeds mu1 + mu2")


def jackson_extra_arrivals(params: ExtraArrivalParameters, label: str = "jackson-extra") -> ReflectingWalkModel:
    """Jackson interior; empty servers donate their slot to extra arrivals.

    On the horizontal axis (node 2 empty) an internal 1 -> 1 routing is
    redirected to node 2, so it joins the 1 -> 2 move.
    """
    b, e = params.base, params
    pp = _interior(b)
    p1 = {(1, 0): b.lambda1, (0, 1): b.lambda2 + e.lambda2_1, (-1, 0): b.mu1 * b.r10,
          (-1, 1): b.mu1 * (b.r12 + b.r11), (0, 0): b.mu2 - e.lambda2_1}
    p2 = {(0, 1): b.lambda2, (1, 0): b.lambda1 + e.lambda1_2, (0, -1): b.mu2 * b.r20,
          (1, -1): b.mu2 * (b.r21 + b.r22), (0, 0): b.mu1 - e.lambda1_2}
    p0 = {(1, 0): b.lambda1 + e.lambda1_0, (0, 1): b.lambda2 + e.lambda2_0,
          (0, 0): b.mu1 + b.mu2 - e.lambda1_0 - e.lambda2_0}
    for face in (p0, p1, p2):
        for step, v in face.items():
            if v < 0:
                raise NegativeProbability(f"step {step} gets probability {v:.3g}")
    return _model(p0, p1, p2, pp, label)


def extra_arrival_constants(lambda1: float, lambda2: float, lambda2_1: float, lambda1_2: float,
                            lambda1_0: float, lambda2_0: float) -> ReversibilityConstants:
    """Constants of the extra-arrival network in closed form (valid when the
    boundary ratio conditions hold)."""
    return ReversibilityConstants(1 + lambda2_1 / lambda2, 1 + lambda1_2 / lambda1,
                                  1 + lambda1_0 / lambda1, 1 + lambda2_0 / lambda2)


def reversible_extra_arrivals(base: JacksonParameters, lambda1_0: float) -> ExtraArrivalParameters:
    """Extra arrivals chosen so that the network is structure-reversible.

    Needs ``lambda1 = lambda2 = lambda`` and ``r12/r10 = r21/r20``.  The
    axis arrivals are ``lambda2_1 = (r11/r12) lambda`` and
    ``lambda1_2 = (r22/r21) lambda``, and ``lambda2_0`` follows from
    ``(lambda + lambda1_0)/(lambda + lambda2_0) = (lambda + lambda1_2)/(lambda + lambda2_1)``.
    """
    b = base
    if abs(b.lambda1 - b.lambda2) > PARAM_TOL:
        raise PresetError("needs equal exogenous arrival probabilities")
    if abs(b.r12 * b.r20 - b.r21 * b.r10) > PARAM_TOL:
        raise PresetError("needs r12/r10 = r21/r20")
    lam = b.lambda1
    l21 = b.r11 / b.r12 * lam
    l12 = b.r22 / b.r21 * lam
    l20 = (lam + lambda1_0) * (lam + l21) / (lam + l12) - lam
    return ExtraArrivalParameters(b, l21, l12, lambda1_0, l20)


# ---------------------------------------------------------------- fixed instances

# Four-digit values of the non-product-form example; they do not sum
# exactly (lambda + mu = 1.0001, r1. = 0.9996).
ROUNDED_EXTRA = {
    "lambda1": 0.0667, "lambda2": 0.0667, "mu1": 0.4000, "mu2": 0.4667,
    "r10": 0.368, "r11": 0.3158, "r12": 0.3158,
    "r20": 0.3784, "r21": 0.3243, "r22": 0.2973,
    "lambda2_1": 0.0667, "lambda1_2": 0.0611, "lambda1_0": 0.2104, "lambda2_0": 0.2225,
}

# Exact rationals whose four-digit roundings are the values above.
EXTRA_BASE = JacksonParameters(
    lambda1=1 / 15, lambda2=1 / 15, mu1=2 / 5, mu2=7 / 15,
    r=(7 / 19, 6 / 19, 6 / 19, 14 / 37, 12 / 37, 11 / 37))
EXTRA_LAMBDA1_0 = 0.2104


def extra_instance() -> ReflectingWalkModel:
    params = reversible_extra_arrivals(EXTRA_BASE, EXTRA_LAMBDA1_0)
    return jackson_extra_arrivals(params, label="jackson-extra-5.10")


# Product-form but not structure-reversible walk, rounded to six digits.
ROUNDED_PRODUCT_NONREVERSIBLE = {
    Face.ORIGIN: {(0, 0): 0.0840821, (1, 0): 0.49716, (0, 1): 0.188503, (1, 1): 0.230255},
    Face.HORIZONTAL: {(0, 0): 0.0840821, (1, 0): 0.126693, (0, 1): 0.216346, (1, 1): 0.15534,
                      (-1, 0): 0.1205, (-1, 1): 0.297039},
    Face.VERTICAL: {(0, 0): 0.363151, (1, 0): 0.267565, (0, 1): 0.0246397, (1, 1): 0.025552,
                    (0, -1): 0.223309, (1, -1): 0.0957827},
    Face.INTERIOR: {(0, 0): 0.469511, (1, 0): 0.0449179, (0, 1): 0.00497654, (1, 1): 0.012212,
                    (-1, 0): 0.398019, (-1, 1): 0.0045338, (0, -1): 0.0380278,
                    (1, -1): 0.0278023, (-1, -1): 0.0},
}
PRODUCT_NONREVERSIBLE_ETA = (0.3, 0.2)


def _product_balance_rows(entries, eta, k_h, k_v):
    """Linear constraints (face sums, balance) on the listed probabilities."""
    e1, e2 = eta

    def pi(a, b):
        if a < 0 or b < 0:
            return 0.0
        ka = 1.0 if a == 0 else k_h * e1 ** a
        kb = 1.0 if b == 0 else k_v * e2 ** b
        return ka * kb

    def face_of(a, b):
        if a == 0:
            return Face.ORIGIN if b == 0 else Face.VERTICAL
        return Face.HORIZONTAL if b == 0 else Face.INTERIOR

    rows, rhs = [], []
    for face in Face:
        rows.append([1.0 if f is face else 0.0 for f, _ in entries])
        rhs.append(1.0)
    for n in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)]:
        row = np.zeros(len(entries))
        for k, (f, (i, j)) in enumerate(entries):
            m = (n[0] - i, n[1] - j)
            if m[0] >= 0 and m[1] >= 0 and face_of(*m) is f:
                row[k] = pi(*m) / pi(*n)
        rows.append(row)
        rhs.append(1.0)
    return np.array(rows), np.array(rhs)


def repaired_product_nonreversible() -> ReflectingWalkModel:
    """The rounded product-form walk with its rounding removed.

    The rounded faces miss one by up to 6e-7 and the product form balances
    only to about 1e-8.  Axis prefactors are fitted by least squares, then
    the smallest relative change to the rounded nonzero entries is found
    that makes every face sum to one and the product form with rates
    (0.3, 0.2) balance exactly.  Zero entries stay zero.
    """
    table = ROUNDED_PRODUCT_NONREVERSIBLE
    entries = [(f, s) for f in Face for s, v in table[f].items() if v > 0]
    p = np.array([table[f][s] for f, s in entries])
    raw = ReflectingWalkModel.from_arrays(*(_array(table[f]) for f in
                                           (Face.ORIGIN, Face.HORIZONTAL, Face.VERTICAL, Face.INTERIOR)))
    fit = fit_geometric_prefactors(raw, *PRODUCT_NONREVERSIBLE_ETA)
    k_h, k_v = fit.k_h, fit.k_v
    a, b = _product_balance_rows(entries, PRODUCT_NONREVERSIBLE_ETA, k_h, k_v)
    scaled = a * p
    u = np.linalg.pinv(scaled) @ (b - a @ p)
    fixed = p * (1.0 + u)
    faces = {f: {} for f in Face}
    for (f, s), v in zip(entries, fixed):
        faces[f][s] = float(v)
    return _model(faces[Face.ORIGIN], faces[Face.HORIZONTAL], faces[Face.VERTICAL],
                  faces[Face.INTERIOR], "appendixD-product-nonreversible")


def singular_demo() -> ReflectingWalkModel:
    """Interior moves horizontally only; vertical motion happens on the vertical axis."""
    return _model(
        {(1, 0): 0.2, (0, 1): 0.1, (0, 0): 0.7},
        {(1, 0): 0.2, (-1, 0): 0.4, (0, 0): 0.4},
        {(0, 1): 0.1, (0, -1): 0.3, (1, 0): 0.2, (0, 0): 0.4},
        {(1, 0): 0.2, (-1, 0): 0.5, (0, 0): 0.3},
        "singular-A-demo")


JACKSON_STANDARD = JacksonParameters(lambda1=0.10, lambda2=0.08, mu1=0.42, mu2=0.40,
                                     r=(0.5, 0.2, 0.3, 0.6, 0.25, 0.15))

_INSTANCES = {
    "jackson-extra-5.10": extra_instance,
    "appendixD-product-nonreversible": repaired_product_nonreversible,
    "singular-A-demo": singular_demo,
}
_EXTRA_PRESETS = {
    "jackson-standard": lambda: jackson(JACKSON_STANDARD, label="jackson-standard"),
}


def paper_instance(name: str) -> ReflectingWalkModel:
    try:
        return _INSTANCES[name]()
    except KeyError:
        raise UnknownInstance(name) from None


def preset(name: str) -> ReflectingWalkModel:
    """Any named model: the fixed instances plus a standard Jackson network."""
    if name in _EXTRA_PRESETS:
        return _EXTRA_PRESETS[name]()
    return paper_instance(name)


def preset_names() -> list[str]:
    return list(_INSTANCES) + list(_EXTRA_PRESETS)


# ---------------------------------------------------------------- other families

def symmetric_simple_walk() -> ReflectingWalkModel:
    """Nearest-neighbour walk; a blocked step becomes a self-loop."""
    q = 0.25
    return _model(
        {(1, 0): q, (0, 1): q, (0, 0): 2 * q},
        {(1, 0): q, (-1, 0): q, (0, 1): q, (0, 0): q},
        {(0, 1): q, (0, -1): q, (1, 0): q, (0, 0): q},
        {(1, 0): q, (-1, 0): q, (0, 1): q, (0, -1): q},
        "symmetric-simple-walk")


@dataclass
class SampledModel:
    model: ReflectingWalkModel
    z: tuple[float, float]
    constants: ReversibilityConstants
    attempts: int = field(default=1)


def _axis_face(pp: np.ndarray, c: float, za: float, zb: float, rng,
               no_outward: bool = False) -> np.ndarray | None:
    """Horizontal-axis law with ``gamma_1(za, zb) = 1`` and moves away from the
    axis equal to ``c`` times the interior ones; None if infeasible.

    ``no_outward`` forces the step (1, 0) to zero."""
    up = pp[:, 2]
    s = 1.0 - c * up.sum()
    down = (pp[2, 0] * za + pp[1, 0] + pp[0, 0] / za) / zb
    t = c * (up.sum() - down)
    g = za / (za - 1.0)
    lo, hi = max(0.0, t / (za - 1.0)), (s + t * g) / (1.0 + za)
    if not (s > 0 and lo < hi):
        return None
    if no_outward:
        if lo > 0:
            return None
        x = 0.0
    else:
        x = rng.uniform(lo, hi)
    y = x * za - t * g
    rest = s - x - y
    if y < 0 or rest < 0:
        return None
    face = np.zeros((3, 3))
    face[:, 2] = c * up
    face[2, 1], face[0, 1], face[1, 1] = x, y, rest
    return face


def sample_structure_reversible(rng: np.random.Generator, max_tries: int = 100_000) -> SampledModel:
    """Random model built to satisfy the structure-reversibility conditions.

    A point ``z > 1`` on the interior curve is drawn first; each axis law is
    then solved so that its own curve passes through ``z``, and the origin
    law is proportional to the axis laws.  Candidates that are not
    irreducible or not valid are rejected.
    """
    for attempt in range(1, max_tries + 1):
        branch = rng.random()
        pp = rng.dirichlet(np.ones(9)).reshape(3, 3)
        pp[rng.random((3, 3)) < 0.2] = 0.0
        if branch < 0.2:
            pp[2, 2] = 0.0  # an origin constant of zero rules out the (1,1) step
        if pp.sum() <= 0:
            continue
        pp /= pp.sum()
        z1 = math.exp(rng.uniform(math.log(1.05), math.log(6.0)))
        a = pp[0, 2] / z1 + pp[1, 2] + pp[2, 2] * z1
        b = pp[0, 1] / z1 + pp[1, 1] + pp[2, 1] * z1 - 1.0
        c = pp[0, 0] / z1 + pp[1, 0] + pp[2, 0] * z1
        if a <= 0 or c <= 0 or b * b - 4 * a * c < 0:
            continue
        roots = [(-b + sg * math.sqrt(b * b - 4 * a * c)) / (2 * a) for sg in (1, -1)]
        roots = [r for r in roots if 1.05 < r < 20.0]
        if not roots:
            continue
        z2 = roots[int(rng.integers(len(roots)))]
        up1, up2 = pp[:, 2].sum(), pp[2, :].sum()
        if up1 <= 0 or up2 <= 0:
            continue
        c1 = rng.uniform(0.05, 0.95) / up1
        c2 = rng.uniform(0.05, 0.95) / up2
        p1 = _axis_face(pp, c1, z1, z2, rng, no_outward=branch < 0.1)
        p2t = _axis_face(pp.T, c2, z2, z1, rng, no_outward=0.1 <= branch < 0.2)
        if p1 is None or p2t is None:
            continue
        p2 = p2t.T
        p0 = np.zeros((3, 3))
        if branch < 0.1:
            c10, c20 = 0.0, rng.uniform(0.05, 0.98) / p2[1, 2]
        elif branch < 0.2:
            c10, c20 = rng.uniform(0.05, 0.98) / p1[2, 1], 0.0
        else:
            k = p1[2, 1] + p1[2, 2] + c1 / c2 * p2[1, 2]
            if k <= 0:
                continue
            c10 = rng.uniform(0.05, 0.98) / k
            c20 = c10 * c1 / c2
        p0[2, 1] = c10 * p1[2, 1]
        p0[1, 2] = c20 * p2[1, 2]
        p0[2, 2] = c10 * p1[2, 2] if c10 > 0 else c20 * p2[2, 2]
        p0[1, 1] = 1.0 - p0.sum()
        if p0[1, 1] < 0:
            continue
        model = ReflectingWalkModel(
            FaceDistribution(Face.ORIGIN, p0), FaceDistribution(Face.HORIZONTAL, p1),
            FaceDistribution(Face.VERTICAL, p2), FaceDistribution(Face.INTERIOR, pp),
            label=f"sampled-{attempt}")
        if not validate(model).ok:
            continue
        if not check_free_walk_irreducible(model):
            continue
        if check_chain_irreducible(model) is not Irreducibility.YES:
            continue
        return SampledModel(model, (z1, z2), ReversibilityConstants(c1, c2, c10, c20), attempt)
    raise RuntimeError(f"no structure-reversible model found in {max_tries} attempts")
