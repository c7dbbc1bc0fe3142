"""Closed-form stationary distribution of a structure-reversible walk.

The distribution is geometric on each face::

    pi(0, 0)   = pi00
    pi(n, 0)   = k_h   * rate_h**n        * pi00      (n >= 1)
    pi(0, n)   = k_v   * rate_v**n        * pi00      (n >= 1)
    pi(n1, n2) = k_int * eta1**n1 * eta2**n2 * pi00   (n1, n2 >= 1)

Normally the axis rates equal the interior ones; the singular walk with
horizontal interior steps decays at its own rate along the horizontal axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GeometricSolution
from .model import ReflectingWalkModel
from .reversibility import ReversibilityConstants

BALANCE_RANGE = range(2, 6)


class BothConstantsZero(ValueError):
    pass


@dataclass(frozen=True)
class StationaryDistribution:
    pi00: float
    eta1: float
    eta2: float
    k_h: float
    k_v: float
    k_int: float
    rate_h: float | None = None
    rate_v: float | None = None

    def __post_init__(self):
        if self.rate_h is None:
            object.__setattr__(self, "rate_h", self.eta1)
        if self.rate_v is None:
            object.__setattr__(self, "rate_v", self.eta2)

    def __call__(self, n1: int, n2: int) -> float:
        return pi_at(self, n1, n2)

    def total_mass(self) -> float:
        """Sum over the whole quadrant, from the four geometric series."""
        return self.pi00 * _mass_factor(self)

    def grid(self, n_max: int) -> np.ndarray:
        """Array ``g[n1, n2] = pi(n1, n2)`` over ``{0..n_max}^2``."""
        n = np.arange(n_max + 1, dtype=float)
        g = self.k_int * np.outer(self.eta1 ** n, self.eta2 ** n)
        g[:, 0] = self.k_h * self.rate_h ** n
        g[0, :] = self.k_v * self.rate_v ** n
        g[0, 0] = 1.0
        return g * self.pi00

    def to_dict(self) -> dict:
        d = {"eta1": self.eta1, "eta2": self.eta2, "pi00": self.pi00,
             "k_h": self.k_h, "k_v": self.k_v, "k_int": self.k_int}
        if self.rate_h != self.eta1 or self.rate_v != self.eta2:
            d.update(rate_h=self.rate_h, rate_v=self.rate_v)
        return d


def _mass_factor(d: StationaryDistribution) -> float:
    e1, e2, a1, a2 = d.eta1, d.eta2, d.rate_h, d.rate_v
    return math.fsum([1.0, d.k_h * a1 / (1.0 - a1), d.k_v * a2 / (1.0 - a2),
                      d.k_int * e1 * e2 / ((1.0 - e1) * (1.0 - e2))])


def from_prefactors(eta1: float, eta2: float, k_h: float, k_v: float, k_int: float,
                    rate_h: float | None = None, rate_v: float | None = None) -> StationaryDistribution:
    """Normalise a geometric description whose ``pi00`` is not yet known."""
    probe = StationaryDistribution(1.0, eta1, eta2, k_h, k_v, k_int, rate_h, rate_v)
    return StationaryDistribution(1.0 / _mass_factor(probe), eta1, eta2, k_h, k_v, k_int,
                                  rate_h, rate_v)


def prefactors(constants: ReversibilityConstants) -> tuple[float, float, float]:
    c1, c2, c10, c20 = constants.c1plus, constants.c2plus, constants.c10, constants.c20
    if c10 > 0:
        return c10, c10 * c1 / c2, c10 * c1
    if c20 > 0:
        return c20 * c2 / c1, c20, c20 * c2
    raise BothConstantsZero("c10 = c20 = 0")


def build_stationary(constants: ReversibilityConstants, sol: GeometricSolution) -> StationaryDistribution:
    k_h, k_v, k_int = prefactors(constants)
    return from_prefactors(sol.eta1, sol.eta2, k_h, k_v, k_int)


def pi_at(dist: StationaryDistribution, n1: int, n2: int) -> float:
    if n1 < 0 or n2 < 0:
        return 0.0
    if n1 == 0 and n2 == 0:
        return dist.pi00
    if n2 == 0:
        return dist.k_h * dist.rate_h ** n1 * dist.pi00
    if n1 == 0:
        return dist.k_v * dist.rate_v ** n2 * dist.pi00
    return dist.k_int * dist.eta1 ** n1 * dist.eta2 ** n2 * dist.pi00


# ---------------------------------------------------------------- verification

def representative_states() -> list[tuple[int, int]]:
    states = [(0, 0), (1, 0), (0, 1), (1, 1)]
    for n in BALANCE_RANGE:
        states += [(n, 0), (0, n), (n, 1), (1, n)]
    states += [(a, b) for a in BALANCE_RANGE for b in BALANCE_RANGE]
    return states


def balance_residual(model: ReflectingWalkModel, pi, state: tuple[int, int]) -> float:
    """``sum_{n'} pi(n') P(n' -> n) - pi(n)`` at ``n = state``."""
    n1, n2 = state
    terms = [-pi(n1, n2)]
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            m1, m2 = n1 - i, n2 - j
            if m1 < 0 or m2 < 0:
                continue
            p = model.at(m1, m2)(i, j)
            if p:
                terms.append(pi(m1, m2) * p)
    return math.fsum(terms)


@dataclass
class BalanceReport:
    residuals: dict[tuple[int, int], float]

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals.values())

    @property
    def worst_state(self) -> tuple[int, int]:
        return max(self.residuals, key=lambda s: abs(self.residuals[s]))

    def ok(self, tol: float) -> bool:
        return self.max_residual <= tol

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "worst_state": list(self.worst_state),
                "states": len(self.residuals)}


def verify_stationary_equations(model: ReflectingWalkModel, dist, states=None) -> BalanceReport:
    pi = dist if callable(dist) else (lambda a, b: pi_at(dist, a, b))
    states = representative_states() if states is None else states
    return BalanceReport({s: balance_residual(model, pi, s) for s in states})


def product_form_test(constants: ReversibilityConstants, tol: float = 1e-9) -> bool:
    def close(a, b):
        return abs(a - b) <= tol * max(abs(a), abs(b))

    c1, c2, c10, c20 = constants.c1plus, constants.c2plus, constants.c10, constants.c20
    return (c20 == 0 or close(c1, c20)) and (c10 == 0 or close(c2, c10))


def fit_geometric_prefactors(model: ReflectingWalkModel, eta1: float, eta2: float,
                             states=None) -> StationaryDistribution:
    """Least-squares prefactors making the geometric form with rates ``eta`` balance.

    Used for walks that are not structure-reversible but may still have a
    geometric stationary distribution.  Balance is linear in
    ``(1, k_h, k_v, k_int)`` once ``pi00`` is scaled to one.
    """
    states = representative_states() if states is None else states

    def basis(a: int, b: int) -> np.ndarray:
        v = np.zeros(4)
        if a == 0 and b == 0:
            v[0] = 1.0
        elif b == 0:
            v[1] = eta1 ** a
        elif a == 0:
            v[2] = eta2 ** b
        else:
            v[3] = eta1 ** a * eta2 ** b
        return v

    rows = []
    for n1, n2 in states:
        r = -basis(n1, n2)
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                m1, m2 = n1 - i, n2 - j
                if m1 >= 0 and m2 >= 0:
                    r = r + basis(m1, m2) * model.at(m1, m2)(i, j)
        rows.append(r)
    a = np.array(rows)
    k, *_ = np.linalg.lstsq(a[:, 1:], -a[:, 0], rcond=None)
    return from_prefactors(eta1, eta2, float(k[0]), float(k[1]), float(k[2]))
