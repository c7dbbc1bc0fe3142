"""Numerical ground truth: a truncated stationary solver and a seeded simulator.

Neither routine uses the closed form, so agreement with it is evidence.

The simulator draws from xorshift64* (Vigna, 2016) seeded through
splitmix64::

    splitmix64:   s += 0x9E3779B97F4A7C15
                  z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                  return z ^ (z >> 31)
    xorshift64*:  x ^= x >> 12; x ^= x << 25; x ^= x >> 27
                  return x * 0x2545F4914F6CDD1D
    uniform:      (r >> 11) * 2**-53

all arithmetic modulo 2**64.  The generator state is the first splitmix64
output for the seed (replaced by 1 if it is zero).  Each step draws one
uniform and picks the first step of the current face whose cumulative
probability, in ``(i, j)`` lexicographic order, exceeds it.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

from .model import Face, ReflectingWalkModel

MIN_GRID = 8
POWER_TOL = 1e-13
MAX_ITERS = 2_000_000
MASK64 = (1 << 64) - 1


class OracleError(Exception):
    pass


class NotConverged(OracleError):
    def __init__(self, max_iters: int, delta: float):
        super().__init__(f"power iteration did not converge in {max_iters} sweeps (last change {delta:.3g})")
        self.max_iters, self.delta = max_iters, delta


class WindowMismatch(OracleError):
    pass


@dataclass
class GridDistribution:
    values: np.ndarray
    residual: float = float("nan")
    outside: float = 0.0
    empty: bool = False
    iterations: int = 0

    @property
    def size(self) -> int:
        return self.values.shape[0] - 1

    def __call__(self, n1: int, n2: int) -> float:
        if 0 <= n1 <= self.size and 0 <= n2 <= self.size:
            return float(self.values[n1, n2])
        return 0.0

    def to_csv(self, path) -> None:
        write_grid_csv(self.values, path)


def write_grid_csv(values: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n1", "n2", "probability"])
        for n1 in range(values.shape[0]):
            for n2 in range(values.shape[1]):
                writer.writerow([n1, n2, repr(float(values[n1, n2]))])


def transition_tensor(model: ReflectingWalkModel, n: int) -> np.ndarray:
    """``P[a, b, i+1, j+1]``: probability of step (i, j) from state (a, b) on {0..n}^2."""
    p = np.empty((n + 1, n + 1, 3, 3))
    p[1:, 1:] = model.pplus.probs
    p[1:, 0] = model.p1.probs
    p[0, 1:] = model.p2.probs
    p[0, 0] = model.p0.probs
    return p


def _censor(p: np.ndarray) -> np.ndarray:
    n = p.shape[0] - 1
    q = p.copy()
    q[n, :, 2, :] = 0.0
    q[:, n, :, 2] = 0.0
    mass = q.sum(axis=(2, 3))
    return q / mass[:, :, None, None]


def _push(pi: np.ndarray, q: np.ndarray) -> np.ndarray:
    """One synchronous step ``pi Q`` on the grid (steps leaving the grid carry zero mass)."""
    n = pi.shape[0] - 1
    out = np.zeros_like(pi)
    for i in (-1, 0, 1):
        a0, a1 = max(0, -i), n + 1 - max(0, i)
        for j in (-1, 0, 1):
            b0, b1 = max(0, -j), n + 1 - max(0, j)
            out[a0 + i:a1 + i, b0 + j:b1 + j] += pi[a0:a1, b0:b1] * q[a0:a1, b0:b1, i + 1, j + 1]
    return out


def truncated_stationary(model: ReflectingWalkModel, n: int, tol: float = POWER_TOL,
                         max_iters: int = MAX_ITERS) -> GridDistribution:
    """Stationary vector of the walk censored to ``{0..n}^2``.

    Rows of states on the outer edge are renormalised over their in-grid
    steps.  The lazy iteration ``pi <- (pi + pi Q) / 2`` has the same fixed
    point and cannot oscillate on periodic chains.  ``residual`` is the
    largest balance defect of the untruncated walk over states strictly
    inside the grid.
    """
    if n < MIN_GRID:
        raise ValueError(f"grid size must be at least {MIN_GRID}")
    p = transition_tensor(model, n)
    q = _censor(p)
    pi = np.full((n + 1, n + 1), 1.0 / (n + 1) ** 2)
    delta = np.inf
    for it in range(1, max_iters + 1):
        new = 0.5 * (pi + _push(pi, q))
        new /= new.sum()
        delta = float(np.abs(new - pi).sum())
        pi = new
        if delta <= tol:
            break
    else:
        raise NotConverged(max_iters, delta)
    residual = float(np.max(np.abs(_push(pi, p) - pi)[:n, :n]))
    return GridDistribution(pi, residual=residual, iterations=it)


# ---------------------------------------------------------------- simulation

def splitmix64(state: int) -> tuple[int, int]:
    """Reference splitmix64: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def xorshift64star(x: int) -> tuple[int, int]:
    """Reference xorshift64*: returns (new_state, output)."""
    x ^= x >> 12
    x ^= (x << 25) & MASK64
    x ^= x >> 27
    return x, (x * 0x2545F4914F6CDD1D) & MASK64


def initial_state(seed: int) -> int:
    _, x = splitmix64(seed & MASK64)
    return x or 1


def cumulative_tables(model: ReflectingWalkModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-face cumulative step probabilities (faces in Face order) and step list."""
    steps = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=np.int64)
    faces = [Face.ORIGIN, Face.HORIZONTAL, Face.VERTICAL, Face.INTERIOR]
    cum = np.array([np.cumsum(model.face(f).probs.ravel()) for f in faces])
    # rounding must never leave a draw without a step, nor land on a zero one
    for row, f in enumerate(faces):
        last = np.flatnonzero(model.face(f).probs.ravel() > 0)[-1]
        cum[row, last:] = np.inf
    return cum, steps


@numba.njit(cache=True)
def _walk(cum, steps, x, n_steps, burn_in, n):
    counts = np.zeros((n + 1, n + 1), dtype=np.int64)
    outside = 0
    a = 0
    b = 0
    m12 = np.uint64(12)
    m25 = np.uint64(25)
    m27 = np.uint64(27)
    m11 = np.uint64(11)
    mult = np.uint64(0x2545F4914F6CDD1D)
    scale = 1.0 / 9007199254740992.0
    for t in range(n_steps):
        x ^= x >> m12
        x ^= x << m25
        x ^= x >> m27
        u = np.float64((x * mult) >> m11) * scale
        if a == 0:
            f = 0 if b == 0 else 2
        else:
            f = 1 if b == 0 else 3
        k = 0
        while cum[f, k] <= u:
            k += 1
        a += steps[k, 0]
        b += steps[k, 1]
        if t >= burn_in:
            if a <= n and b <= n:
                counts[a, b] += 1
            else:
                outside += 1
    return counts, outside


def simulate(model: ReflectingWalkModel, steps: int, seed: int, burn_in: int = 0,
             n: int = 60) -> GridDistribution:
    """Occupancy frequencies of one trajectory started at the origin.

    Frequencies are fractions of the ``steps - burn_in`` recorded steps;
    visits beyond ``{0..n}^2`` are pooled in ``outside``.
    """
    if steps < burn_in or burn_in < 0:
        raise ValueError("need 0 <= burn_in <= steps")
    cum, table = cumulative_tables(model)
    kept = steps - burn_in
    if kept == 0:
        return GridDistribution(np.zeros((n + 1, n + 1)), empty=True)
    counts, outside = _walk(cum, table, np.uint64(initial_state(seed)), steps, burn_in, n)
    return GridDistribution(counts / kept, outside=outside / kept)


# ---------------------------------------------------------------- comparison

def as_grid(values, n: int) -> np.ndarray:
    """Dense grid from a GridDistribution, an array, or a callable ``pi(n1, n2)``."""
    if isinstance(values, GridDistribution):
        return values.values
    if isinstance(values, np.ndarray):
        return values
    if hasattr(values, "grid"):
        return values.grid(n)
    return np.array([[values(a, b) for b in range(n + 1)] for a in range(n + 1)])


def total_variation(a, b, window: int | tuple[int, int]) -> float:
    """Half the L1 distance over ``{0..w1} x {0..w2}`` after renormalising both."""
    w1, w2 = (window, window) if isinstance(window, int) else window
    ga, gb = as_grid(a, max(w1, w2)), as_grid(b, max(w1, w2))
    for g in (ga, gb):
        if g.shape[0] <= w1 or g.shape[1] <= w2:
            raise WindowMismatch(f"window {w1}x{w2} exceeds grid {g.shape[0] - 1}x{g.shape[1] - 1}")
    ra, rb = ga[:w1 + 1, :w2 + 1], gb[:w1 + 1, :w2 + 1]
    sa, sb = ra.sum(), rb.sum()
    if not (sa > 0 and sb > 0):
        raise WindowMismatch("a distribution has no mass in the window")
    return 0.5 * float(np.abs(ra / sa - rb / sb).sum())
