"""Problem containers, the saddle-point operator, and KKT residuals.

A problem couples a separable objective with linear constraints
A x = b or A x >= b; the multiplier lives in the whole space for
equalities and in the nonnegative orthant for inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, UnsupportedCombination
from .linalg import spectral_norm_sq
from .prox import (
    Box,
    L1,
    Linear,
    NonnegativeOrthant,
    Quadratic,
    SeparableSum,
    WholeSpace,
    Zero,
    objective_value,
    project,
    prox_constrained,
)


class Sense(Enum):
    EQUALITY = "eq"
    INEQUALITY = "geq"


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"constraint matrix must be 2-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("constraint matrix has non-finite entries")
    return a


def _as_rhs(b, m: int) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (m,):
        raise DimensionMismatch(f"rhs has shape {b.shape}, expected ({m},)")
    if not np.all(np.isfinite(b)):
        raise ValueError("rhs has non-finite entries")
    return b


@dataclass(frozen=True, eq=False)
class Problem:
    """min theta(x) s.t. A x = b (or >= b), x in x_set."""

    theta: object
    x_set: object
    a: np.ndarray
    b: np.ndarray
    sense: Sense

    def __post_init__(self):
        a = _as_matrix(self.a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", _as_rhs(self.b, a.shape[0]))

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @cached_property
    def gram_norm(self) -> float:
        """||A^T A||, cached for step-size validity checks."""
        return spectral_norm_sq(self.a)


@dataclass(frozen=True, eq=False)
class Block:
    """One additive piece of a separable problem: theta_i, X_i and A_i."""

    theta: object
    x_set: object
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_matrix(self.a))

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True, eq=False)
class SeparableProblem:
    """min sum_i theta_i(x_i) s.t. sum_i A_i x_i = b (or >= b)."""

    blocks: tuple
    b: np.ndarray
    sense: Sense

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if len(blocks) < 1:
            raise DimensionMismatch("at least one block is required")
        m = blocks[0].a.shape[0]
        for blk in blocks:
            if blk.a.shape[0] != m:
                raise DimensionMismatch("blocks disagree on the constraint row count")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "b", _as_rhs(self.b, m))

    @property
    def m(self) -> int:
        return self.blocks[0].a.shape[0]

    @property
    def n(self) -> int:
        return sum(blk.n for blk in self.blocks)

    @property
    def block_dims(self) -> tuple:
        return tuple(blk.n for blk in self.blocks)

    def split(self, x: np.ndarray) -> list:
        """Views of the stacked primal vector, one per block."""
        if x.shape != (self.n,):
            raise DimensionMismatch(f"x has shape {x.shape}, expected ({self.n},)")
        out, at = [], 0
        for blk in self.blocks:
            out.append(x[at : at + blk.n])
            at += blk.n
        return out

    @cached_property
    def block_gram_norms(self) -> tuple:
        return tuple(spectral_norm_sq(blk.a) for blk in self.blocks)


@dataclass(frozen=True, eq=False)
class PrimalDualPoint:
    """A primal/multiplier pair (x, lambda)."""

    x: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.lam])

    @staticmethod
    def from_array(w: np.ndarray, n: int) -> "PrimalDualPoint":
        return PrimalDualPoint(w[:n], w[n:])


@dataclass(frozen=True)
class KktResidual:
    primal: float
    dual: float
    complementarity: float

    def max(self) -> float:
        return max(self.primal, self.dual, self.complementarity)

    def within(self, tol: float) -> bool:
        return self.max() <= tol


def multiplier_set(prob):
    """The set the multiplier ranges over."""
    return WholeSpace() if prob.sense is Sense.EQUALITY else NonnegativeOrthant()


def coupling(prob, x: np.ndarray) -> np.ndarray:
    """A x - b, with A read blockwise for separable problems."""
    if isinstance(prob, SeparableProblem):
        acc = np.zeros(prob.m)
        for blk, xi in zip(prob.blocks, prob.split(x)):
            acc += blk.a @ xi
        return acc - prob.b
    return prob.a @ x - prob.b


def total_objective(prob, x: np.ndarray) -> float:
    """theta(x), summed over blocks for separable problems."""
    if isinstance(prob, SeparableProblem):
        return float(sum(objective_value(blk.theta, xi) for blk, xi in zip(prob.blocks, prob.split(x))))
    return objective_value(prob.theta, x)


def vi_operator(prob, w: PrimalDualPoint) -> np.ndarray:
    """The saddle-point operator F(w) = (-A^T lambda, A x - b), stacked."""
    if isinstance(prob, SeparableProblem):
        tops = [-(blk.a.T @ w.lam) for blk in prob.blocks]
        return np.concatenate(tops + [coupling(prob, w.x)])
    return np.concatenate([-(prob.a.T @ w.lam), coupling(prob, w.x)])


def lagrangian(prob, w: PrimalDualPoint) -> float:
    """theta(x) - lambda^T (A x - b)."""
    return total_objective(prob, w.x) - float(w.lam @ coupling(prob, w.x))


def kkt_residual(prob, w: PrimalDualPoint) -> KktResidual:
    """Primal, dual and complementarity residual norms at w.

    The dual residual is the prox-based fixed-point gap
    ||x - prox(theta, X, 1, x + A^T lambda)||; it vanishes exactly at
    stationary points of the Lagrangian over X.
    """
    resid = coupling(prob, w.x)
    if prob.sense is Sense.EQUALITY:
        primal = float(np.linalg.norm(resid))
        comp = 0.0
    else:
        primal = float(np.linalg.norm(np.minimum(resid, 0.0)))
        comp = float(abs(w.lam @ resid))
    if isinstance(prob, SeparableProblem):
        gaps = []
        for blk, xi in zip(prob.blocks, prob.split(w.x)):
            target = prox_constrained(blk.theta, blk.x_set, 1.0, xi + blk.a.T @ w.lam)
            gaps.append(xi - target)
        dual = float(np.linalg.norm(np.concatenate(gaps)))
    else:
        target = prox_constrained(prob.theta, prob.x_set, 1.0, w.x + prob.a.T @ w.lam)
        dual = float(np.linalg.norm(w.x - target))
    return KktResidual(primal=primal, dual=dual, complementarity=comp)


def default_start(prob) -> PrimalDualPoint:
    """Zeros projected onto the primal set, with a zero multiplier."""
    if isinstance(prob, SeparableProblem):
        x0 = np.concatenate([project(blk.x_set, np.zeros(blk.n)) for blk in prob.blocks])
    else:
        x0 = project(prob.x_set, np.zeros(prob.n))
    return PrimalDualPoint(x0, np.zeros(prob.m))


def flatten_blocks(prob: SeparableProblem) -> Problem:
    """Merge a separable problem into an equivalent single-block problem.

    Used to feed block-structured instances to single-block methods.
    Quadratic/linear/zero blocks merge into one quadratic; otherwise all
    blocks must be coordinatewise separable and merge into a scalar sum.
    """
    a = np.hstack([blk.a for blk in prob.blocks])
    thetas = [blk.theta for blk in prob.blocks]
    if all(isinstance(t, (Quadratic, Linear, Zero)) for t in thetas):
        theta = _merge_quadratic(prob, thetas)
    elif all(_coordinatewise(t) for t in thetas):
        theta = SeparableSum(tuple(_scalar_parts(prob)))
    else:
        raise UnsupportedCombination("blocks do not merge into a supported objective")
    return Problem(theta, _merge_sets(prob), a, prob.b, prob.sense)


def _merge_quadratic(prob, thetas):
    n = prob.n
    p = np.zeros((n, n))
    c = np.zeros(n)
    at = 0
    for blk, t in zip(prob.blocks, thetas):
        if isinstance(t, Quadratic):
            p[at : at + blk.n, at : at + blk.n] = t.p
            c[at : at + blk.n] = t.c
        elif isinstance(t, Linear):
            c[at : at + blk.n] = t.c
        at += blk.n
    return Quadratic(p, c)


def _coordinatewise(theta) -> bool:
    if isinstance(theta, (Zero, L1, Linear, SeparableSum)):
        return True
    if isinstance(theta, Quadratic):
        return not np.any(theta.p - np.diag(np.diag(theta.p)))
    return False


def _scalar_parts(prob):
    for blk in prob.blocks:
        t = blk.theta
        for i in range(blk.n):
            if isinstance(t, Zero):
                yield Zero()
            elif isinstance(t, L1):
                yield L1(t.weight)
            elif isinstance(t, Linear):
                yield Linear(t.c[i : i + 1])
            elif isinstance(t, SeparableSum):
                yield t.parts[i]
            else:
                yield Quadratic(t.p[i : i + 1, i : i + 1], t.c[i : i + 1])


def _merge_sets(prob):
    sets = [blk.x_set for blk in prob.blocks]
    if all(isinstance(s, WholeSpace) for s in sets):
        return WholeSpace()
    if all(isinstance(s, NonnegativeOrthant) for s in sets):
        return NonnegativeOrthant()
    lower, upper = [], []
    for blk, s in zip(prob.blocks, sets):
        if isinstance(s, WholeSpace):
            lower.append(np.full(blk.n, -np.inf))
            upper.append(np.full(blk.n, np.inf))
        elif isinstance(s, NonnegativeOrthant):
            lower.append(np.zeros(blk.n))
            upper.append(np.full(blk.n, np.inf))
        elif isinstance(s, Box):
            lower.append(s.lower)
            upper.append(s.upper)
        else:
            raise UnsupportedCombination(f"unknown set spec {type(s).__name__}")
    return Box(np.concatenate(lower), np.concatenate(upper))
