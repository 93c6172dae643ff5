"""Objective and constraint-set specs with their proximity and projection rules.

Every objective here has a closed-form prox; constrained variants are
supported when the objective splits coordinatewise so clipping is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, UnsupportedCombination, UnsupportedObjective
from .linalg import cholesky_factor, solve_spd


@dataclass(frozen=True)
class Zero:
    """theta(x) = 0."""


@dataclass(frozen=True)
class L1:
    """theta(x) = weight * ||x||_1."""

    weight: float

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValueError("l1 weight must be nonnegative")


@dataclass(frozen=True, eq=False)
class Quadratic:
    """theta(x) = 0.5 x^T P x + c^T x with P symmetric positive semidefinite."""

    p: np.ndarray
    c: np.ndarray
    # prox factorizations keyed by the prox parameter; dict contents mutate,
    # the field itself never does.  Races just recompute an equal factor.
    _factors: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionMismatch(f"P must be square, got shape {p.shape}")
        if c.shape != (p.shape[0],):
            raise DimensionMismatch(f"c has shape {c.shape}, P dim is {p.shape[0]}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)
        # PSD screen: a tiny ridge must make P positive definite
        cholesky_factor(p + 1e-10 * np.eye(p.shape[0]))

    def solve_shifted(self, r: float, rhs: np.ndarray) -> np.ndarray:
        """Solve (P + r I) y = rhs, caching the factor per r."""
        factor = self._factors.get(r)
        if factor is None:
            factor = cholesky_factor(self.p + r * np.eye(self.p.shape[0]))
            self._factors[r] = factor
        return solve_spd(factor, rhs)


@dataclass(frozen=True, eq=False)
class Linear:
    """theta(x) = c^T x."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1:
            raise DimensionMismatch(f"c must be a vector, got shape {c.shape}")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class SeparableSum:
    """Coordinatewise sum of scalar objectives, one part per coordinate."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        for part in self.parts:
            if not isinstance(part, (Zero, L1, Quadratic, Linear)):
                raise UnsupportedObjective(f"unsupported part {type(part).__name__}")
            if isinstance(part, (Quadratic, Linear)) and part.c.shape != (1,):
                raise DimensionMismatch("separable parts must be scalar specs")


@dataclass(frozen=True)
class WholeSpace:
    """No constraint."""


@dataclass(frozen=True)
class NonnegativeOrthant:
    """x >= 0 componentwise."""


@dataclass(frozen=True, eq=False)
class Box:
    """lower <= x <= upper componentwise; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionMismatch("box bounds must be vectors of equal length")
        if not np.all(lower <= upper):
            raise ValueError("box bounds are crossed")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


def project(spec, v: np.ndarray) -> np.ndarray:
    """Euclidean projection of v onto the set."""
    v = np.asarray(v, dtype=float)
    if isinstance(spec, WholeSpace):
        return v.copy()
    if isinstance(spec, NonnegativeOrthant):
        return np.maximum(v, 0.0)
    if isinstance(spec, Box):
        if v.shape != spec.lower.shape:
            raise DimensionMismatch(f"vector shape {v.shape} does not match box bounds")
        return np.clip(v, spec.lower, spec.upper)
    raise UnsupportedObjective(f"unknown set spec {type(spec).__name__}")


def contains(spec, v: np.ndarray, tol: float = 0.0) -> bool:
    """Membership test, optionally with slack tol."""
    if isinstance(spec, WholeSpace):
        return True
    if isinstance(spec, NonnegativeOrthant):
        return bool(np.all(v >= -tol))
    if isinstance(spec, Box):
        return bool(np.all(v >= spec.lower - tol) and np.all(v <= spec.upper + tol))
    raise UnsupportedObjective(f"unknown set spec {type(spec).__name__}")


def objective_value(theta, x: np.ndarray) -> float:
    """Evaluate theta at x."""
    x = np.asarray(x, dtype=float)
    if isinstance(theta, Zero):
        return 0.0
    if isinstance(theta, L1):
        return float(theta.weight * np.sum(np.abs(x)))
    if isinstance(theta, Quadratic):
        _check_dim(theta.c, x)
        return float(0.5 * x @ (theta.p @ x) + theta.c @ x)
    if isinstance(theta, Linear):
        _check_dim(theta.c, x)
        return float(theta.c @ x)
    if isinstance(theta, SeparableSum):
        _check_parts(theta, x)
        return float(sum(objective_value(p, x[i : i + 1]) for i, p in enumerate(theta.parts)))
    raise UnsupportedObjective(f"unknown objective {type(theta).__name__}")


def prox(theta, r: float, q: np.ndarray) -> np.ndarray:
    """argmin_y theta(y) + (r/2)||y - q||^2, in closed form."""
    if not r > 0:
        raise ValueError("prox parameter r must be positive")
    q = np.asarray(q, dtype=float)
    if isinstance(theta, Zero):
        return q.copy()
    if isinstance(theta, L1):
        shift = theta.weight / r
        return np.sign(q) * np.maximum(np.abs(q) - shift, 0.0)
    if isinstance(theta, Linear):
        _check_dim(theta.c, q)
        return q - theta.c / r
    if isinstance(theta, Quadratic):
        _check_dim(theta.c, q)
        return theta.solve_shifted(r, r * q - theta.c)
    if isinstance(theta, SeparableSum):
        _check_parts(theta, q)
        out = np.empty_like(q)
        for i, part in enumerate(theta.parts):
            out[i : i + 1] = prox(part, r, q[i : i + 1])
        return out
    raise UnsupportedObjective(f"no prox rule for {type(theta).__name__}")


def prox_constrained(theta, x_set, r: float, q: np.ndarray) -> np.ndarray:
    """argmin_y theta(y) + (r/2)||y - q||^2 over the set.

    Exact for any theta on the whole space; on boxes and the orthant it
    clips the free prox, which is exact precisely when theta is
    coordinatewise separable.
    """
    if isinstance(x_set, WholeSpace):
        return prox(theta, r, q)
    if isinstance(x_set, (NonnegativeOrthant, Box)):
        if not _separable(theta):
            raise UnsupportedCombination(
                f"{type(theta).__name__} over {type(x_set).__name__} has no exact rule"
            )
        return project(x_set, prox(theta, r, q))
    raise UnsupportedCombination(f"unknown set spec {type(x_set).__name__}")


def _separable(theta) -> bool:
    if isinstance(theta, (Zero, L1, Linear, SeparableSum)):
        return True
    if isinstance(theta, Quadratic):
        return not np.any(theta.p - np.diag(np.diag(theta.p)))
    return False


def _check_dim(c: np.ndarray, x: np.ndarray) -> None:
    if x.shape != c.shape:
        raise DimensionMismatch(f"vector shape {x.shape} does not match objective dim {c.shape}")


def _check_parts(theta: SeparableSum, x: np.ndarray) -> None:
    if x.shape != (len(theta.parts),):
        raise DimensionMismatch(
            f"vector shape {x.shape} does not match {len(theta.parts)} separable parts"
        )
