"""Multiplier-update systems: SPD solves and a projected Gauss-Seidel LCP.

The dual metric is a shifted Gram matrix of the constraint rows; it is
positive definite for any shift delta > 0, so one Cholesky factor per
run covers every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence
from .linalg import SpdFactor, cholesky_factor, solve_spd

LCP_TOL = 1e-9
LCP_SWEEP_CAP = 10_000


@dataclass(frozen=True)
class MultiplierSystem:
    """Constant dual metric H and its Cholesky factor."""

    h: np.ndarray
    factor: SpdFactor

    @property
    def m(self) -> int:
        return self.factor.dim


def _shifted_gram(scaled: list, shift: float) -> np.ndarray:
    """sum_i (1/r_i) A_i A_i^T + shift I, symmetrized exactly."""
    m = scaled[0][0].shape[0]
    acc = np.zeros((m, m))
    for a, r in scaled:
        if a.shape[0] != m:
            raise DimensionMismatch("blocks disagree on the constraint row count")
        acc += (a @ a.T) / r
    acc += shift * np.eye(m)
    return 0.5 * (acc + acc.T)


def _system(scaled: list, shift: float) -> MultiplierSystem:
    h = _shifted_gram(scaled, shift)
    return MultiplierSystem(h=h, factor=cholesky_factor(h))


def build_h0(a: np.ndarray, r: float, delta: float) -> MultiplierSystem:
    """Single-block dual metric (1/r) A A^T + delta I."""
    if not (r > 0 and delta > 0):
        raise ValueError("r and delta must be positive")
    return _system([(np.asarray(a, dtype=float), r)], delta)


def build_hp(scaled_blocks: list, delta: float) -> MultiplierSystem:
    """Multi-block dual metric sum_i (1/r_i) A_i A_i^T + delta I.

    scaled_blocks is a list of (A_i, r_i) pairs.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not scaled_blocks:
        raise DimensionMismatch("at least one block is required")
    scaled = [(np.asarray(a, dtype=float), r) for a, r in scaled_blocks]
    for _, r in scaled:
        if not r > 0:
            raise ValueError("every r_i must be positive")
    return _system(scaled, delta)


def build_h2(a2: np.ndarray, r: float, s: float, delta: float) -> MultiplierSystem:
    """Dual metric (1/s) A2 A2^T + (1/r + delta) I for the two-block variant."""
    if not (r > 0 and s > 0 and delta > 0):
        raise ValueError("r, s and delta must be positive")
    return _system([(np.asarray(a2, dtype=float), s)], 1.0 / r + delta)


def solve_equality(sys: MultiplierSystem, lam_k: np.ndarray, s_k: np.ndarray) -> np.ndarray:
    """Solve H (lam - lam_k) = -s_k for the unconstrained multiplier update."""
    return lam_k - solve_spd(sys.factor, s_k)


def solve_lcp(
    sys: MultiplierSystem,
    lam_k: np.ndarray,
    s_k: np.ndarray,
    tol: float = LCP_TOL,
    max_sweeps: int = LCP_SWEEP_CAP,
) -> np.ndarray:
    """Solve 0 <= lam  perp  H (lam - lam_k) + s_k >= 0 by projected Gauss-Seidel.

    Sweeps coordinates in ascending order, warm-started at lam_k, until
    the complementarity certificate holds: y >= -tol componentwise and
    |lam . y| <= tol * (1 + ||s_k||).
    """
    s_k = np.asarray(s_k, dtype=float)
    if s_k.shape != (sys.m,):
        raise DimensionMismatch(f"s_k has shape {s_k.shape}, system dim is {sys.m}")
    h = sys.h
    diag = np.diag(h)
    lam = np.maximum(np.asarray(lam_k, dtype=float), 0.0)
    comp_tol = tol * (1.0 + float(np.linalg.norm(s_k)))
    for _ in range(max_sweeps):
        for i in range(sys.m):
            y_i = h[i] @ (lam - lam_k) + s_k[i]
            lam[i] = max(0.0, lam[i] - y_i / diag[i])
        y = h @ (lam - lam_k) + s_k
        if float(np.min(y)) >= -tol and abs(float(lam @ y)) <= comp_tol:
            return lam
    raise NoConvergence(f"projected Gauss-Seidel did not certify in {max_sweeps} sweeps")
