"""Closed-form integral statistics of step CDFs and normal-distribution primitives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .resid import StepEDF


def normal_cdf(y):
    """Standard normal CDF."""
    out = special.ndtr(np.asarray(y, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(u):
    """Inverse of :func:`normal_cdf` on the open unit interval."""
    ua = np.asarray(u, dtype=float)
    if np.any(~((ua > 0) & (ua < 1))):
        raise ValueError("normal_quantile needs 0 < u < 1")
    out = special.ndtri(ua)
    return float(out) if np.ndim(out) == 0 else out


def chi2_1_quantile(p: float) -> float:
    """Quantile of the chi-square law with one degree of freedom."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return normal_quantile((1.0 + p) / 2.0) ** 2


@dataclass(frozen=True)
class CvmValue:
    value: float
    n: int

    def __float__(self) -> float:
        return self.value


def cvm_vs_normal(edf: StepEDF, n: int) -> CvmValue:
    """``n * integral (F(y) - Phi(y))**2 dPhi(y)`` for a step CDF ``F``.

    After the substitution ``u = Phi(y)`` the integrand is ``(W_j - u)**2`` on
    each interval between consecutive jumps, which integrates in closed form.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = special.ndtr(edf.jump_points)
    left = np.concatenate(([0.0], u))
    right = np.concatenate((u, [1.0]))
    level = np.concatenate(([0.0], edf.cum_weights))
    pieces = ((level - left) ** 3 - (level - right) ** 3) / 3.0
    return CvmValue(float(n * pieces.sum()), n)


def l2_distance_edfs(f: StepEDF, g: StepEDF) -> float:
    """``integral (f(y) - g(y))**2 dy`` over the real line, exactly."""
    grid = np.union1d(f.jump_points, g.jump_points)
    diff = f(grid[:-1]) - g(grid[:-1])
    return float(np.sum(diff * diff * np.diff(grid)))
