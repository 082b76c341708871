"""Nonparametric residuals and their weighted empirical distribution function."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .dgp import as_array
from .errors import DegenerateWeights, NonpositiveVariance, ZeroVariance
from .smooth import GAUSSIAN, FittedCurves, Kernel, WeightFn, bandwidth_rule, default_weight, fit_curves

ModelVariant = Literal["ar_arch", "ar", "arch"]
VARIANTS = ("ar_arch", "ar", "arch")


@dataclass(frozen=True)
class StepEDF:
    """Right-continuous weighted step CDF.

    ``jump_points`` are strictly increasing; ``cum_weights[j]`` is the value
    on ``[jump_points[j], jump_points[j + 1])`` and the last entry is 1.
    """

    jump_points: np.ndarray
    cum_weights: np.ndarray

    @classmethod
    def from_sample(cls, values, weights=None) -> "StepEDF":
        """Build the EDF of ``values``, merging exact ties and dropping zero weights."""
        values = np.asarray(values, dtype=float)
        if weights is None:
            weights = np.full(values.size, 1.0 / max(values.size, 1))
        weights = np.asarray(weights, dtype=float)
        if values.shape != weights.shape:
            raise ValueError("values and weights must have the same length")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        keep = weights > 0
        values, weights = values[keep], weights[keep]
        if values.size == 0:
            raise ValueError("EDF needs at least one positively weighted point")
        if not np.all(np.isfinite(values)):
            raise ValueError("EDF values must be finite")
        # sort by (value, weight) so tie sums do not depend on input order
        order = np.lexsort((weights, values))
        values, weights = values[order], weights[order]
        points, start = np.unique(values, return_index=True)
        mass = np.add.reduceat(weights, start)
        cum = np.cumsum(mass)
        cum /= cum[-1]
        cum[-1] = 1.0
        return cls(points, cum)

    def __call__(self, y):
        idx = np.searchsorted(self.jump_points, y, side="right")
        padded = np.concatenate(([0.0], self.cum_weights))
        out = padded[idx]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.cum_weights, prepend=0.0)

    def __len__(self) -> int:
        return self.jump_points.size


@dataclass(frozen=True)
class ResidualSet:
    """Residuals ``eps_hat_t`` with their normalized weights ``v_{n,t}``.

    Entries with zero weight carry ``nan`` residuals and fitted values; they
    never enter the EDF.
    """

    residuals: np.ndarray
    weights: np.ndarray
    variant: str
    lagged: np.ndarray
    response: np.ndarray
    m_hat: np.ndarray
    sigma_hat: np.ndarray
    bandwidth: float
    sigma2_const: Optional[float] = None

    @property
    def n(self) -> int:
        return self.residuals.size


def lag_pairs(series) -> tuple[np.ndarray, np.ndarray]:
    """Split ``X_0..X_n`` into lagged states ``X_0..X_{n-1}`` and responses ``X_1..X_n``."""
    x = as_array(series)
    return x[:-1], x[1:]


def normalized_weights(lagged, weight: WeightFn) -> np.ndarray:
    w = np.asarray(weight(lagged), dtype=float)
    total = w.sum()
    if not total > 0:
        raise DegenerateWeights("weight function vanishes at every lagged observation")
    v = w / total
    return v / v.sum()


def residuals(
    series,
    variant: ModelVariant,
    bandwidth: float,
    kernel: Kernel = GAUSSIAN,
    weight: Optional[WeightFn] = None,
    fits: Optional[FittedCurves] = None,
) -> ResidualSet:
    """Standardized residuals of the ``ar_arch``, ``ar`` or ``arch`` model.

    Parameters
    ----------
    series : Series or array-like
        Observations ``X_0, ..., X_n`` (at least three).
    variant : {"ar_arch", "ar", "arch"}
        ``ar_arch`` uses local mean and local variance, ``ar`` a local mean
        with one global variance, ``arch`` a zero mean with local second moment.
    bandwidth : float
    kernel : Kernel
    weight : WeightFn, optional
        Defaults to the indicator of ``[-log n, log n]``.
    fits : FittedCurves, optional
        Precomputed ``m_hat`` / ``sigma2_hat`` at every lagged state, used
        instead of kernel smoothing. Intended for oracle checks.

    Raises
    ------
    DegenerateWeights
        No lagged state receives positive weight.
    NonpositiveVariance
        A variance estimate needed for a positively weighted residual is <= 0.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    lagged, y = lag_pairs(series)
    n = y.size
    if n < 2:
        raise ValueError("residuals need a series of length >= 3")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    weight = weight or default_weight(n)
    v = normalized_weights(lagged, weight)
    active = v > 0

    m_hat = np.full(n, np.nan)
    s2_hat = np.full(n, np.nan)
    if fits is not None:
        if fits.m_hat.shape != (n,) or fits.sigma2_hat.shape != (n,):
            raise ValueError("injected fits must cover every lagged state")
        m_hat[active] = fits.m_hat[active]
        s2_hat[active] = fits.sigma2_hat[active]
    else:
        f = fit_curves(lagged, y, bandwidth, kernel, at=lagged[active], centered=variant != "arch")
        m_hat[active] = f.m_hat
        s2_hat[active] = f.sigma2_hat

    sigma2_const = None
    if variant == "ar":
        dev = y[active] - m_hat[active]
        sigma2_const = float(v[active] @ (dev * dev))
        if not sigma2_const > 0:
            raise NonpositiveVariance(-1, sigma2_const)
        sigma = np.where(active, math.sqrt(sigma2_const), np.nan)
    else:
        bad = active & ~(s2_hat > 0)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonpositiveVariance(i, float(s2_hat[i]))
        sigma = np.sqrt(s2_hat)

    if variant == "arch":
        eps = y / sigma
    else:
        eps = (y - m_hat) / sigma
    eps[~active] = np.nan
    return ResidualSet(eps, v, variant, lagged, y, m_hat, sigma, float(bandwidth), sigma2_const)


def edf(rs: ResidualSet) -> StepEDF:
    """Weighted EDF ``y -> sum_t v_t * 1{eps_hat_t <= y}``."""
    active = rs.weights > 0
    return StepEDF.from_sample(rs.residuals[active], rs.weights[active])


def edf_null_linear_ar(series, theta_hat: float) -> tuple[StepEDF, float]:
    """EDF of residuals from the linear AR(1) fit ``X_t = theta_hat * X_{t-1}``.

    Each residual carries mass ``1/n``. Returns the EDF and the residual
    variance ``mean((X_t - theta_hat X_{t-1})**2)``.
    """
    lagged, y = lag_pairs(series)
    if y.size < 2:
        raise ValueError("need a series of length >= 3")
    if abs(theta_hat) >= 1:
        warnings.warn(f"|theta_hat| = {abs(theta_hat):.3g} >= 1: non-stationary AR(1) null", stacklevel=2)
    e = y - theta_hat * lagged
    if np.all(e == e[0]):
        raise ZeroVariance("all parametric residuals are identical")
    sigma2 = float(np.mean(e * e))
    return StepEDF.from_sample(e / math.sqrt(sigma2)), sigma2


def multiplicative_null_residuals(rs: ResidualSet, c_hat: float) -> np.ndarray:
    """Residuals ``(X_t - c_hat * sigma_hat) / sigma_hat`` under ``m = c * sigma``."""
    if rs.variant != "ar_arch":
        raise ValueError("multiplicative null residuals need the ar_arch fit")
    return (rs.response - c_hat * rs.sigma_hat) / rs.sigma_hat


def edf_null_multiplicative(
    series,
    c_hat: float,
    bandwidth: float,
    kernel: Kernel = GAUSSIAN,
    weight: Optional[WeightFn] = None,
    fits: Optional[FittedCurves] = None,
) -> StepEDF:
    """Weighted EDF of the residuals under the multiplicative null ``m = c * sigma``."""
    rs = residuals(series, "ar_arch", bandwidth, kernel, weight, fits)
    e0 = multiplicative_null_residuals(rs, c_hat)
    active = rs.weights > 0
    return StepEDF.from_sample(e0[active], rs.weights[active])


def pooled_variance(series, bandwidth: float, kernel: Kernel = GAUSSIAN, weight: Optional[WeightFn] = None) -> float:
    """Weighted residual variance ``sum_t v_t (X_t - m_hat(X_{t-1}))**2``."""
    lagged, y = lag_pairs(series)
    weight = weight or default_weight(y.size)
    v = normalized_weights(lagged, weight)
    active = v > 0
    f = fit_curves(lagged, y, bandwidth, kernel, at=lagged[active])
    dev = y[active] - f.m_hat
    return float(v[active] @ (dev * dev))


def default_bandwidth(
    series, kernel: Kernel = GAUSSIAN, weight: Optional[WeightFn] = None, iterations: int = 1
) -> float:
    """Rule-of-thumb bandwidth driven by the pooled residual variance.

    The pooled variance itself needs a bandwidth, so the recursion starts
    from the infinite-bandwidth limit (``m_hat`` = overall mean of the
    responses) and applies ``h <- bandwidth_rule(pooled_variance(h), n)``
    ``iterations`` times.
    """
    lagged, y = lag_pairs(series)
    n = y.size
    weight = weight or default_weight(n)
    v = normalized_weights(lagged, weight)
    dev = y - y.mean()
    h = bandwidth_rule(float(v @ (dev * dev)), n)
    for _ in range(iterations):
        h = bandwidth_rule(pooled_variance(series, h, kernel, weight), n)
    return h
