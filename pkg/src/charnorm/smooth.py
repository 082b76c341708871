"""Kernels, Nadaraya-Watson estimators, the bandwidth rule and weight functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import EmptyNeighborhood

# 2 / (6 + sqrt(3))
BANDWIDTH_EXPONENT = 2.0 / (6.0 + math.sqrt(3.0))

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Kernel:
    """Symmetric probability density used for local averaging.

    ``gaussian`` has unbounded support. ``compact`` kernels live on
    ``[-C, C]`` and come in ``quartic`` (biweight) and ``triweight`` shapes.
    """

    kind: Literal["gaussian", "compact"] = "gaussian"
    C: float = 1.0
    shape: Literal["quartic", "triweight"] = "quartic"

    def __post_init__(self):
        if self.kind not in ("gaussian", "compact"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "compact":
            if not self.C > 0:
                raise ValueError("compact kernel needs C > 0")
            if self.shape not in ("quartic", "triweight"):
                raise ValueError(f"unknown compact kernel shape {self.shape!r}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * u * u) / _SQRT_2PI
        z = u / self.C
        inside = np.abs(z) <= 1.0
        base = np.where(inside, 1.0 - z * z, 0.0)
        if self.shape == "quartic":
            return 15.0 / 16.0 * base ** 2 / self.C
        return 35.0 / 32.0 * base ** 3 / self.C

    @property
    def name(self) -> str:
        if self.kind == "gaussian":
            return "gaussian"
        return f"{self.shape}(C={self.C:g})"


GAUSSIAN = Kernel()


def kernel_weights(x, lagged, bandwidth: float, kernel: Kernel = GAUSSIAN) -> np.ndarray:
    """Row-normalized kernel weights, shape ``(len(x), len(lagged))``.

    Row ``i`` holds ``K((x_i - lagged_j) / bandwidth)`` divided by its sum.
    Gaussian rows are rescaled by their largest entry before normalizing so
    far-away evaluation points do not underflow to an all-zero row.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lagged = np.asarray(lagged, dtype=float)
    if lagged.size == 0:
        raise ValueError("need at least one (lagged, response) pair")
    u = (x[:, None] - lagged[None, :]) / bandwidth
    if kernel.kind == "gaussian":
        q = u * u
        q -= q.min(axis=1, keepdims=True)
        k = np.exp(-0.5 * q)
    else:
        k = kernel(u)
    denom = k.sum(axis=1)
    bad = ~(denom > 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise EmptyNeighborhood(f"all kernel weights vanish at x={x[i]!r}")
    return k / denom[:, None]


def _shaped(values: np.ndarray, x):
    return float(values[0]) if np.ndim(x) == 0 else values


def _local_mean(w: np.ndarray, y: np.ndarray) -> np.ndarray:
    # shifting by y[0] keeps constant responses exact despite rounding in the row sums
    ref = y[0] if y.size else 0.0
    return ref + w @ (y - ref)


def nw_mean(x, lagged, response, bandwidth: float, kernel: Kernel = GAUSSIAN):
    """Nadaraya-Watson estimate of ``E[response | lagged = x]``.

    >>> nw_mean(0.0, [-1.0, 1.0], [1.0, 3.0], 0.5)
    2.0
    """
    w = kernel_weights(x, lagged, bandwidth, kernel)
    return _shaped(_local_mean(w, np.asarray(response, dtype=float)), x)


def nw_var(x, lagged, response, bandwidth: float, kernel: Kernel = GAUSSIAN):
    """Kernel conditional variance, centered at the local mean ``nw_mean(x)``."""
    w = kernel_weights(x, lagged, bandwidth, kernel)
    y = np.asarray(response, dtype=float)
    m = _local_mean(w, y)
    return _shaped(np.einsum("ij,ij->i", w, (y[None, :] - m[:, None]) ** 2), x)


def nw_var_arch(x, lagged, response, bandwidth: float, kernel: Kernel = GAUSSIAN):
    """Kernel conditional second moment, the variance estimate when the mean is zero."""
    w = kernel_weights(x, lagged, bandwidth, kernel)
    y = np.asarray(response, dtype=float)
    return _shaped(w @ (y * y), x)


@dataclass(frozen=True)
class FittedCurves:
    """Fitted conditional mean and variance at the evaluation points ``x``."""

    x: np.ndarray
    m_hat: np.ndarray
    sigma2_hat: np.ndarray


def fit_curves(
    lagged, response, bandwidth: float, kernel: Kernel = GAUSSIAN, at=None, centered: bool = True
) -> FittedCurves:
    """Evaluate mean and variance estimators with a single kernel matrix.

    With ``centered=False`` the variance is the uncentered second moment
    (zero-mean model) and ``m_hat`` is still reported.
    """
    lagged = np.asarray(lagged, dtype=float)
    y = np.asarray(response, dtype=float)
    x = lagged if at is None else np.atleast_1d(np.asarray(at, dtype=float))
    w = kernel_weights(x, lagged, bandwidth, kernel)
    m = _local_mean(w, y)
    if centered:
        s2 = np.einsum("ij,ij->i", w, (y[None, :] - m[:, None]) ** 2)
    else:
        s2 = w @ (y * y)
    return FittedCurves(x, m, s2)


def bandwidth_rule(sigma2_hat: float, n: int) -> float:
    """Rule-of-thumb bandwidth ``sigma2_hat * n ** (-2 / (6 + sqrt(3)))``."""
    if not sigma2_hat > 0:
        raise ValueError(f"sigma2_hat must be > 0, got {sigma2_hat}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sigma2_hat * n ** (-BANDWIDTH_EXPONENT)


def _smoothstep7(t):
    # degree-7 polynomial: 0 -> 0, 1 -> 1, derivatives 1..3 vanish at both ends
    t = np.clip(t, 0.0, 1.0)
    return t ** 4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t ** 3)


@dataclass(frozen=True)
class WeightFn:
    """Weight function ``w_n`` restricting which lagged states enter the EDF.

    ``indicator`` is 1 on the closed interval ``[a, b]``. ``smooth`` equals 1
    on ``[a + kappa, b - kappa]``, 0 outside ``[a, b]``, and ramps between
    with a C3 polynomial.
    """

    kind: Literal["indicator", "smooth"] = "indicator"
    a: float = -math.inf
    b: float = math.inf
    kappa: float = 0.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"weight support needs a < b, got [{self.a}, {self.b}]")
        if self.kind == "smooth":
            if not self.kappa > 0:
                raise ValueError("smooth weight needs kappa > 0")
            if self.b - self.a < 2 * self.kappa:
                raise ValueError("smooth weight needs b - a >= 2 * kappa")
        elif self.kind != "indicator":
            raise ValueError(f"unknown weight kind {self.kind!r}")

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if self.kind == "indicator":
            out = ((xa >= self.a) & (xa <= self.b)).astype(float)
        else:
            up = _smoothstep7((xa - self.a) / self.kappa)
            down = _smoothstep7((self.b - xa) / self.kappa)
            out = np.minimum(up, down)
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def name(self) -> str:
        if self.kind == "indicator":
            return f"indicator[{self.a:g},{self.b:g}]"
        return f"smooth[{self.a:g},{self.b:g};{self.kappa:g}]"


def default_weight(n: int) -> WeightFn:
    """Indicator of ``[-log n, log n]``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    L = math.log(n)
    return WeightFn("indicator", -L, L)
