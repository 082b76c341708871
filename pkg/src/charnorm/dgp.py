"""Innovation laws and simulation of CHARN processes.

A CHARN process follows ``X_t = m(X_{t-1}) + sigma(X_{t-1}) * eps_t`` with iid,
centered, unit-variance innovations ``eps_t``. Every innovation law offered
here is parametrized so that mean 0 and variance 1 hold exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .errors import ExplosiveSeries

InnovationKind = Literal["standard_normal", "skew_normal", "standardized_t"]


@dataclass(frozen=True)
class InnovationSpec:
    """A centered, unit-variance innovation law.

    ``zeta`` is the skewness parameter for ``skew_normal`` (shape ``5 * zeta``)
    and the degrees of freedom for ``standardized_t``.
    """

    kind: InnovationKind = "standard_normal"
    zeta: float = 0.0

    def __post_init__(self):
        if self.kind == "skew_normal" and not self.zeta >= 0:
            raise ValueError(f"skew-normal zeta must be >= 0, got {self.zeta}")
        if self.kind == "standardized_t" and not self.zeta > 2:
            raise ValueError(
                f"standardized t needs more than 2 degrees of freedom, got {self.zeta}"
            )
        if self.kind not in ("standard_normal", "skew_normal", "standardized_t"):
            raise ValueError(f"unknown innovation kind {self.kind!r}")

    @classmethod
    def standard_normal(cls) -> "InnovationSpec":
        return cls("standard_normal", 0.0)

    @classmethod
    def skew_normal(cls, zeta: float) -> "InnovationSpec":
        return cls("skew_normal", float(zeta))

    @classmethod
    def standardized_t(cls, df: float) -> "InnovationSpec":
        return cls("standardized_t", float(df))

    @property
    def label(self) -> str:
        if self.kind == "standard_normal":
            return "normal"
        if self.kind == "skew_normal":
            return f"skewnormal({self.zeta:g})"
        return f"t({self.zeta:g})"


def skew_normal_params(zeta: float) -> tuple[float, float, float]:
    """Location, scale and shape of the mean-0, variance-1 skew-normal law.

    The shape is ``5 * zeta``; location and scale are chosen so that the
    resulting distribution is standardized.

    Parameters
    ----------
    zeta : float
        Non-negative skewness parameter. ``zeta = 0`` gives the standard normal.

    Returns
    -------
    location, scale, shape : float
    """
    if not zeta >= 0:
        raise ValueError(f"zeta must be >= 0, got {zeta}")
    pi = math.pi
    a = 5.0 * zeta
    a2, a4 = a * a, a ** 4
    location = -math.sqrt(
        2 * pi * (a2 + a4) / (pi * pi + (2 * pi * pi - 2 * pi) * a2 + (pi * pi - 2 * pi) * a4)
    )
    scale = math.sqrt(pi * (1 + a2)) / math.sqrt(pi + (pi - 2) * a2)
    return location, scale, a


def sample_innovations(spec: InnovationSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` iid innovations from ``spec``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if spec.kind == "standard_normal":
        return rng.standard_normal(count)
    if spec.kind == "skew_normal":
        location, scale, shape = skew_normal_params(spec.zeta)
        delta = shape / math.sqrt(1.0 + shape * shape)
        u = rng.standard_normal((2, count))
        z = delta * np.abs(u[0]) + math.sqrt(1.0 - delta * delta) * u[1]
        return location + scale * z
    # standardized_t
    df = spec.zeta
    if not df > 2:
        raise ValueError(f"standardized t needs df > 2, got {df}")
    z = rng.standard_normal(count)
    chi2 = rng.chisquare(df, count)
    return z / np.sqrt(chi2 / df) * math.sqrt((df - 2.0) / df)


@dataclass(frozen=True)
class Series:
    """Observed or simulated values ``X_0, ..., X_n`` plus free-form metadata."""

    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a series needs at least two observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        """Number of transitions, i.e. residuals that can be formed."""
        return self.values.size - 1


def as_array(series) -> np.ndarray:
    """Return the float values of a :class:`Series` or array-like."""
    if isinstance(series, Series):
        return series.values
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return x


@dataclass(frozen=True)
class CharnSpec:
    """``X_t = mean_fn(X_{t-1}) + vol_fn(X_{t-1}) * eps_t`` with ``eps_t ~ innovation``."""

    mean_fn: Callable[[float], float]
    vol_fn: Callable[[float], float]
    innovation: InnovationSpec = field(default_factory=InnovationSpec.standard_normal)
    x0: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        s0 = self.vol_fn(self.x0)
        if not s0 > 0:
            raise ValueError(f"vol_fn must be strictly positive, got {s0} at x0={self.x0}")


class _Linear:
    # picklable m(x) = theta * x
    def __init__(self, theta: float):
        self.theta = theta

    def __call__(self, x: float) -> float:
        return self.theta * x


class _Const:
    def __init__(self, c: float):
        self.c = c

    def __call__(self, x: float) -> float:
        return self.c


class _ArchVol:
    def __init__(self, a: float, b: float):
        self.a = a
        self.b = b

    def __call__(self, x: float) -> float:
        return math.sqrt(self.a + self.b * x * x)


def ar1(theta: float = 0.5, innovation: Optional[InnovationSpec] = None, x0: float = 0.0) -> CharnSpec:
    """Linear AR(1) preset ``X_t = theta * X_{t-1} + eps_t``."""
    return CharnSpec(
        _Linear(theta), _Const(1.0), innovation or InnovationSpec.standard_normal(), x0, "ar1"
    )


def arch1(
    a: float = 0.75, b: float = 0.25, innovation: Optional[InnovationSpec] = None, x0: float = 0.0
) -> CharnSpec:
    """ARCH(1) preset ``X_t = sqrt(a + b * X_{t-1}**2) * eps_t``."""
    return CharnSpec(
        _Const(0.0), _ArchVol(a, b), innovation or InnovationSpec.standard_normal(), x0, "arch1"
    )


def simulate(
    spec: CharnSpec,
    n: int,
    rng: np.random.Generator,
    innovations: Optional[np.ndarray] = None,
) -> Series:
    """Simulate ``10 * n`` steps from ``spec.x0`` and keep the last ``n + 1`` states.

    The first ``9 * n`` steps act as burn-in so the retained window is close to
    the stationary regime.

    Parameters
    ----------
    spec : CharnSpec
    n : int
        Number of transitions in the returned series (``n + 1`` values).
    rng : numpy.random.Generator
        Source of the innovations. Ignored when ``innovations`` is given.
    innovations : array, optional
        Explicit innovation sequence of length ``10 * n``; a test hook.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    steps = 10 * n
    if innovations is None:
        eps = sample_innovations(spec.innovation, steps, rng)
    else:
        eps = np.asarray(innovations, dtype=float)
        if eps.shape != (steps,):
            raise ValueError(f"expected {steps} innovations, got shape {eps.shape}")

    m, s = spec.mean_fn, spec.vol_fn
    out = np.empty(steps + 1)
    x = float(spec.x0)
    out[0] = x
    isfinite = math.isfinite
    for t, e in enumerate(eps.tolist(), start=1):
        sig = s(x)
        if not sig > 0:
            raise ValueError(f"vol_fn returned {sig} at step {t}")
        x = m(x) + sig * e
        if not isfinite(x):
            raise ExplosiveSeries(t, x)
        out[t] = x
    meta = {"model": spec.name, "innovation": spec.innovation.label, "n": n, "x0": spec.x0}
    return Series(out[-(n + 1):].copy(), meta)
