"""Decision procedures: Gaussianity tests and two specification tests.

Gaussianity of the innovations is tested with the Cramér-von Mises distance
between the weighted residual EDF and the standard normal CDF, for three
model variants:

* ``ar_arch`` -- nonparametric mean and volatility, calibrated by the
  shifted-bridge table (:func:`table_ararch`);
* ``ar`` -- nonparametric mean, constant variance, same table;
* ``arch`` -- zero mean, nonparametric volatility, calibrated by the
  Brownian-bridge table (:func:`table_arch`).

Once Gaussianity is accepted, :func:`test_linear_ar1` and
:func:`test_multiplicative` give chi-square(1) calibrated specification tests.
None of the procedures check mixing or moment conditions on the data; those
remain the caller's responsibility.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .dgp import as_array
from .errors import DegenerateTau, UntabulatedAlpha, ZeroVariance
from .resid import (
    ResidualSet,
    StepEDF,
    default_bandwidth,
    edf,
    edf_null_linear_ar,
    multiplicative_null_residuals,
    residuals,
)
from .smooth import GAUSSIAN, Kernel, WeightFn, default_weight
from .stats import chi2_1_quantile, cvm_vs_normal, l2_distance_edfs

MIN_SERIES_LENGTH = 20
_TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


@dataclass(frozen=True)
class CriticalTable:
    """Asymptotic critical values ``c_alpha`` of a limit law."""

    rows: tuple[tuple[float, float], ...]
    limit_kind: Literal["shifted_bridge", "brownian_bridge", "chi2_1"]

    def __post_init__(self):
        crit = [c for _, c in sorted(self.rows)]
        if any(b >= a for a, b in zip(crit, crit[1:])):
            raise ValueError("critical values must decrease strictly in alpha")

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.rows)

    def critical(self, alpha: float, interpolate: bool = False) -> float:
        """Critical value at ``alpha``.

        Untabulated levels raise :class:`UntabulatedAlpha` unless
        ``interpolate`` is set, in which case ``log c`` is interpolated
        linearly in ``log alpha`` between the bracketing rows. Interpolated
        values are approximations, not tabulated quantiles.
        """
        for a, c in self.rows:
            if math.isclose(a, alpha, rel_tol=0, abs_tol=1e-12):
                return c
        if not interpolate:
            raise UntabulatedAlpha(
                f"alpha={alpha} not tabulated for {self.limit_kind}; available: {self.alphas}"
            )
        rows = sorted(self.rows)
        lo, hi = rows[0][0], rows[-1][0]
        if not lo < alpha < hi:
            raise UntabulatedAlpha(f"alpha={alpha} outside the tabulated range [{lo}, {hi}]")
        la = np.log([a for a, _ in rows])
        lc = np.log([c for _, c in rows])
        return float(np.exp(np.interp(math.log(alpha), la, lc)))


_TABLE_ARARCH = CriticalTable(
    ((0.15, 0.118), (0.1, 0.135), (0.05, 0.165), (0.025, 0.196), (0.01, 0.237)),
    "shifted_bridge",
)
_TABLE_ARCH = CriticalTable(
    ((0.15, 0.284), (0.1, 0.347), (0.05, 0.461), (0.02, 0.6198), (0.01, 0.743)),
    "brownian_bridge",
)


def table_ararch() -> CriticalTable:
    """Quantiles of the integrated squared bridge with the normal-score shift removed.

    Calibrates both the ``ar_arch`` and the ``ar`` tests.
    """
    return _TABLE_ARARCH


def table_arch() -> CriticalTable:
    """Quantiles of the integrated squared Brownian bridge; calibrates the ``arch`` test."""
    return _TABLE_ARCH


@dataclass(frozen=True)
class TestConfig:
    """Options shared by all test procedures.

    ``bandwidth=None`` selects the rule of thumb, ``weight=None`` the
    indicator of ``[-log n, log n]``.
    """

    __test__ = False  # not a pytest class

    alpha: float = 0.05
    bandwidth: Optional[float] = None
    kernel: Kernel = GAUSSIAN
    weight: Optional[WeightFn] = None
    interpolate: bool = False
    theta_method: Literal["ols", "yule_walker"] = "ols"
    power: float = 1.0
    tau_min: float = 1e-8
    bandwidth_iterations: int = 1


@dataclass
class TestReport:
    __test__ = False

    statistic: float
    alpha: float
    critical: float
    reject: bool
    variant: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _setup(series, cfg: Optional[TestConfig]) -> tuple[np.ndarray, TestConfig, WeightFn, float]:
    cfg = cfg or TestConfig()
    x = as_array(series)
    n = x.size - 1
    if x.size < 3:
        raise ValueError("series needs at least 3 observations")
    if n < MIN_SERIES_LENGTH:
        warnings.warn(
            f"only {n} transitions; the asymptotic calibration is unreliable below {MIN_SERIES_LENGTH}",
            stacklevel=3,
        )
    weight = cfg.weight or default_weight(n)
    h = cfg.bandwidth
    if h is None:
        h = default_bandwidth(x, cfg.kernel, weight, cfg.bandwidth_iterations)
    return x, cfg, weight, h


def _diagnostics(rs: ResidualSet, weight: WeightFn, cfg: TestConfig, **extra) -> dict:
    raw = np.asarray(weight(rs.lagged), dtype=float)
    d = {
        "n": rs.n,
        "bandwidth": rs.bandwidth,
        "kernel": cfg.kernel.name,
        "weight_support": list(weight.support),
        "effective_weight_mass": float(raw.sum() / rs.n),
    }
    if rs.sigma2_const is not None:
        d["sigma2_hat"] = rs.sigma2_const
    d.update(extra)
    return d


def _gaussianity(series, cfg, variant: str, table: CriticalTable) -> TestReport:
    x, cfg, weight, h = _setup(series, cfg)
    critical = table.critical(cfg.alpha, cfg.interpolate)
    rs = residuals(x, variant, h, cfg.kernel, weight)
    stat = cvm_vs_normal(edf(rs), rs.n).value
    return TestReport(
        stat, cfg.alpha, critical, stat > critical, variant,
        _diagnostics(rs, weight, cfg, limit=table.limit_kind),
    )


def test_gaussian_ararch(series, cfg: Optional[TestConfig] = None) -> TestReport:
    """Cramér-von Mises test of Gaussian innovations in the AR-ARCH model."""
    return _gaussianity(series, cfg, "ar_arch", table_ararch())


def test_gaussian_ar(series, cfg: Optional[TestConfig] = None) -> TestReport:
    """Gaussianity test for the homoscedastic nonparametric AR model."""
    return _gaussianity(series, cfg, "ar", table_ararch())


def test_gaussian_arch(series, cfg: Optional[TestConfig] = None) -> TestReport:
    """Gaussianity test for the zero-mean nonparametric ARCH model."""
    return _gaussianity(series, cfg, "arch", table_arch())


def estimate_theta(series, method: Literal["ols", "yule_walker"] = "ols") -> float:
    """AR(1) coefficient of a zero-mean series.

    ``yule_walker`` divides the lag-one by the lag-zero uncentered sample
    autocovariance; ``ols`` regresses ``X_t`` on ``X_{t-1}`` without intercept.
    """
    x = as_array(series)
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    num = float(x[1:] @ x[:-1])
    if method == "ols":
        den = float(x[:-1] @ x[:-1])
    elif method == "yule_walker":
        den = float(x @ x)
    else:
        raise ValueError(f"unknown method {method!r}")
    if den == 0:
        raise ZeroVariance("zero denominator in the AR(1) coefficient estimate")
    return num / den


def test_linear_ar1(series, cfg: Optional[TestConfig] = None) -> TestReport:
    """Lack-of-fit test of ``m(x) = theta * x`` in an AR(1) with Gaussian innovations.

    Compares the nonparametric AR residual EDF with the EDF of the linear-fit
    residuals: ``T = 2 sqrt(pi) n integral (F_n - F_0n)**2 dy``, rejected
    above the chi-square(1) quantile. Only meaningful after Gaussianity of
    the innovations has been accepted.
    """
    x, cfg, weight, h = _setup(series, cfg)
    critical = chi2_1_quantile(1.0 - cfg.alpha)
    rs = residuals(x, "ar", h, cfg.kernel, weight)
    theta = estimate_theta(x, cfg.theta_method)
    f0, s2_null = edf_null_linear_ar(x, theta)
    stat = _TWO_SQRT_PI * rs.n * l2_distance_edfs(edf(rs), f0)
    return TestReport(
        stat, cfg.alpha, critical, stat > critical, "linear_ar1",
        _diagnostics(rs, weight, cfg, limit="chi2_1", theta_hat=theta, sigma2_null=s2_null),
    )


def _c_hat(rs: ResidualSet) -> float:
    a = rs.weights > 0
    v, m, s = rs.weights[a], rs.m_hat[a], rs.sigma_hat[a]
    den = float(v @ s ** 4)
    if not den > 0:
        raise ZeroVariance("zero denominator in c_hat")
    return float(v @ (m * s ** 3)) / den


def estimate_c(
    series,
    bandwidth: Optional[float] = None,
    kernel: Kernel = GAUSSIAN,
    weight: Optional[WeightFn] = None,
    fits=None,
) -> float:
    """Least-squares constant ``c`` in ``m = c * sigma``.

    Minimizes ``sum_t v_t sigma_hat_t**2 (m_hat_t - c sigma_hat_t)**2``, i.e.
    ``c_hat = sum v m_hat sigma_hat**3 / sum v sigma_hat**4``.
    """
    x = as_array(series)
    weight = weight or default_weight(x.size - 1)
    if bandwidth is None:
        bandwidth = default_bandwidth(x, kernel, weight)
    return _c_hat(residuals(x, "ar_arch", bandwidth, kernel, weight, fits))


def test_multiplicative(series, cfg: Optional[TestConfig] = None) -> TestReport:
    """Test of multiplicative structure ``m = c * sigma`` under Gaussian innovations.

    The statistic ``2 sqrt(pi) n integral (F_n - F_0n)**2 dy`` is divided by
    ``(3/4 c_hat**2 + 1)**power * tau_hat**2`` with
    ``tau_hat**2 = s_8 / s_4**2 - 1``, ``s_k = sum_t v_t sigma_hat_t**k``.

    Raises
    ------
    DegenerateTau
        ``tau_hat**2 <= cfg.tau_min``: the fitted volatility is (nearly)
        constant and the test is inapplicable.
    """
    x, cfg, weight, h = _setup(series, cfg)
    critical = chi2_1_quantile(1.0 - cfg.alpha)
    rs = residuals(x, "ar_arch", h, cfg.kernel, weight)
    a = rs.weights > 0
    v, s = rs.weights[a], rs.sigma_hat[a]
    s4 = float(v @ s ** 4)
    s8 = float(v @ s ** 8)
    tau2 = s8 / (s4 * s4) - 1.0
    if not tau2 > cfg.tau_min:
        raise DegenerateTau(f"tau_hat^2 = {tau2:.3g} <= {cfg.tau_min:g}: volatility is (nearly) constant")
    c = _c_hat(rs)
    e0 = multiplicative_null_residuals(rs, c)
    f0 = StepEDF.from_sample(e0[a], v)
    dist = l2_distance_edfs(edf(rs), f0)
    stat = _TWO_SQRT_PI * rs.n * dist / ((0.75 * c * c + 1.0) ** cfg.power * tau2)
    return TestReport(
        stat, cfg.alpha, critical, stat > critical, "multiplicative",
        _diagnostics(rs, weight, cfg, limit="chi2_1", c_hat=c, s4=s4, s8=s8, tau2_hat=tau2, power=cfg.power),
    )


for _fn in (test_gaussian_ararch, test_gaussian_ar, test_gaussian_arch, test_linear_ar1, test_multiplicative):
    _fn.__test__ = False

TESTS = {
    "ar_arch": test_gaussian_ararch,
    "ar": test_gaussian_ar,
    "arch": test_gaussian_arch,
    "linear_ar1": test_linear_ar1,
    "multiplicative": test_multiplicative,
}


def run_test(name: str, series, cfg: Optional[TestConfig] = None, **overrides) -> TestReport:
    """Dispatch to a test by name, with config overrides as keyword arguments."""
    try:
        fn = TESTS[name]
    except KeyError:
        raise ValueError(f"unknown test {name!r}; choose from {sorted(TESTS)}") from None
    cfg = replace(cfg or TestConfig(), **overrides)
    return fn(series, cfg)
