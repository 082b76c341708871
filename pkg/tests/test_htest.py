import math
import warnings

import numpy as np
import pytest

from charnorm.dgp import InnovationSpec, Series, ar1, arch1, simulate
from charnorm.errors import DegenerateTau, UntabulatedAlpha, ZeroVariance
from charnorm.htest import (
    CriticalTable,
    TestConfig,
    estimate_c,
    estimate_theta,
    run_test,
    table_arch,
    table_ararch,
    test_gaussian_ar,
    test_gaussian_ararch,
    test_gaussian_arch,
    test_linear_ar1,
    test_multiplicative,
)
from charnorm.resid import default_bandwidth, residuals
from charnorm.smooth import FittedCurves, WeightFn, default_weight

WIDE = WeightFn("indicator", -100.0, 100.0)


def squared_arch(n, rng):
    # X_t = Z_t**2 for a Gaussian ARCH(1) Z: m(x) = 0.75 + 0.25 x, sigma = sqrt(2) m
    z = simulate(arch1(), n, rng).values
    return Series(z * z)


def test_tables_verbatim():
    assert table_ararch().rows == ((0.15, 0.118), (0.1, 0.135), (0.05, 0.165), (0.025, 0.196), (0.01, 0.237))
    assert table_arch().rows == ((0.15, 0.284), (0.1, 0.347), (0.05, 0.461), (0.02, 0.6198), (0.01, 0.743))
    assert table_ararch().critical(0.05) == 0.165
    assert table_arch().critical(0.05) == 0.461
    assert table_arch().critical(0.02) == 0.6198
    assert table_ararch().limit_kind == "shifted_bridge"
    assert table_arch().limit_kind == "brownian_bridge"


def test_untabulated_alpha():
    with pytest.raises(UntabulatedAlpha):
        table_arch().critical(0.025)
    with pytest.raises(UntabulatedAlpha):
        table_ararch().critical(0.02)
    with pytest.raises(UntabulatedAlpha):
        table_arch().critical(0.2, interpolate=True)


def test_interpolation_is_log_linear_and_monotone():
    c = table_arch().critical(0.025, interpolate=True)
    assert 0.461 < c < 0.6198
    t = (math.log(0.025) - math.log(0.05)) / (math.log(0.02) - math.log(0.05))
    assert c == pytest.approx(math.exp(math.log(0.461) + t * (math.log(0.6198) - math.log(0.461))), rel=1e-12)
    assert table_ararch().critical(0.05, interpolate=True) == 0.165


def test_critical_table_must_decrease():
    with pytest.raises(ValueError):
        CriticalTable(((0.1, 0.2), (0.05, 0.2)), "chi2_1")


def test_estimate_theta_examples():
    assert estimate_theta(Series([1.0, 0.5, 0.25, 0.125]), "ols") == 0.5
    assert estimate_theta(Series([0.0, 1.0, 0.0, 1.0]), "ols") == 0.0
    x = Series([1.0, 0.5, 0.25, 0.125])
    # yule-walker: lag-one sum over lag-zero sum of squares
    assert estimate_theta(x, "yule_walker") == pytest.approx((0.5 + 0.125 + 0.03125) / 1.328125, rel=1e-14)
    with pytest.raises(ZeroVariance):
        estimate_theta(Series([0.0, 0.0, 1.0]), "ols")
    with pytest.raises(ValueError):
        estimate_theta(x, "mle")


def test_estimate_theta_iid():
    x = Series(np.random.default_rng(0).standard_normal(10 ** 4 + 1))
    assert abs(estimate_theta(x)) < 0.05
    assert abs(estimate_theta(x, "yule_walker")) < 0.05


def test_estimate_c_examples_via_fits():
    rng = np.random.default_rng(3)
    s = Series(rng.standard_normal(60))
    lag = s.values[:-1]
    sig = 0.5 + lag * lag
    assert estimate_c(s, 1.0, weight=WIDE, fits=FittedCurves(lag, sig, sig ** 2)) == pytest.approx(1.0, rel=1e-14)
    assert estimate_c(s, 1.0, weight=WIDE, fits=FittedCurves(lag, np.zeros(lag.size), sig ** 2)) == 0.0
    assert estimate_c(s, 1.0, weight=WIDE, fits=FittedCurves(lag, -2.5 * sig, sig ** 2)) == pytest.approx(-2.5)


def test_estimate_c_weighted_least_squares():
    # closed form equals the minimiser of sum v s^2 (m - c s)^2
    rng = np.random.default_rng(4)
    s = Series(rng.standard_normal(50))
    lag = s.values[:-1]
    m, sig = np.sin(lag), 1 + 0.3 * lag * lag
    c = estimate_c(s, 1.0, weight=WIDE, fits=FittedCurves(lag, m, sig ** 2))
    grid = np.linspace(c - 0.01, c + 0.01, 201)
    loss = [np.sum(sig ** 2 * (m - g * sig) ** 2) for g in grid]
    assert abs(grid[int(np.argmin(loss))] - c) <= 1e-4


def test_estimate_c_squared_arch_converges():
    rng = np.random.default_rng(21)
    cs = [estimate_c(squared_arch(2000, rng)) for _ in range(10)]
    assert np.mean(cs) == pytest.approx(1 / math.sqrt(2), abs=0.05)


def test_multiplicative_constant_volatility_is_degenerate():
    s = Series(np.random.default_rng(5).standard_normal(200))
    with pytest.raises(DegenerateTau):
        test_multiplicative(s, TestConfig(bandwidth=1e6))


def test_multiplicative_report_and_power_option():
    s = squared_arch(300, np.random.default_rng(6))
    r1 = test_multiplicative(s)
    r2 = test_multiplicative(s, TestConfig(power=2.0))
    d = r1.diagnostics
    assert d["tau2_hat"] == pytest.approx(d["s8"] / d["s4"] ** 2 - 1)
    assert d["tau2_hat"] >= 0
    assert r1.critical == pytest.approx(3.841458820694124)
    assert r2.statistic == pytest.approx(r1.statistic / (0.75 * d["c_hat"] ** 2 + 1), rel=1e-12)


@pytest.mark.parametrize("fn", [test_gaussian_ararch, test_gaussian_ar, test_gaussian_arch,
                                test_linear_ar1, test_multiplicative])
@pytest.mark.parametrize("seed", range(4))
def test_reject_iff_statistic_above_critical(fn, seed):
    rng = np.random.default_rng(seed)
    s = simulate(arch1(innovation=InnovationSpec.skew_normal(0.5 * seed)), 150, rng)
    r = fn(s, TestConfig(alpha=0.1))
    assert r.reject == (r.statistic > r.critical)
    assert r.statistic >= 0 and r.alpha == 0.1
    assert r.to_dict()["diagnostics"]["n"] == 150


def test_report_diagnostics():
    s = simulate(ar1(), 200, np.random.default_rng(7))
    r = test_gaussian_ar(s)
    d = r.diagnostics
    assert d["bandwidth"] == pytest.approx(default_bandwidth(s))
    assert d["weight_support"] == pytest.approx([-math.log(200), math.log(200)])
    assert 0 < d["effective_weight_mass"] <= 1
    assert d["sigma2_hat"] > 0 and d["limit"] == "shifted_bridge"
    assert test_gaussian_arch(s).diagnostics["limit"] == "brownian_bridge"
    assert "theta_hat" in test_linear_ar1(s).diagnostics


def test_statistic_matches_manual_pipeline():
    from charnorm.resid import edf
    from charnorm.stats import cvm_vs_normal

    s = simulate(ar1(), 120, np.random.default_rng(8))
    r = test_gaussian_ararch(s, TestConfig(bandwidth=0.4))
    rs = residuals(s, "ar_arch", 0.4)
    assert r.statistic == cvm_vs_normal(edf(rs), 120).value


def test_linear_ar1_threshold_and_ols_seam():
    s = simulate(ar1(), 200, np.random.default_rng(9))
    r = test_linear_ar1(s)
    assert r.critical == pytest.approx(3.8415, abs=1e-4)
    assert r.diagnostics["theta_hat"] == estimate_theta(s)
    r2 = test_linear_ar1(s, TestConfig(theta_method="yule_walker"))
    assert r2.diagnostics["theta_hat"] == estimate_theta(s, "yule_walker")


@pytest.mark.parametrize("scale", [0.1, 10.0])
@pytest.mark.parametrize("name", ["ar", "ar_arch", "arch"])
def test_scale_invariance_with_scaled_bandwidth_and_support(scale, name):
    s = simulate(arch1(), 200, np.random.default_rng(10))
    h = default_bandwidth(s)
    w = default_weight(200)
    base = run_test(name, s, bandwidth=h, weight=w)
    sw = WeightFn("indicator", scale * w.a, scale * w.b)
    scaled = run_test(name, Series(scale * s.values), bandwidth=scale * h, weight=sw)
    assert scaled.statistic == pytest.approx(base.statistic, rel=1e-8)


def test_burn_in_prefix_discarded_by_caller():
    rng = np.random.default_rng(11)
    full = simulate(ar1(), 400, rng).values
    a = test_gaussian_ar(Series(full[100:]))
    b = test_gaussian_ar(Series(np.concatenate((full[:100], full[100:]))[100:]))
    assert a.statistic == b.statistic


def test_short_series_warns():
    s = Series(np.random.default_rng(12).standard_normal(15))
    with pytest.warns(UserWarning, match="transitions"):
        test_gaussian_arch(s)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        test_gaussian_arch(Series(np.random.default_rng(12).standard_normal(40)))


def test_run_test_dispatch():
    s = simulate(ar1(), 100, np.random.default_rng(13))
    assert run_test("ar", s, alpha=0.1).alpha == 0.1
    with pytest.raises(ValueError):
        run_test("kpss", s)
    with pytest.raises(UntabulatedAlpha):
        run_test("arch", s, alpha=0.025)
    assert run_test("arch", s, alpha=0.025, interpolate=True).critical > 0.461


@pytest.mark.slow
def test_gaussianity_tests_detect_strong_skewness():
    rng = np.random.default_rng(14)
    rej = [test_gaussian_ararch(simulate(ar1(innovation=InnovationSpec.skew_normal(1.0)), 200, rng)).reject
           for _ in range(40)]
    assert np.mean(rej) >= 0.8
