"""Nonparametric tests for Gaussian innovations in AR-ARCH (CHARN) time series."""

from .dgp import CharnSpec, InnovationSpec, Series, ar1, arch1, sample_innovations, simulate, skew_normal_params
from .errors import (
    CharnError,
    DegenerateTau,
    DegenerateWeights,
    EmptyNeighborhood,
    ExplosiveSeries,
    NonpositiveVariance,
    UntabulatedAlpha,
    ZeroVariance,
)
from .htest import (
    CriticalTable,
    TestConfig,
    TestReport,
    estimate_c,
    estimate_theta,
    run_test,
    table_ararch,
    table_arch,
    test_gaussian_ar,
    test_gaussian_ararch,
    test_gaussian_arch,
    test_linear_ar1,
    test_multiplicative,
)
from .resid import ResidualSet, StepEDF, edf, edf_null_linear_ar, edf_null_multiplicative, residuals
from .smooth import GAUSSIAN, Kernel, WeightFn, bandwidth_rule, default_weight, nw_mean, nw_var, nw_var_arch
from .stats import chi2_1_quantile, cvm_vs_normal, l2_distance_edfs, normal_cdf, normal_quantile

__version__ = "0.1.0"
