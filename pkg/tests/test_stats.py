import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charnorm.resid import StepEDF
from charnorm.stats import (
    chi2_1_quantile,
    cvm_vs_normal,
    l2_distance_edfs,
    normal_cdf,
    normal_quantile,
)


def _mp_ncdf(y):
    mpmath.mp.dps = 30
    return float(mpmath.ncdf(mpmath.mpf(y)))


def test_normal_cdf_against_mpmath():
    ys = np.linspace(-8, 8, 1601)
    got = normal_cdf(ys)
    want = np.array([_mp_ncdf(y) for y in ys])
    assert np.max(np.abs(got - want)) <= 1e-12


def test_normal_cdf_examples():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.959963985) == pytest.approx(_mp_ncdf(1.959963985), abs=1e-15)
    assert normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)


# the upper tail loses y-precision once Phi(y) rounds toward 1; the contract is in u
@pytest.mark.parametrize("y", [-7.5, -3.0, -1.3, 0.0, 1.3, 4.2])
def test_quantile_round_trip(y):
    assert normal_quantile(normal_cdf(y)) == pytest.approx(y, abs=1e-10)


def test_quantile_inverse_in_u():
    u = np.linspace(1e-10, 1 - 1e-10, 999)
    assert np.max(np.abs(normal_cdf(normal_quantile(u)) - u)) <= 1e-10


@pytest.mark.parametrize("u", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_quantile_rejects_outside_unit_interval(u):
    with pytest.raises(ValueError):
        normal_quantile(u)


def test_cvm_single_atom_is_one_twelfth():
    v = cvm_vs_normal(StepEDF.from_sample([0.0]), 1)
    assert v.value == pytest.approx(1 / 12, abs=1e-15)
    assert float(v) == v.value and v.n == 1


def test_cvm_scales_with_n_and_rejects_bad_n():
    f = StepEDF.from_sample([-0.4, 0.1, 2.0])
    assert cvm_vs_normal(f, 30).value == pytest.approx(30 * cvm_vs_normal(f, 1).value, rel=1e-14)
    with pytest.raises(ValueError):
        cvm_vs_normal(f, 0)


def textbook_cvm(x):
    n = x.size
    u = np.sort(normal_cdf(x))
    t = np.arange(1, n + 1)
    return 1 / (12 * n) + np.sum((u - (2 * t - 1) / (2 * n)) ** 2)


@pytest.mark.parametrize("seed", range(10))
def test_cvm_matches_textbook_identity(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(0.3 * (seed % 3), 1.0 + 0.2 * seed, size=5 + 40 * seed)
    assert cvm_vs_normal(StepEDF.from_sample(x), x.size).value == pytest.approx(textbook_cvm(x), abs=1e-12)


def test_cvm_split_jumps_unchanged():
    a = StepEDF.from_sample([0.5, 0.5, -1.0], [0.25, 0.25, 0.5])
    b = StepEDF.from_sample([0.5, -1.0], [0.5, 0.5])
    assert cvm_vs_normal(a, 7).value == pytest.approx(cvm_vs_normal(b, 7).value, abs=1e-15)


def midpoint_cvm_oracle(atoms_u, weights, n, cells=10 ** 6):
    # midpoint rule in u; atoms sit on cell boundaries so each cell is one polynomial piece
    mid = (np.arange(cells) + 0.5) / cells
    order = np.argsort(atoms_u)
    cum = np.concatenate(([0.0], np.cumsum(weights[order]) / weights.sum()))
    level = cum[np.searchsorted(atoms_u[order], mid, side="right")]
    return n * np.mean((level - mid) ** 2)


@pytest.mark.parametrize("seed", range(3))
def test_cvm_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    cells = 10 ** 6
    k = rng.choice(np.arange(1, cells), size=25, replace=False)
    w = rng.uniform(0.1, 1.0, size=25)
    f = StepEDF.from_sample(normal_quantile(k / cells), w)
    assert cvm_vs_normal(f, 25).value == pytest.approx(midpoint_cvm_oracle(k / cells, w, 25, cells), abs=1e-8)


def test_l2_examples():
    f = StepEDF.from_sample([0.0])
    g = StepEDF.from_sample([1.0])
    assert l2_distance_edfs(f, g) == 1.0
    assert l2_distance_edfs(f, f) == 0.0
    h = StepEDF.from_sample([-1.0, 2.0])
    # (0, 0.5) on [-1, 0), (1, 0.5) on [0, 2): 0.25 + 0.5
    assert l2_distance_edfs(f, h) == pytest.approx(0.75, abs=1e-15)


def midpoint_l2_oracle(fa, fw, ga, gw, lo, step, cells):
    mid = lo + (np.arange(cells) + 0.5) * step

    def levels(a, w):
        o = np.argsort(a)
        cum = np.concatenate(([0.0], np.cumsum(w[o]) / w.sum()))
        return cum[np.searchsorted(a[o], mid, side="right")]

    return float(np.sum((levels(fa, fw) - levels(ga, gw)) ** 2) * step)


@pytest.mark.parametrize("seed", range(3))
def test_l2_grid_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    cells, lo, step = 10 ** 6, -8.0, 16.0 / 10 ** 6
    fk, gk = rng.integers(1, cells, 30), rng.integers(1, cells, 45)
    fa, ga = lo + fk * step, lo + gk * step
    fw, gw = rng.uniform(0.1, 1, 30), rng.uniform(0.1, 1, 45)
    got = l2_distance_edfs(StepEDF.from_sample(fa, fw), StepEDF.from_sample(ga, gw))
    assert got == pytest.approx(midpoint_l2_oracle(fa, fw, ga, gw, lo, step, cells), abs=1e-8)


samples = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=20)


@settings(max_examples=60, deadline=None)
@given(samples, samples, samples)
def test_l2_symmetry_and_triangle_bound(a, b, c):
    f, g, h = (StepEDF.from_sample(v) for v in (a, b, c))
    assert l2_distance_edfs(f, g) == pytest.approx(l2_distance_edfs(g, f), abs=1e-12)
    assert l2_distance_edfs(f, h) <= 2 * l2_distance_edfs(f, g) + 2 * l2_distance_edfs(g, h) + 1e-12
    assert l2_distance_edfs(f, g) >= 0


@settings(max_examples=60, deadline=None)
@given(samples)
def test_cvm_nonnegative(a):
    assert cvm_vs_normal(StepEDF.from_sample(a), len(a)).value >= 0


def test_chi2_quantiles():
    assert chi2_1_quantile(0.95) == pytest.approx(3.841458820694124, abs=1e-10)
    assert chi2_1_quantile(0.95) == pytest.approx(1.959964 ** 2, abs=1e-5)
    p = 2 * _mp_ncdf(1.0) - 1
    assert p == pytest.approx(0.6827, abs=1e-4)
    assert chi2_1_quantile(p) == pytest.approx(1.0, abs=1e-12)
    ps = np.linspace(0.01, 0.99, 50)
    assert np.all(np.diff([chi2_1_quantile(q) for q in ps]) > 0)
    for bad in (0.0, 1.0, 1.2):
        with pytest.raises(ValueError):
            chi2_1_quantile(bad)


def test_chi2_quantile_matches_mpmath():
    mpmath.mp.dps = 30
    # P(chi2_1 <= q) = erf(sqrt(q / 2))
    for p in (0.5, 0.9, 0.95, 0.99):
        q = chi2_1_quantile(p)
        assert float(mpmath.erf(mpmath.sqrt(mpmath.mpf(q) / 2))) == pytest.approx(p, abs=1e-12)
    assert math.isfinite(chi2_1_quantile(1 - 1e-12))
