"""Distribution kernels against high-precision and Monte Carlo oracles."""

import math

import mpmath
import numpy as np
import pytest

from evidencelab import DistKind, DistSpec, ParameterError, cdf, mc_cdf_oracle, quantile

mpmath.mp.dps = 40


def mp_norm_cdf(x):
    return 0.5 * mpmath.erfc(-mpmath.mpf(x) / mpmath.sqrt(2))


def mp_t_cdf(x, df):
    x, df = mpmath.mpf(x), mpmath.mpf(df)
    tail = mpmath.betainc(df / 2, mpmath.mpf(1) / 2, 0, df / (df + x * x),
                          regularized=True) / 2
    return tail if x < 0 else 1 - tail


def mp_chi2_cdf(x, df):
    return mpmath.gammainc(mpmath.mpf(df) / 2, 0, mpmath.mpf(x) / 2, regularized=True)


def mp_f_cdf(x, df1, df2):
    x, df1, df2 = mpmath.mpf(x), mpmath.mpf(df1), mpmath.mpf(df2)
    return mpmath.betainc(df1 / 2, df2 / 2, 0, df1 * x / (df1 * x + df2),
                          regularized=True)


def test_normal_center():
    assert cdf(DistSpec(DistKind.NORMAL), 0.0) == pytest.approx(0.5, abs=1e-15)


def test_central_cdfs_match_mpmath():
    rng = np.random.default_rng(5)
    for _ in range(60):
        x = float(rng.normal(scale=3))
        df1 = float(rng.integers(1, 200))
        df2 = float(rng.integers(1, 200))
        assert cdf(DistSpec(DistKind.NORMAL), x) == pytest.approx(
            float(mp_norm_cdf(x)), abs=1e-12)
        assert cdf(DistSpec(DistKind.STUDENT_T, df1=df1), x) == pytest.approx(
            float(mp_t_cdf(x, df1)), abs=1e-10)
        assert cdf(DistSpec(DistKind.CHI_SQUARE, df1=df1), abs(x) * 10) == pytest.approx(
            float(mp_chi2_cdf(abs(x) * 10, df1)), abs=1e-10)
        assert cdf(DistSpec(DistKind.FISHER_F, df1=df1, df2=df2), abs(x)) == pytest.approx(
            float(mp_f_cdf(abs(x), df1, df2)), abs=1e-10)


def test_chi2_df1_95th_percentile():
    # 3.841459 is the canonical level-0.05 critical value for one df.
    oracle = float(mp_chi2_cdf(3.841459, 1))
    assert cdf(DistSpec(DistKind.CHI_SQUARE, df1=1), 3.841459) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(0.95, abs=1e-6)


def test_known_quantiles():
    assert quantile(DistSpec(DistKind.NORMAL), 0.975) == pytest.approx(1.959964, abs=1e-5)
    assert quantile(DistSpec(DistKind.STUDENT_T, df1=10), 0.975) == pytest.approx(2.228139, abs=1e-4)
    assert quantile(DistSpec(DistKind.CHI_SQUARE, df1=1), 0.95) == pytest.approx(3.841459, abs=1e-4)


def test_symmetric_median_is_zero():
    assert quantile(DistSpec(DistKind.NORMAL), 0.5) == pytest.approx(0.0, abs=1e-9)
    assert quantile(DistSpec(DistKind.STUDENT_T, df1=7), 0.5) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("spec", [
    DistSpec(DistKind.NORMAL, ncp=0.7),
    DistSpec(DistKind.STUDENT_T, df1=30, ncp=1.5),
    DistSpec(DistKind.STUDENT_T, df1=5, ncp=-3.0),
    DistSpec(DistKind.CHI_SQUARE, df1=1, ncp=8.0),
    DistSpec(DistKind.CHI_SQUARE, df1=4, ncp=120.0),
    DistSpec(DistKind.FISHER_F, df1=2, df2=40, ncp=5.0),
    DistSpec(DistKind.FISHER_F, df1=1, df2=18, ncp=13.0),
])
def test_noncentral_cdf_matches_monte_carlo(spec):
    xs = [quantile(spec, q) for q in (0.1, 0.5, 0.9)]
    for x in xs:
        mc = mc_cdf_oracle(spec, x, 10**6, seed=17)
        assert abs(cdf(spec, x) - mc) <= 0.005


def test_nct_spec_example_vs_monte_carlo():
    spec = DistSpec(DistKind.STUDENT_T, df1=30, ncp=1.5)
    mc = mc_cdf_oracle(spec, 2.0, 10**6, seed=3)
    assert abs(cdf(spec, 2.0) - mc) <= 0.005


def test_noncentral_zero_ncp_equals_central():
    rng = np.random.default_rng(11)
    for _ in range(30):
        x = float(rng.normal(scale=4))
        df1 = float(rng.integers(1, 100))
        df2 = float(rng.integers(1, 100))
        assert abs(
            cdf(DistSpec(DistKind.STUDENT_T, df1=df1, ncp=0.0), x)
            - cdf(DistSpec(DistKind.STUDENT_T, df1=df1), x)) < 1e-9
        assert abs(
            cdf(DistSpec(DistKind.CHI_SQUARE, df1=df1, ncp=0.0), abs(x))
            - cdf(DistSpec(DistKind.CHI_SQUARE, df1=df1), abs(x))) < 1e-9
        assert abs(
            cdf(DistSpec(DistKind.FISHER_F, df1=df1, df2=df2, ncp=0.0), abs(x))
            - cdf(DistSpec(DistKind.FISHER_F, df1=df1, df2=df2), abs(x))) < 1e-9


def test_tiny_ncp_close_to_central():
    spec = DistSpec(DistKind.STUDENT_T, df1=12, ncp=1e-9)
    central = DistSpec(DistKind.STUDENT_T, df1=12)
    for x in (-2.0, 0.0, 1.3):
        assert abs(cdf(spec, x) - cdf(central, x)) < 1e-8


def test_cdf_monotone_and_bounded():
    rng = np.random.default_rng(23)
    specs = [
        DistSpec(DistKind.NORMAL, ncp=-1.0),
        DistSpec(DistKind.STUDENT_T, df1=9, ncp=2.0),
        DistSpec(DistKind.CHI_SQUARE, df1=3, ncp=4.0),
        DistSpec(DistKind.FISHER_F, df1=5, df2=25, ncp=2.5),
    ]
    for spec in specs:
        xs = np.sort(rng.uniform(-5, 25, size=40))
        values = [cdf(spec, float(x)) for x in xs]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_quantile_cdf_round_trip():
    rng = np.random.default_rng(31)
    specs = [
        DistSpec(DistKind.NORMAL),
        DistSpec(DistKind.STUDENT_T, df1=4),
        DistSpec(DistKind.STUDENT_T, df1=40, ncp=2.2),
        DistSpec(DistKind.CHI_SQUARE, df1=2, ncp=7.0),
        DistSpec(DistKind.FISHER_F, df1=3, df2=60, ncp=1.0),
    ]
    for spec in specs:
        for q in rng.uniform(0.001, 0.999, size=8):
            tol = 1e-8 if spec.ncp == 0.0 else 1e-6
            assert abs(cdf(spec, quantile(spec, float(q))) - q) < tol


def test_mc_oracle_determinism_and_symmetry():
    spec = DistSpec(DistKind.NORMAL)
    a = mc_cdf_oracle(spec, 0.0, 10**6, seed=1)
    b = mc_cdf_oracle(spec, 0.0, 10**6, seed=1)
    assert a == b
    assert a == pytest.approx(0.5, abs=0.002)


def test_mc_oracle_chi2_cross_check():
    spec = DistSpec(DistKind.CHI_SQUARE, df1=1)
    assert mc_cdf_oracle(spec, 3.841459, 10**6, seed=2) == pytest.approx(0.95, abs=0.002)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        DistSpec(DistKind.STUDENT_T)  # missing df1
    with pytest.raises(ParameterError):
        DistSpec(DistKind.NORMAL, df1=3.0)
    with pytest.raises(ParameterError):
        DistSpec(DistKind.CHI_SQUARE, df1=-1.0)
    with pytest.raises(ParameterError):
        DistSpec(DistKind.CHI_SQUARE, df1=1.0, ncp=-2.0)
    with pytest.raises(ParameterError):
        quantile(DistSpec(DistKind.NORMAL), 1.5)
    with pytest.raises(ParameterError):
        mc_cdf_oracle(DistSpec(DistKind.NORMAL), 0.0, 100, seed=0)
    with pytest.raises(ParameterError):
        cdf(DistSpec(DistKind.NORMAL), math.nan)
