import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedlingam.dists import (InvalidArgument, LaplaceParams, MvtParams, RngStream, excess_kurtosis,
                               laplace_logpdf, log_mean_exp, sample_laplace, sample_mvn, sample_mvt)


@pytest.mark.parametrize("x, scale, expected", [
    (0.0, 1.0, -math.log(2)),
    (1.0, 1.0, -math.log(2) - 1),
    (0.0, 1 / math.sqrt(2), -math.log(math.sqrt(2))),
])
def test_laplace_logpdf_values(x, scale, expected):
    assert laplace_logpdf(x, LaplaceParams(0.0, scale)) == pytest.approx(expected, abs=1e-12)


def test_laplace_from_std_has_variance_h_squared():
    p = LaplaceParams.from_std(-1.7)
    assert p.variance == pytest.approx(1.7**2)


@pytest.mark.parametrize("mean, scale", [(0.0, 1.0), (3.0, 0.25), (-2.0, 5.0)])
def test_laplace_density_integrates_to_one(mean, scale):
    grid = np.linspace(mean - 40 * scale, mean + 40 * scale, 400_001)
    dens = np.exp(laplace_logpdf(grid, LaplaceParams(mean, scale)))
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_laplace_logpdf_rejects_nonfinite(bad):
    with pytest.raises(InvalidArgument):
        laplace_logpdf(bad, LaplaceParams())


@pytest.mark.parametrize("scale", [0.0, -1.0])
def test_laplace_params_reject_bad_scale(scale):
    with pytest.raises(InvalidArgument):
        LaplaceParams(0.0, scale)


def test_sample_laplace_moments():
    x = sample_laplace(LaplaceParams.from_std(1.0), RngStream(1), 100_000)
    assert 0.97 <= x.var() <= 1.03
    assert abs(x.mean()) < 0.02


def test_sample_laplace_rejects_empty_request():
    with pytest.raises(InvalidArgument):
        sample_laplace(LaplaceParams(), RngStream(1), 0)


def test_samplers_are_pure_functions_of_stream():
    s = RngStream(42, 7)
    assert np.array_equal(sample_laplace(LaplaceParams(), s, 50), sample_laplace(LaplaceParams(), s, 50))
    assert np.array_equal(sample_mvt(MvtParams(6, 0.3), s, 50), sample_mvt(MvtParams(6, 0.3), s, 50))
    assert np.array_equal(sample_mvn(np.eye(2), s, 50), sample_mvn(np.eye(2), s, 50))
    assert not np.array_equal(sample_laplace(LaplaceParams(), s, 50),
                              sample_laplace(LaplaceParams(), RngStream(42, 8), 50))


def test_child_streams_are_distinct_and_reproducible():
    root = RngStream(3)
    a, b = root.child(0), root.child(1)
    assert a == RngStream(3, (0, 0))
    assert a.generator().random() == a.generator().random()
    assert a.generator().random() != b.generator().random()


def test_mvt_component_variance():
    u = sample_mvt(MvtParams(6, 0.0), RngStream(2), 100_000)
    assert u.shape == (100_000, 2)
    for col in u.T:
        assert 1.44 <= col.var() <= 1.56


def test_mvt_correlation():
    u = sample_mvt(MvtParams(6, 0.5), RngStream(3), 100_000)
    assert np.corrcoef(u.T)[0, 1] == pytest.approx(0.5, abs=0.02)


def test_mvt_uncorrelated_but_energy_correlated():
    u = sample_mvt(MvtParams(6, 0.0), RngStream(4), 100_000)
    assert abs(np.corrcoef(u.T)[0, 1]) < 0.02
    assert np.cov(u[:, 0] ** 2, u[:, 1] ** 2)[0, 1] > 0


def test_mvt_marginal_kurtosis_matches_t6():
    # t6 has no finite 8th moment, so this estimator is erratic: roughly 1 seed
    # in 13 lands outside the band at this sample size.
    u = sample_mvt(MvtParams(6, 0.0), RngStream(0), 1_000_000)
    assert 2.4 <= excess_kurtosis(u[:, 0]) <= 3.6


def test_mvt_single_draw_is_a_2_vector():
    assert sample_mvt(MvtParams(), RngStream(0)).shape == (2,)


@pytest.mark.parametrize("nu", [1, 2, 0])
def test_mvt_rejects_small_nu(nu):
    with pytest.raises(InvalidArgument):
        MvtParams(nu, 0.0)


def test_mvt_rejects_unit_correlation():
    with pytest.raises(InvalidArgument):
        MvtParams(6, 1.0)


def test_mvn_identity_variances():
    z = sample_mvn(np.eye(2), RngStream(6), 100_000)
    assert np.all((0.97 <= z.var(axis=0)) & (z.var(axis=0) <= 1.03))


def test_mvn_correlation():
    z = sample_mvn([[1.0, 0.9], [0.9, 1.0]], RngStream(7), 100_000)
    assert np.corrcoef(z.T)[0, 1] == pytest.approx(0.9, abs=0.01)


def test_mvn_zero_matrix_is_point_mass():
    assert np.array_equal(sample_mvn(np.zeros((2, 2)), RngStream(8)), np.zeros(2))


def test_mvn_rejects_indefinite():
    with pytest.raises(InvalidArgument):
        sample_mvn([[1.0, 2.0], [2.0, 1.0]], RngStream(0))


def test_log_mean_exp_examples():
    assert log_mean_exp([5.5, 5.5, 5.5]) == 5.5
    assert log_mean_exp([0.0, math.log(3)]) == pytest.approx(math.log(2), abs=1e-12)
    v = log_mean_exp([-1000.0, 0.0])
    assert v == pytest.approx(math.log(0.5 * (1 + math.exp(-1000))), abs=1e-12)
    assert math.isfinite(v)


def test_log_mean_exp_edge_cases():
    assert log_mean_exp([-math.inf, -math.inf]) == -math.inf
    assert log_mean_exp([-math.inf, 0.0]) == pytest.approx(-math.log(2))
    with pytest.raises(InvalidArgument):
        log_mean_exp([])
    with pytest.raises(InvalidArgument):
        log_mean_exp([0.0, math.inf])
    with pytest.raises(InvalidArgument):
        log_mean_exp([0.0, math.nan])


def test_log_mean_exp_axis():
    v = np.array([[0.0, math.log(3)], [1.0, 1.0]])
    assert np.allclose(log_mean_exp(v, axis=1), [math.log(2), 1.0])


finite = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_log_mean_exp_bounded_by_max(values):
    out = log_mean_exp(values)
    m = max(values)
    assert out <= m
    if len(set(values)) == 1:
        assert out == m
    elif m - min(values) > 1e-9:
        # below this spread exp() rounds every shifted term to 1
        assert out < m
    # matches the naive formula after shifting
    ref = m + math.log(sum(math.exp(v - m) for v in values) / len(values))
    assert out == pytest.approx(ref, rel=1e-12, abs=1e-9)
