import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from negsurvey import (
    DimensionMismatchError,
    DistributionError,
    InsufficientSampleError,
    ResponseTally,
    SingularDesignError,
    custom_design,
    covariance_hat,
    estimate_from_lambda,
    estimate_pi,
    estimate_pi_uniform,
    forward_lambda,
    project_to_simplex,
    uniform_design,
    wald_intervals,
)
from negsurvey.estimation import ProportionEstimate, normal_quantile

from conftest import random_design_matrix
from oracles import simplex_projection_bruteforce

CUSTOM_COLS = [(0, 0.6, 0.4), (0.2, 0, 0.8), (0.5, 0.5, 0)]


@pytest.fixture
def custom3():
    return custom_design(np.array(CUSTOM_COLS).T)


class TestForwardLambda:
    def test_point_mass(self):
        np.testing.assert_allclose(forward_lambda(uniform_design(3), [1, 0, 0]), [0, 0.5, 0.5])

    def test_symmetric_fixed_point(self):
        np.testing.assert_allclose(forward_lambda(uniform_design(3), [1 / 3] * 3), [1 / 3] * 3)

    def test_custom_hand_multiply(self, custom3):
        # 0.6*0.0 + 0.3*0.2 + 0.2*0.5 = 0.16, etc.
        np.testing.assert_allclose(forward_lambda(custom3, [0.5, 0.3, 0.2]), [0.16, 0.40, 0.44], atol=1e-15)

    def test_not_a_distribution(self):
        with pytest.raises(DistributionError):
            forward_lambda(uniform_design(3), [0.5, 0.5, 0.5])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            forward_lambda(uniform_design(3), [0.5, 0.5])


class TestTally:
    def test_lambda_hat_exact(self):
        t = ResponseTally([40, 30, 30])
        assert t.n == 100
        assert list(t.lambda_hat) == [0.4, 0.3, 0.3]

    @pytest.mark.parametrize("counts", [[-1, 2, 3], [0, 0, 0], [1.5, 2, 3]])
    def test_invalid(self, counts):
        with pytest.raises(ValueError):
            ResponseTally(counts)


class TestEstimatePi:
    def test_point_mass_recovered(self):
        est = estimate_pi(uniform_design(3), [0, 50, 50])
        np.testing.assert_allclose(est.pi_hat, [1, 0, 0], atol=1e-12)

    def test_interior(self):
        # closed form 1 - 2 * (0.4, 0.3, 0.3)
        est = estimate_pi(uniform_design(3), [40, 30, 30])
        np.testing.assert_allclose(est.pi_hat, [0.2, 0.4, 0.4], atol=1e-12)

    def test_out_of_simplex_returned_raw(self):
        est = estimate_pi(uniform_design(3), [60, 20, 20])
        np.testing.assert_allclose(est.pi_hat, [-0.2, 0.6, 0.6], atol=1e-12)
        assert est.pi_hat.sum() == pytest.approx(1.0, abs=1e-9)
        assert not est.in_simplex
        assert est.projected_pi is None

    def test_projection_opt_in(self):
        est = estimate_pi(uniform_design(3), [60, 20, 20], project=True)
        np.testing.assert_allclose(est.projected_pi, [0, 0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(est.pi_hat, [-0.2, 0.6, 0.6], atol=1e-12)

    def test_n1_has_no_covariance(self):
        est = estimate_pi(uniform_design(3), [0, 1, 0])
        np.testing.assert_allclose(est.pi_hat, [1, -1, 1], atol=1e-12)
        assert est.cov is None and est.se is None and est.intervals is None

    def test_singular_refused(self):
        cols = [(0, 0, 0.5, 0.5), (0, 0, 0.5, 0.5), (0.5, 0.5, 0, 0), (0.5, 0.5, 0, 0)]
        d = custom_design(np.array(cols).T)
        with pytest.raises(SingularDesignError, match="condition") as exc:
            estimate_pi(d, [1, 2, 3, 4])
        assert exc.value.rcond < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            estimate_pi(uniform_design(3), [1, 2, 3, 4])

    def test_custom_design_round_trip(self, custom3):
        lam = forward_lambda(custom3, [0.5, 0.3, 0.2])
        np.testing.assert_allclose(estimate_from_lambda(custom3, lam), [0.5, 0.3, 0.2], atol=1e-12)


class TestCovariance:
    def test_variance_closed_form(self):
        cov = covariance_hat(uniform_design(3), [0, 50, 50])
        assert cov[1, 1] == pytest.approx(1 / 99, abs=1e-12)
        assert cov[1, 2] == pytest.approx(-1 / 99, abs=1e-12)
        assert cov[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_one_cell(self):
        cov = covariance_hat(uniform_design(3), [100, 0, 0])
        np.testing.assert_allclose(cov, cov.T, atol=1e-12)
        closed = estimate_pi_uniform(3, [100, 0, 0]).cov
        np.testing.assert_allclose(cov, closed, atol=1e-12)

    def test_insufficient_sample(self):
        with pytest.raises(InsufficientSampleError):
            covariance_hat(uniform_design(3), [1, 0, 0])

    def test_general_design_matches_explicit_inverse(self, custom3):
        counts = np.array([17, 41, 42])
        lam = counts / counts.sum()
        inv = np.linalg.inv(custom3.p)
        expected = inv @ (np.diag(lam) - np.outer(lam, lam)) @ inv.T / (counts.sum() - 1)
        np.testing.assert_allclose(covariance_hat(custom3, counts), expected, atol=1e-12)


class TestUniformClosedForm:
    def test_point(self):
        np.testing.assert_allclose(estimate_pi_uniform(3, [40, 30, 30]).pi_hat, [0.2, 0.4, 0.4], atol=1e-15)

    def test_symmetric(self):
        np.testing.assert_allclose(estimate_pi_uniform(3, [7, 7, 7]).pi_hat, [1 / 3] * 3, atol=1e-15)

    def test_variance_n101(self):
        # (4/100) * (50/101) * (51/101)
        est = estimate_pi_uniform(3, [50, 25, 26])
        assert est.cov[0, 0] == pytest.approx(0.009999019703950594, abs=1e-15)

    @pytest.mark.parametrize("t", range(2, 9))
    def test_matches_matrix_path(self, t, rng):
        for _ in range(10):
            counts = rng.integers(0, 50, size=t)
            counts[0] += 2
            a = estimate_pi(uniform_design(t), counts)
            b = estimate_pi_uniform(t, counts)
            np.testing.assert_allclose(a.pi_hat, b.pi_hat, atol=1e-10, rtol=0)
            np.testing.assert_allclose(a.cov, b.cov, atol=1e-10, rtol=0)


class TestWald:
    def test_normal_quantile(self):
        assert normal_quantile(0.95) == pytest.approx(norm.ppf(0.975), abs=1e-12)
        for level in (0.5, 0.8, 0.9, 0.99, 0.999):
            assert normal_quantile(level) == pytest.approx(norm.ppf(0.5 + level / 2), abs=1e-9)

    def _est(self, pi, se):
        pi, se = np.asarray(pi, float), np.asarray(se, float)
        return ProportionEstimate(pi_hat=pi, lambda_hat=pi, n=10, cov=np.diag(se**2), se=se)

    def test_known_interval(self):
        iv = wald_intervals(self._est([0.2, 0.8], [0.05, 0.05]), 0.95)[0]
        assert iv.raw[0] == pytest.approx(0.10200180077299731, abs=1e-12)
        assert iv.raw[1] == pytest.approx(0.2979981992270027, abs=1e-12)
        assert iv.clipped == iv.raw

    def test_zero_se(self):
        iv = wald_intervals(self._est([0.3, 0.7], [0, 0]))[0]
        assert iv.raw == (0.3, 0.3)

    def test_clipping_below_zero(self):
        iv = wald_intervals(self._est([-0.2, 1.2], [0.01, 0.01]))
        assert iv[0].raw[1] < 0
        assert iv[0].clipped == (0.0, 0.0)
        assert iv[1].clipped == (1.0, 1.0)

    def test_needs_covariance(self):
        est = estimate_pi(uniform_design(3), [1, 0, 0])
        with pytest.raises(InsufficientSampleError):
            wald_intervals(est)


class TestSimplexProjection:
    def test_feasible_unchanged(self):
        np.testing.assert_array_equal(project_to_simplex([0.2, 0.4, 0.4]), [0.2, 0.4, 0.4])

    def test_vertex_unchanged(self):
        np.testing.assert_array_equal(project_to_simplex([1, 0, 0]), [1, 0, 0])

    def test_out_of_simplex(self):
        np.testing.assert_allclose(project_to_simplex([-0.2, 0.6, 0.6]), [0, 0.5, 0.5], atol=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=7))
    def test_matches_bruteforce(self, vals):
        v = np.array(vals)
        v = v - (v.sum() - 1.0) / v.size  # onto the affine hyperplane
        got = project_to_simplex(v)
        ref = simplex_projection_bruteforce(list(v))
        assert np.all(got >= 0)
        assert got.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(got, ref, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_exact_lambda_round_trip(t, seed):
    r = np.random.default_rng(seed)
    d = custom_design(random_design_matrix(t, r))
    pi = r.dirichlet(np.ones(t))
    try:
        got = estimate_from_lambda(d, forward_lambda(d, pi))
    except SingularDesignError:
        return
    np.testing.assert_allclose(got, pi, atol=1e-9, rtol=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.data())
def test_mass_conservation(t, data):
    counts = data.draw(st.lists(st.integers(0, 1000), min_size=t, max_size=t).filter(lambda c: sum(c) > 0))
    est = estimate_pi(uniform_design(t), counts)
    assert est.pi_hat.sum() == pytest.approx(1.0, abs=1e-9)
    if est.cov is not None:
        np.testing.assert_allclose(est.cov, est.cov.T, atol=1e-12)


@pytest.mark.parametrize("t", [3, 4, 5])
def test_one_cell_tallies_conserve_mass(t):
    for i in range(t):
        counts = np.zeros(t, dtype=int)
        counts[i] = 37
        assert estimate_pi(uniform_design(t), counts).pi_hat.sum() == pytest.approx(1.0, abs=1e-9)
