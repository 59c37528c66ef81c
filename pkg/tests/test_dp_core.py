"""Unit tests for the closed-form noise and cost math.

Expected constants were computed with mpmath at 40 significant digits; the
same oracle is evaluated inline where that keeps the provenance obvious.
"""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpledger import (
    CasePreconditionError,
    InvalidParameterError,
    PrivacyParams,
    epsilon_from_loss_variance,
    epsilon_squared_cost_fresh,
    epsilon_squared_cost_partial,
    erf_inverse,
    gaussian_sigma,
    sample_gaussian,
    utility_alpha,
)

mp.mp.dps = 40


def oracle_sigma(sensitivity, epsilon, delta) -> float:
    return float(
        mp.sqrt(2 * mp.log(mp.mpf("1.25") / mp.mpf(delta))) * sensitivity / epsilon
    )


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


class TestGaussianSigma:
    def test_matches_high_precision_oracle(self):
        got = gaussian_sigma(1.0, PrivacyParams(1.0, 1e-5))
        assert rel_err(got, 4.844805262605389) < 1e-12
        assert rel_err(got, oracle_sigma(1.0, 1.0, "1e-5")) < 1e-12

        got = gaussian_sigma(202.0, PrivacyParams(1.0, 1e-4))
        assert rel_err(got, 877.4096853875755) < 1e-12
        assert rel_err(got, oracle_sigma(202.0, 1.0, "1e-4")) < 1e-12

    def test_linear_in_sensitivity(self):
        params = PrivacyParams(0.7, 3e-5)
        assert gaussian_sigma(2.0, params) == 2.0 * gaussian_sigma(1.0, params)
        assert gaussian_sigma(2 * 202.0, params) == 2.0 * gaussian_sigma(202.0, params)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameterError):
            gaussian_sigma(0.0, PrivacyParams(1.0, 1e-5))
        with pytest.raises(InvalidParameterError):
            gaussian_sigma(-1.0, PrivacyParams(1.0, 1e-5))
        with pytest.raises(InvalidParameterError):
            PrivacyParams(0.0, 1e-5)
        with pytest.raises(InvalidParameterError):
            PrivacyParams(1.0, 0.0)
        with pytest.raises(InvalidParameterError):
            PrivacyParams(1.0, 1.0)
        with pytest.raises(InvalidParameterError):
            PrivacyParams(math.inf, 1e-5)


class TestCostFresh:
    def test_matches_high_precision_oracle(self):
        got = epsilon_squared_cost_fresh(1.0, 1.0, 1e-4)
        assert rel_err(got, 18.866967846580785) < 1e-12
        assert rel_err(got, float(2 * mp.log(mp.mpf("1.25") / mp.mpf("1e-4")))) < 1e-12

    def test_infinite_noise_costs_nothing(self):
        assert epsilon_squared_cost_fresh(1.0, 1e12, 1e-4) < 1e-16

    def test_round_trips_through_sigma(self):
        cost = epsilon_squared_cost_fresh(3.0, 7.5, 1e-4)
        sigma = gaussian_sigma(3.0, PrivacyParams(math.sqrt(cost), 1e-4))
        assert rel_err(sigma, 7.5) < 1e-12

    @given(
        sensitivity=st.floats(1e-3, 1e3),
        sigma=st.floats(1e-3, 1e3),
        delta=st.floats(1e-6, 0.5),
    )
    @settings(max_examples=200)
    def test_calibration_inverse_property(self, sensitivity, sigma, delta):
        cost = epsilon_squared_cost_fresh(sensitivity, sigma, delta)
        back = gaussian_sigma(sensitivity, PrivacyParams(math.sqrt(cost), delta))
        assert rel_err(back, sigma) < 1e-12

    @given(
        sigmas=st.lists(
            st.floats(1e-3, 1e3), min_size=2, max_size=2, unique=True
        )
    )
    @settings(max_examples=200)
    def test_strictly_decreasing_in_sigma(self, sigmas):
        low, high = sorted(sigmas)
        assert epsilon_squared_cost_fresh(1.0, low, 1e-4) > epsilon_squared_cost_fresh(
            1.0, high, 1e-4
        )


class TestCostPartial:
    def test_matches_high_precision_oracle(self):
        got = epsilon_squared_cost_partial(1.0, 1.0, 2.0, 1e-4)
        assert rel_err(got, 14.150225884935589) < 1e-12
        oracle = float(2 * mp.log(mp.mpf("1.25") / mp.mpf("1e-4")) * mp.mpf("0.75"))
        assert rel_err(got, oracle) < 1e-12

    def test_vanishes_as_scales_meet(self):
        cost = epsilon_squared_cost_partial(1.0, 2.0 * (1 - 1e-12), 2.0, 1e-4)
        assert 0.0 <= cost < 1e-10

    def test_classified_case_is_a_precondition(self):
        with pytest.raises(CasePreconditionError):
            epsilon_squared_cost_partial(1.0, 2.0, 2.0, 1e-4)
        with pytest.raises(CasePreconditionError):
            epsilon_squared_cost_partial(1.0, 2.5, 2.0, 1e-4)

    def test_partial_plus_fresh_telescopes(self):
        partial = epsilon_squared_cost_partial(2.0, 1.0, 3.0, 1e-4)
        fresh_min = epsilon_squared_cost_fresh(2.0, 3.0, 1e-4)
        fresh_m = epsilon_squared_cost_fresh(2.0, 1.0, 1e-4)
        assert rel_err(partial + fresh_min, fresh_m) < 1e-12

    @given(
        sigmas=st.lists(st.floats(1e-2, 1e2), min_size=3, max_size=3, unique=True)
    )
    @settings(max_examples=200)
    def test_strictly_decreasing_toward_zero(self, sigmas):
        low, mid, high = sorted(sigmas)
        assert epsilon_squared_cost_partial(
            1.0, low, high, 1e-4
        ) > epsilon_squared_cost_partial(1.0, mid, high, 1e-4) > 0.0

    @given(
        sigmas=st.lists(st.floats(1e-2, 1e2), min_size=3, max_size=3, unique=True),
        sensitivity=st.floats(1e-2, 1e2),
    )
    @settings(max_examples=200)
    def test_telescoping_property(self, sigmas, sensitivity):
        a, b, c = sorted(sigmas)
        lhs = epsilon_squared_cost_partial(
            sensitivity, a, b, 1e-4
        ) + epsilon_squared_cost_partial(sensitivity, b, c, 1e-4)
        rhs = epsilon_squared_cost_partial(sensitivity, a, c, 1e-4)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1e-30)


class TestLossVarianceConversion:
    def test_zero_loss_is_zero_epsilon(self):
        assert epsilon_from_loss_variance(0.0, 1e-4) == 0.0

    def test_unit_variance_oracle(self):
        assert rel_err(epsilon_from_loss_variance(1.0, 1e-4), 4.34361230389877) < 1e-12

    def test_agrees_with_unit_sensitivity_cost(self):
        for sigma in (0.3, 1.0, 4.2):
            cost = epsilon_squared_cost_fresh(1.0, sigma, 1e-4)
            eps = epsilon_from_loss_variance(1.0 / sigma**2, 1e-4)
            assert rel_err(eps**2, cost) < 1e-12

    def test_rejects_negative_variance(self):
        with pytest.raises(InvalidParameterError):
            epsilon_from_loss_variance(-1e-9, 1e-4)


class TestUtilityAlpha:
    def test_near_two_sigma_at_five_percent(self):
        assert rel_err(utility_alpha(1.0, 0.05), 1.9599639845400545) < 1e-9

    def test_exactly_linear_in_sigma(self):
        assert utility_alpha(3.0, 0.05) == 3.0 * utility_alpha(1.0, 0.05)

    def test_one_sigma_rule(self):
        got = utility_alpha(1.0, 0.3173)
        assert rel_err(got, 1.0000217133229966) < 1e-9
        assert abs(got - 1.0) < 1e-4

    def test_rejects_bad_beta(self):
        for beta in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(InvalidParameterError):
                utility_alpha(1.0, beta)

    def test_erf_inverse_accuracy(self):
        for x in (-0.999, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9, 0.999):
            assert abs(erf_inverse(x) - float(mp.erfinv(x))) < 1e-10
        with pytest.raises(InvalidParameterError):
            erf_inverse(1.0)

    def test_coverage_monte_carlo(self):
        # Module contract: fraction inside +/- alpha(sigma, 0.05) is ~0.95.
        rng = np.random.default_rng(2024)
        sigma = 1.7
        draws = sigma * rng.standard_normal(100_000)
        alpha = utility_alpha(sigma, 0.05)
        fraction = np.mean(np.abs(draws) <= alpha)
        assert 0.944 <= fraction <= 0.956


class TestSampleGaussian:
    def test_zero_sigma_is_exact(self):
        rng = np.random.default_rng(0)
        assert sample_gaussian(5.0, 0.0, rng) == 5.0

    def test_rejects_negative_sigma(self):
        with pytest.raises(InvalidParameterError):
            sample_gaussian(0.0, -1.0, np.random.default_rng(0))

    def test_same_seed_same_stream(self):
        a = np.random.default_rng(42)
        b = np.random.default_rng(42)
        assert [sample_gaussian(0.0, 1.0, a) for _ in range(10)] == [
            sample_gaussian(0.0, 1.0, b) for _ in range(10)
        ]

    def test_empirical_mean(self):
        rng = np.random.default_rng(7)
        total = sum(sample_gaussian(0.0, 1.0, rng) for _ in range(100_000))
        assert abs(total / 100_000) < 0.02
