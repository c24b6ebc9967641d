import numpy as np
import pytest

from lancaster_lab.lancaster import build_model
from lancaster_lab.orthopoly import MarginalSpec
from lancaster_lab.quadrature import gauss_legendre_rule, integrate
from lancaster_lab.regression import (
    _checked_lstsq,
    check_eigen_regression,
    check_linear_regression,
    check_polynomial_regression,
    conditional_expectation,
    counterexample_report,
)


def quadrature_conditional_mean(model, h, y, nodes=512):
    """Independent route: integrate h against the conditional density directly."""
    lo, hi = model.marginal_x.support
    rule = gauss_legendre_rule(nodes, lo, hi)
    return integrate(lambda x: h(x) * model.conditional_density_x_given_y(x, y), rule)


class TestConditionalExpectation:
    def test_constant_integrates_to_one(self, ce_model):
        for y in (0.1, 0.4, 0.9):
            value = conditional_expectation(ce_model, lambda x: np.ones_like(x), y)
            assert value == pytest.approx(1.0, abs=1e-10)

    def test_eigenfunction_value(self, ce_model):
        value = conditional_expectation(
            ce_model, lambda x: ce_model.system_x.evaluate(1, x), 0.3
        )
        expected = 0.05 * ce_model.system_y.evaluate(1, 0.3)
        assert value == pytest.approx(expected, abs=1e-9)

    def test_degree_beyond_truncation_vanishes(self, ce_model):
        value = conditional_expectation(
            ce_model, lambda x: ce_model.system_x.evaluate(3, x), 0.3
        )
        assert value == pytest.approx(0.0, abs=1e-9)

    def test_agrees_with_direct_quadrature(self, ce_model):
        h = lambda x: x**3 - 0.2 * x
        for y in (0.25, 0.7):
            fast = conditional_expectation(ce_model, h, y)
            slow = quadrature_conditional_mean(ce_model, h, y)
            assert fast == pytest.approx(slow, abs=1e-12)

    def test_rejects_unsupported_conditioning_point(self, ce_model):
        with pytest.raises(ValueError, match="unsupported-conditioning-point"):
            conditional_expectation(ce_model, lambda x: x, 1.7)


class TestEigenRegression:
    def test_independence_residual_tiny(self, independence_model):
        for_x, for_y = check_eigen_regression(independence_model, 1)
        assert for_x.max_residual <= 1e-9
        assert for_y.max_residual <= 1e-9
        assert for_x.target_leading == 0.0

    @pytest.mark.parametrize("n", [1, 2])
    def test_headline_model_identity(self, ce_model, n):
        for result in check_eigen_regression(ce_model, n):
            assert result.max_residual <= 1e-8

    def test_directions_are_labeled(self, ce_model):
        for_x, for_y = check_eigen_regression(ce_model, 1)
        assert for_x.direction == "x_given_y"
        assert for_y.direction == "y_given_x"

    def test_degree_out_of_range(self, ce_model):
        with pytest.raises(ValueError, match="degree-out-of-range"):
            check_eigen_regression(ce_model, 9)


class TestPolynomialRegression:
    def test_affine_case_slope_and_intercept(self, ce_model):
        # identical marginals make p_1 = q_1, so the slope is rho_1 itself and
        # taking means gives the intercept (1 - rho_1) / 2
        result, _ = check_polynomial_regression(ce_model, 1)
        intercept, slope = result.fitted_coeffs
        assert slope == pytest.approx(0.05, rel=1e-9)
        assert intercept == pytest.approx((1.0 - 0.05) / 2.0, rel=1e-9)

    def test_independence_has_constant_fit(self, independence_model):
        for n in (1, 2, 3):
            result, _ = check_polynomial_regression(independence_model, n)
            assert result.fitted_leading == pytest.approx(0.0, abs=1e-10)
            moment = conditional_expectation(independence_model, lambda x: x**n, 0.5)
            assert result.fitted_coeffs[0] == pytest.approx(moment, rel=1e-9)

    def test_degree_two_leading_coefficient(self, ce_model):
        result, _ = check_polynomial_regression(ce_model, 2)
        assert result.target_leading == pytest.approx(0.15, rel=1e-12)
        assert result.fitted_leading == pytest.approx(0.15, rel=1e-7)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_leading_coefficients_both_directions(self, ce_model, n):
        for result in check_polynomial_regression(ce_model, n):
            assert result.max_residual <= 1e-8
            scale = max(abs(result.target_leading), 1.0)
            assert abs(result.fitted_leading - result.target_leading) <= 1e-7 * scale

    def test_asymmetric_marginals_flip_the_ratio(self, uniform01, beta23):
        model = build_model(uniform01, beta23, (0.02, 0.04))
        given_y, given_x = check_polynomial_regression(model, 2)
        ratio = model.system_y.leading[2] / model.system_x.leading[2]
        assert given_y.target_leading == pytest.approx(0.04 * ratio, rel=1e-12)
        assert given_x.target_leading == pytest.approx(0.04 / ratio, rel=1e-12)
        for result in (given_y, given_x):
            assert abs(result.fitted_leading - result.target_leading) <= 1e-7 * max(
                abs(result.target_leading), 1.0
            )

    def test_ill_conditioned_fit_raises(self):
        rng = np.random.default_rng(0)
        column = rng.normal(size=40)
        design = np.column_stack([column, column * (1.0 + 1e-14)])
        with pytest.raises(ValueError, match="ill-conditioned-fit"):
            _checked_lstsq(design, rng.normal(size=40))


class TestLinearRegression:
    def test_headline_model_slopes(self, ce_model):
        result = check_linear_regression(ce_model)
        assert result.a1 == pytest.approx(0.05, abs=1e-8)
        assert result.b1 == pytest.approx(0.05, abs=1e-8)
        assert result.a0 == pytest.approx(0.475, abs=1e-8)
        assert result.residual <= 1e-8
        assert result.strict

    def test_independence_is_constant_regression(self, independence_model):
        result = check_linear_regression(independence_model)
        assert result.a1 == pytest.approx(0.0, abs=1e-10)
        assert result.b1 == pytest.approx(0.0, abs=1e-10)
        assert not result.strict

    def test_trivial_regression_with_positive_maxcorr(self, trivial_regression_model):
        result = check_linear_regression(trivial_regression_model)
        assert result.a1 == pytest.approx(0.0, abs=1e-8)
        assert result.b1 == pytest.approx(0.0, abs=1e-8)
        assert not result.strict

    def test_slope_consistency_with_pearson(self, ce_model):
        # a1 = rho_1 q_1 / p_1 and the grid Pearson value is rho_1
        result = check_linear_regression(ce_model)
        expected = 0.05 * ce_model.system_y.leading[1] / ce_model.system_x.leading[1]
        assert result.a1 == pytest.approx(expected, abs=1e-8)


class TestCounterexampleReport:
    def test_headline_model_confirms(self, ce_model):
        report = counterexample_report(ce_model)
        assert report.gap == pytest.approx(0.10, abs=2e-3)
        assert report.strict_linear
        assert report.counterexample_confirmed
        assert not report.degenerate_comparison
        assert report.correlation.pearson == pytest.approx(0.05, abs=1e-6)
        assert report.bound_value == pytest.approx(0.9, abs=1e-9)

    def test_maximum_at_degree_one_closes_the_gap(self, swapped_model):
        report = counterexample_report(swapped_model)
        assert abs(report.gap) <= 2e-3
        assert not report.counterexample_confirmed
        assert report.strict_linear

    def test_trivial_regression_case(self, trivial_regression_model):
        report = counterexample_report(trivial_regression_model)
        assert not report.strict_linear
        assert not report.counterexample_confirmed
        assert report.correlation.maxcorr_svd == pytest.approx(0.15, abs=1e-3)
        assert report.correlation.pearson == pytest.approx(0.0, abs=1e-6)

    def test_independence_is_flagged_degenerate(self, independence_model):
        report = counterexample_report(independence_model)
        assert report.degenerate_comparison
        assert abs(report.gap) <= 2e-3

    def test_gap_characterization(self, uniform01):
        # the gap opens exactly when the coefficient maximum moves past degree 1
        opening = counterexample_report(build_model(uniform01, uniform01, (0.02, 0.1)))
        assert opening.gap > 5e-3
        closed = counterexample_report(build_model(uniform01, uniform01, (0.1, 0.02)))
        assert closed.gap < 2e-3

    def test_degree_checks_cover_the_sequence(self, ce_model):
        report = counterexample_report(ce_model)
        assert tuple(c.degree for c in report.degree_checks) == (1, 2)
        for checks in report.degree_checks:
            assert checks.eigen_x_given_y.max_residual <= 1e-8
            assert checks.poly_y_given_x.max_residual <= 1e-8
