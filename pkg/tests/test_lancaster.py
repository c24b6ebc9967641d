import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lancaster_lab.lancaster import (
    BoundViolationError,
    build_model,
    build_sequence_linear,
    build_sequence_quadratic,
    model_from_config,
    model_to_config,
    sample_joint,
    transpose_model,
    validate_coefficients,
)
from lancaster_lab.orthopoly import MarginalSpec, build_system
from lancaster_lab.quadrature import integrate_2d

UNIFORM_SUPS = np.sqrt(2.0 * np.arange(1, 9) + 1)  # c_n = sqrt(2n+1) on [0, 1]


class TestValidateCoefficients:
    def test_zero_sequence_is_independence(self):
        seq = validate_coefficients((0.0, 0.0, 0.0), UNIFORM_SUPS, UNIFORM_SUPS)
        assert seq.bound_value == 0.0

    def test_headline_sequence_bound(self, ce_model):
        # 0.05 * 3 + 0.15 * 5 = 0.9 with c_n = d_n = sqrt(2n+1)
        assert ce_model.coeffs.bound_value == pytest.approx(0.9, abs=1e-9)

    def test_violating_sequence_reports_its_bound(self):
        with pytest.raises(BoundViolationError) as excinfo:
            validate_coefficients((0.1, 0.3), UNIFORM_SUPS, UNIFORM_SUPS)
        assert excinfo.value.bound_value == pytest.approx(1.8, abs=1e-9)

    def test_needs_enough_sup_norms(self):
        with pytest.raises(ValueError, match="sup-norm"):
            validate_coefficients((0.1, 0.1, 0.1), UNIFORM_SUPS[:2], UNIFORM_SUPS[:2])

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError):
            validate_coefficients((), UNIFORM_SUPS, UNIFORM_SUPS)


class TestSequenceBuilders:
    def test_quadratic_first_coefficient(self):
        seq = build_sequence_quadratic(UNIFORM_SUPS, UNIFORM_SUPS, 1)
        assert seq.rho[0] == pytest.approx(6.0 / (np.pi**2 * 3.0), rel=1e-9)

    def test_quadratic_second_coefficient(self):
        seq = build_sequence_quadratic(UNIFORM_SUPS, UNIFORM_SUPS, 2)
        assert seq.rho[1] == pytest.approx(6.0 / (np.pi**2 * 4.0 * 5.0), rel=1e-9)

    @pytest.mark.parametrize("count", [1, 2, 4, 8])
    def test_quadratic_bound_strictly_below_one(self, count):
        seq = build_sequence_quadratic(UNIFORM_SUPS, UNIFORM_SUPS, count)
        assert seq.bound_value < 1.0

    def test_linear_at_the_boundary(self):
        lam = 1.0 / (UNIFORM_SUPS[0] ** 2)
        seq = build_sequence_linear(UNIFORM_SUPS, UNIFORM_SUPS, 1, lam)
        assert seq.bound_value == pytest.approx(1.0, abs=1e-12)

    def test_linear_two_terms(self):
        # sum n c_n d_n = 1 * 3 + 2 * 5 = 13, so lambda = 1/13 saturates the bound
        seq = build_sequence_linear(UNIFORM_SUPS, UNIFORM_SUPS, 2, 1.0 / 13.0)
        np.testing.assert_allclose(seq.rho, (1.0 / 13.0, 2.0 / 13.0), rtol=1e-12)
        assert seq.bound_value == pytest.approx(1.0, abs=1e-9)

    def test_linear_rejects_zero_lambda(self):
        with pytest.raises(ValueError, match="positive"):
            build_sequence_linear(UNIFORM_SUPS, UNIFORM_SUPS, 2, 0.0)

    def test_linear_rejects_oversized_lambda_and_quotes_maximum(self):
        with pytest.raises(ValueError, match="lambda-too-large") as excinfo:
            build_sequence_linear(UNIFORM_SUPS, UNIFORM_SUPS, 2, 0.2)
        assert "0.0769230769" in str(excinfo.value)


class TestDensity:
    def test_independence_is_the_marginal_product(self, independence_model):
        m = independence_model
        xs = np.linspace(0.0, 1.0, 13)
        expected = np.outer(m.marginal_x.density(xs), m.marginal_y.density(xs))
        np.testing.assert_allclose(m.density(xs[:, None], xs[None, :]), expected, atol=1e-15)

    def test_zero_outside_the_support_rectangle(self, ce_model):
        assert ce_model.density(-0.1, 0.5) == 0.0
        assert ce_model.density(0.5, 1.2) == 0.0
        assert ce_model.density(2.0, -3.0) == 0.0

    def test_corner_value_closed_form(self, ce_model):
        # phi_1(0) = psi_1(0) = -sqrt(3), phi_2(0) = psi_2(0) = sqrt(5):
        # 1 + 0.05 * 3 + 0.15 * 5 = 1.9
        assert ce_model.density(0.0, 0.0) == pytest.approx(1.9, rel=1e-10)

    def test_nonnegative_on_fine_grid(self, ce_model):
        xs = np.linspace(0.0, 1.0, 256)
        assert np.min(ce_model.density(xs[:, None], xs[None, :])) >= 0.0

    def test_total_mass_one(self, ce_model):
        mass = integrate_2d(ce_model.density, ce_model.rule_x, ce_model.rule_y)
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_transpose_swaps_arguments(self, ce_model):
        swapped = transpose_model(ce_model)
        assert swapped.density(0.3, 0.8) == pytest.approx(ce_model.density(0.8, 0.3), rel=1e-14)

    def test_cross_moment_matrix_is_diagonal_with_the_coefficients(self, ce_model):
        # E[phi_m(X) psi_n(Y)] picks out rho_n exactly when m = n
        m = ce_model
        for deg_x in range(1, 3):
            for deg_y in range(1, 3):
                value = integrate_2d(
                    lambda x, y, a=deg_x, b=deg_y: m.density(x, y)
                    * m.system_x.evaluate(a, x)
                    * m.system_y.evaluate(b, y),
                    m.rule_x,
                    m.rule_y,
                )
                expected = m.rho[deg_y - 1] if deg_x == deg_y else 0.0
                assert value == pytest.approx(expected, abs=1e-9)


class TestConditionalDensity:
    def test_reduces_to_marginal_under_independence(self, independence_model):
        xs = np.linspace(0.0, 1.0, 17)
        np.testing.assert_allclose(
            independence_model.conditional_density_x_given_y(xs, 0.7),
            independence_model.marginal_x.density(xs),
            atol=1e-14,
        )

    def test_normalizes_for_fixed_conditioning_point(self, ce_model):
        values = ce_model.conditional_density_x_given_y(ce_model.rule_x.nodes, 0.3)
        assert float(ce_model.rule_x.weights @ values) == pytest.approx(1.0, abs=1e-9)

    def test_corner_value(self, ce_model):
        assert ce_model.conditional_density_x_given_y(0.0, 0.0) == pytest.approx(1.9, rel=1e-10)

    def test_rejects_conditioning_outside_the_support(self, ce_model, beta23):
        with pytest.raises(ValueError, match="unsupported-conditioning-point"):
            ce_model.conditional_density_x_given_y(0.5, 1.5)
        model = build_model(MarginalSpec("uniform", (0.0, 1.0)), beta23, (0.02,))
        # the beta(2, 3) density vanishes at its endpoints
        with pytest.raises(ValueError, match="unsupported-conditioning-point"):
            model.conditional_density_x_given_y(0.5, 0.0)


class TestMarginalResidual:
    def test_independence_recovers_marginals_exactly(self, independence_model):
        res_x, res_y = independence_model.marginal_residual()
        assert res_x <= 1e-10 and res_y <= 1e-10

    def test_validated_model_within_tolerance(self, ce_model):
        res_x, res_y = ce_model.marginal_residual()
        assert res_x < 1e-9 and res_y < 1e-9

    def test_corrupted_pairing_is_detected(self, ce_model):
        # pairing phi_1 with the constant psi_0 breaks the x-marginal: the
        # correction no longer integrates to zero over y
        m = ce_model

        def corrupted(x, y):
            factor = 1.0 + m.rho[0] * m.system_x.evaluate(1, np.asarray(x, dtype=float))
            return m.marginal_x.density(x) * m.marginal_y.density(y) * factor

        res_x, res_y = m.marginal_residual(joint_density=corrupted)
        assert max(res_x, res_y) > 1e-3


class TestSampling:
    def test_same_seed_reproduces_samples(self, ce_model):
        first = sample_joint(ce_model, 3000, seed=42)
        second = sample_joint(ce_model, 3000, seed=42)
        assert np.array_equal(first, second)

    def test_different_seeds_differ(self, ce_model):
        a = sample_joint(ce_model, 1000, seed=1)
        b = sample_joint(ce_model, 1000, seed=2)
        assert not np.array_equal(a, b)

    def test_samples_live_in_the_support(self, ce_model):
        samples = sample_joint(ce_model, 5000, seed=3)
        assert np.all((samples >= 0.0) & (samples <= 1.0))

    def test_independence_accepts_every_proposal(self, independence_model):
        _, stats = sample_joint(independence_model, 2000, seed=5, with_stats=True)
        assert stats.acceptance_rate == 1.0

    def test_acceptance_rate_matches_envelope(self, ce_model):
        _, stats = sample_joint(ce_model, 50_000, seed=11, with_stats=True)
        assert stats.acceptance_rate == pytest.approx(1.0 / 1.9, abs=0.01)

    def test_cross_moment_matches_coefficient(self, ce_model):
        samples = sample_joint(ce_model, 50_000, seed=17)
        values = ce_model.system_x.evaluate(1, samples[:, 0]) * ce_model.system_y.evaluate(
            1, samples[:, 1]
        )
        stderr = np.std(values) / np.sqrt(values.size)
        assert abs(np.mean(values) - 0.05) <= 4.0 * stderr

    def test_rejects_nonpositive_count(self, ce_model):
        with pytest.raises(ValueError):
            sample_joint(ce_model, 0, seed=1)


class TestModelConfig:
    def test_round_trip_is_field_for_field_identical(self, ce_model):
        reloaded = model_from_config(model_to_config(ce_model))
        assert reloaded.marginal_x == ce_model.marginal_x
        assert reloaded.marginal_y == ce_model.marginal_y
        assert reloaded.coeffs.rho == ce_model.coeffs.rho
        assert reloaded.coeffs.bound_value == ce_model.coeffs.bound_value
        for name in ("recurrence_alpha", "recurrence_beta", "leading", "sup_norms"):
            assert np.array_equal(
                getattr(reloaded.system_x, name), getattr(ce_model.system_x, name)
            )
        assert np.array_equal(reloaded.rule_x.nodes, ce_model.rule_x.nodes)

    def test_builder_configs(self, uniform01):
        cfg = {
            "marginal_x": {"kind": "uniform", "support": [0, 1]},
            "marginal_y": {"kind": "uniform", "support": [0, 1]},
            "rho_builder": {"type": "linear", "N": 2, "lambda": 1.0 / 13.0},
        }
        model = model_from_config(cfg)
        np.testing.assert_allclose(model.coeffs.rho, (1.0 / 13.0, 2.0 / 13.0), rtol=1e-12)
        cfg["rho_builder"] = {"type": "quadratic", "N": 3}
        model = model_from_config(cfg)
        assert model.coeffs.bound_value < 1.0

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda cfg: cfg.pop("marginal_x"),
            lambda cfg: cfg.update(rho_builder={"type": "linear", "N": 2, "lambda": 0.01}),
            lambda cfg: cfg.update(rho=[]),
            lambda cfg: cfg["marginal_x"].update(kind="cauchy"),
            lambda cfg: cfg.update(max_degree=1),
        ],
    )
    def test_bad_configs_rejected(self, ce_model, mutate):
        cfg = model_to_config(ce_model)
        mutate(cfg)
        with pytest.raises(ValueError):
            model_from_config(cfg)

    def test_beta_and_table_marginals_round_trip(self, beta23, triangle_table):
        model = build_model(beta23, triangle_table, (0.005,))
        reloaded = model_from_config(model_to_config(model))
        assert reloaded.marginal_x == model.marginal_x
        assert reloaded.marginal_y == model.marginal_y


class TestBuildModelValidation:
    def test_max_degree_must_cover_the_sequence(self, uniform01):
        with pytest.raises(ValueError, match="max_degree"):
            build_model(uniform01, uniform01, (0.01,) * 9, max_degree=8)

    def test_bound_violation_propagates(self, uniform01):
        with pytest.raises(BoundViolationError):
            build_model(uniform01, uniform01, (0.5, 0.5))


@given(
    raw=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=6).filter(
        lambda v: any(abs(x) > 1e-3 for x in v)
    ),
    target=st.floats(0.05, 0.999),
)
@settings(max_examples=40)
def test_scaled_sequences_validate_exactly_when_below_the_bound(raw, target):
    raw = np.asarray(raw)
    c = d = UNIFORM_SUPS[: raw.size]
    mass = float(np.sum(np.abs(raw) * c * d))
    admissible = raw * (target / mass)
    seq = validate_coefficients(admissible, c, d)
    assert seq.bound_value == pytest.approx(target, rel=1e-12)
    with pytest.raises(BoundViolationError):
        validate_coefficients(raw * (1.5 / mass), c, d)
