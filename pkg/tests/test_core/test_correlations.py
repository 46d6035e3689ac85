"""Tests for two-time record statistics."""

import math

import numpy as np
import pytest

from relational_time.core.clock import commensurate_frequency
from relational_time.core.correlations import (
    analytic_joint,
    bayes_conditional,
    extract_joint,
    extract_marginal,
    record_distribution,
    transition_probabilities,
    two_time_correlation,
)
from relational_time.core.history import (
    clock_distribution,
    double_measurement_history,
    free_history,
    single_measurement_history,
)
from relational_time.core.system import evolution
from relational_time.models.domain_models import ClockRegister, JointDistribution
from relational_time.utils.exceptions import MeasurementLayoutError


@pytest.fixture
def clock128() -> ClockRegister:
    return ClockRegister(n=128, dt=1.0)


@pytest.mark.unit
class TestJointExtraction:
    def test_matches_closed_form_over_commensurate_phases(self, clock128, psi0):
        omega = commensurate_frequency(clock128, 1)
        worst = 0.0
        for gap in range(1, 65):
            history = double_measurement_history(clock128, psi0, omega, 1, 1 + gap)
            joint = extract_joint(history)
            expected = analytic_joint(history.gap_phase)
            worst = max(worst, float(np.max(np.abs(joint.matrix - expected.matrix))))
        assert worst <= 1e-10

    def test_phase_is_gap_phase(self, clock128, psi0):
        omega = commensurate_frequency(clock128, 2)
        joint = extract_joint(double_measurement_history(clock128, psi0, omega, 5, 9))
        assert joint.phase == pytest.approx(omega * 4)

    def test_conditional_matches_transition_probabilities(self, clock128, psi_h):
        basis_a = evolution(0.35)
        basis_b = evolution(-0.8)
        omega = commensurate_frequency(clock128, 3)
        history = double_measurement_history(clock128, psi_h, omega, 7, 19, basis_a, basis_b)
        conditional = bayes_conditional(extract_joint(history))
        expected = transition_probabilities(history.gap_phase, basis_a, basis_b)
        for a in range(2):
            for b in range(2):
                assert conditional.value(a, b) == pytest.approx(expected[a, b], abs=1e-10)

    def test_needs_two_measurements(self, clock128, psi0):
        with pytest.raises(MeasurementLayoutError):
            extract_joint(single_measurement_history(clock128, psi0, 0.1, 4))

    def test_marginal_sums_joint(self, clock128, psi_h):
        history = double_measurement_history(clock128, psi_h, 0.05, 10, 30)
        joint = extract_joint(history)
        np.testing.assert_allclose(extract_marginal(history), joint.marginal_a(), atol=1e-12)

    def test_marginal_of_single_measurement(self, clock128, psi_h):
        omega = 0.05
        history = single_measurement_history(clock128, psi_h, omega, 10)
        expected = np.abs(evolution(omega * 10).entries @ psi_h.amplitudes) ** 2
        np.testing.assert_allclose(extract_marginal(history), expected, atol=1e-12)

    def test_records_absent_before_first_measurement(self, clock128, psi0):
        history = double_measurement_history(clock128, psi0, 0.05, 10, 30)
        levels = record_distribution(history, 3)
        assert levels[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_clock_stays_uniform_with_records(self, clock128, psi_h):
        history = double_measurement_history(clock128, psi_h, 0.05, 10, 30)
        np.testing.assert_allclose(clock_distribution(history), 1 / 128, atol=1e-12)


@pytest.mark.unit
class TestAnalyticForms:
    def test_phase_zero(self):
        joint = analytic_joint(0.0)
        assert joint.p == [[0.5, 0.0], [0.0, 0.5]]
        assert two_time_correlation(joint) == 1.0

    def test_quarter_phase(self):
        joint = analytic_joint(math.pi / 4)
        np.testing.assert_allclose(joint.matrix, 0.25)
        assert two_time_correlation(joint) == pytest.approx(0.0, abs=1e-15)

    def test_third_phase(self):
        np.testing.assert_allclose(
            analytic_joint(math.pi / 3).matrix, [[0.125, 0.375], [0.375, 0.125]], atol=1e-15
        )

    @pytest.mark.parametrize("phase", [0.0, 0.3, 1.0, math.pi / 2, 2.5])
    def test_correlation_is_cos_two_phase(self, phase):
        assert two_time_correlation(analytic_joint(phase)) == pytest.approx(math.cos(2 * phase))

    def test_transition_probabilities_default_bases(self):
        same, diff = math.cos(0.4) ** 2, math.sin(0.4) ** 2
        expected = [[same, diff], [diff, same]]
        np.testing.assert_allclose(transition_probabilities(0.4), expected, atol=1e-15)


@pytest.mark.unit
class TestBayesConditional:
    def test_rows_normalized(self):
        conditional = bayes_conditional(analytic_joint(0.6))
        assert conditional.defined_mask == [True, True]
        assert conditional.value(0, 0) == pytest.approx(math.cos(0.6) ** 2)

    def test_zero_marginal_row_flagged(self):
        conditional = bayes_conditional(JointDistribution(p=[[0.3, 0.7], [0.0, 0.0]]))
        assert conditional.defined_mask == [True, False]
        assert conditional.value(1, 0) is None
        assert conditional.value(0, 1) == pytest.approx(0.7)


@pytest.mark.unit
class TestJointDistributionModel:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            JointDistribution(p=[[0.5, 0.5], [0.5, 0.5]])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            JointDistribution(p=[[1.1, -0.1], [0.0, 0.0]])

    def test_clips_rounding_negatives(self):
        joint = JointDistribution(p=[[0.5, -1e-17], [0.0, 0.5]])
        assert joint.p[0][1] == 0.0

    def test_free_history_has_no_joint(self, clock128, psi0):
        with pytest.raises(MeasurementLayoutError):
            extract_joint(free_history(clock128, psi0, 0.1))
