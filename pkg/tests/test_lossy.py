import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsteer.errors import DimTooSmall, InvalidOutcome, ZeroProbabilityConditioning
from noonsteer.fock import noon_state, operator_matrix, position_wavefunction
from noonsteer.lossy import (
    LOSSLESS,
    LossChannel,
    conditional_density_given_x,
    conditional_number_b,
    conditioned_b_blocks,
    lossy_noon_density,
    number_joint,
    number_marginal_a,
    partial_trace_a,
    partial_trace_b,
    position_probability,
    pure_density,
)

etas = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestLossChannel:
    @settings(max_examples=30, deadline=None)
    @given(ea=etas, eb=etas)
    def test_valid_range_accepted(self, ea, eb):
        ch = LossChannel(ea, eb)
        assert ch.lossless == (ea == 1.0 and eb == 1.0)

    @pytest.mark.parametrize("bad", [-0.1, 1.1, math.inf])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError):
            LossChannel(bad, 0.5)


class TestLossyDensity:
    def test_lossless_limit_is_projector(self):
        rho = lossy_noon_density(2, 0.7, LOSSLESS, dim=8)
        expected = pure_density(noon_state(2, 0.7, dim=8))
        np.testing.assert_array_equal(rho.matrix, expected.matrix)

    def test_n1_half_loss_coefficients(self):
        rho = lossy_noon_density(1, 0.0, LossChannel(0.5, 1.0), dim=4)
        t = rho.as_tensor()
        assert t[1, 0, 1, 0].real == pytest.approx(0.25, abs=1e-15)
        assert t[0, 0, 0, 0].real == pytest.approx(0.25, abs=1e-15)
        assert abs(t[1, 0, 0, 1]) == pytest.approx(math.sqrt(0.5) / 2, abs=1e-12)

    def test_trace_one(self):
        rho = lossy_noon_density(3, 0.0, LossChannel(0.7, 0.9))
        assert abs(np.trace(rho.matrix) - 1.0) < 1e-10

    def test_dim_too_small(self):
        with pytest.raises(DimTooSmall):
            lossy_noon_density(2, 0.0, LossChannel(0.5, 0.5), dim=2)

    @pytest.mark.parametrize("eta_a", [0.0, 0.3, 0.7, 1.0])
    @pytest.mark.parametrize("eta_b", [0.0, 0.3, 0.7, 1.0])
    @pytest.mark.parametrize("n_quanta", [1, 2, 3, 4])
    def test_positive_semidefinite_grid(self, n_quanta, eta_a, eta_b):
        rho = lossy_noon_density(n_quanta, 0.4, LossChannel(eta_a, eta_b), dim=n_quanta + 2)
        assert rho.min_eigenvalue() >= -1e-10

    def test_partial_trace_matches_number_marginal(self):
        channel = LossChannel(0.6, 0.85)
        rho = lossy_noon_density(3, 0.3, channel, dim=6)
        reduced = partial_trace_b(rho)
        marginal = number_marginal_a(3, channel)
        np.testing.assert_allclose(np.diag(reduced.matrix).real[:4], marginal, atol=1e-12)

    def test_partial_trace_b_side(self):
        channel = LossChannel(0.6, 0.85)
        rho = lossy_noon_density(2, 0.0, channel, dim=5)
        reduced = partial_trace_a(rho)
        joint = number_joint(rho)
        np.testing.assert_allclose(np.diag(reduced.matrix).real, joint.sum(axis=0), atol=1e-13)


class TestPositionProbability:
    @pytest.mark.parametrize("n_quanta", [1, 2, 3, 4, 5])
    def test_normalized(self, n_quanta):
        xs = np.linspace(-12, 12, 100_001)
        dens = position_probability(n_quanta, LossChannel(0.8, 0.6), xs)
        assert np.trapezoid(dens, xs) == pytest.approx(1.0, abs=1e-8)

    def test_lossless_closed_form(self):
        xs = np.linspace(-6, 6, 101)
        dens = position_probability(2, LOSSLESS, xs)
        expected = 0.5 * (position_wavefunction(0, xs) ** 2 + position_wavefunction(2, xs) ** 2)
        np.testing.assert_allclose(dens, expected, atol=1e-14)


class TestConditionalDensity:
    def test_trace_one_sampled(self):
        for n_quanta in (1, 2, 3):
            for x in (-3.0, 0.0, 2.0):
                for channel in (LOSSLESS, LossChannel(0.8, 0.8)):
                    rho = conditional_density_given_x(n_quanta, 0.5, channel, x)
                    assert abs(np.trace(rho.matrix) - 1.0) < 1e-10

    def test_no_coherence_at_origin_n1(self):
        rho = conditional_density_given_x(1, 0.0, LOSSLESS, 0.0)
        assert abs(rho.matrix[0, 1]) == 0.0

    def test_conditional_x2_moment(self):
        rho = conditional_density_given_x(2, math.pi / 2, LOSSLESS, 1.0)
        x_sq = np.linalg.matrix_power(operator_matrix("x", rho.dim).matrix, 2)
        moment = float(np.trace(rho.matrix @ x_sq).real)
        assert moment == pytest.approx(1.0 + 8.0 / (3.0 - 2.0 + 1.0), abs=1e-10)  # = 5

    def test_matches_generic_conditioning(self):
        # closed form against numerically projecting the full two-mode density
        channel = LossChannel(0.75, 0.9)
        phi = 0.8
        full = lossy_noon_density(2, phi, channel, dim=6)
        for x in (-1.3, 0.4, 2.2):
            direct = conditional_density_given_x(2, phi, channel, x, dim=6)
            blocks, px = conditioned_b_blocks(full, np.array([x]))
            np.testing.assert_allclose(direct.matrix, blocks[0] / px[0], atol=1e-12)

    def test_lossless_matches_pure_state_reduction(self):
        phi = 1.1
        for x in (-0.9, 0.7):
            rho = conditional_density_given_x(3, phi, LOSSLESS, x, dim=5)
            vec = np.zeros(5, dtype=complex)
            vec[0] = position_wavefunction(3, x)
            vec[3] = np.exp(1j * phi) * position_wavefunction(0, x)
            vec /= np.linalg.norm(vec)
            np.testing.assert_allclose(rho.matrix, np.outer(vec, vec.conj()), atol=1e-12)

    def test_zero_probability_conditioning(self):
        with pytest.raises(ZeroProbabilityConditioning):
            conditional_density_given_x(1, 0.0, LOSSLESS, 60.0)


class TestNumberTables:
    def test_lossless_marginal(self):
        marginal = number_marginal_a(3, LOSSLESS)
        assert marginal[3] == pytest.approx(0.5)
        assert marginal[0] == pytest.approx(0.5)
        assert marginal[1] == marginal[2] == 0.0

    def test_half_loss_marginal(self):
        marginal = number_marginal_a(1, LossChannel(0.5, 1.0))
        assert marginal[1] == pytest.approx(0.25)
        assert marginal[0] == pytest.approx(0.75)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(min_value=1, max_value=6), ea=etas, eb=etas)
    def test_marginal_sums_to_one(self, n, ea, eb):
        assert number_marginal_a(n, LossChannel(ea, eb)).sum() == pytest.approx(1.0, abs=1e-12)

    def test_conditional_lossless(self):
        zero_given = conditional_number_b(2, LOSSLESS, 0)
        np.testing.assert_allclose(zero_given, [0.0, 0.0, 1.0], atol=1e-15)
        top_given = conditional_number_b(2, LOSSLESS, 2)
        np.testing.assert_allclose(top_given, [1.0, 0.0, 0.0], atol=1e-15)

    def test_conditional_mean_half_loss(self):
        table = conditional_number_b(1, LossChannel(0.5, 0.5), 0)
        mean = float(np.dot(np.arange(2), table))
        assert mean == pytest.approx(0.25 / 0.75, abs=1e-12)

    def test_invalid_outcome(self):
        with pytest.raises(InvalidOutcome):
            conditional_number_b(2, LOSSLESS, 3)
