import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsteer.errors import DimTooSmall, OutOfSupportedOrder
from noonsteer.fock import (
    SUPPORTED_WAVEFUNCTION_ORDER,
    WavefunctionConvention,
    commutator_check,
    embed,
    hermite,
    momentum_wavefunction,
    noon_state,
    operator_matrix,
    position_wavefunction,
    wavefunction_stack,
)


def hermite_exact(n, y):
    """Independent oracle: the recurrence in exact rational arithmetic."""
    h_prev, h = Fraction(0), Fraction(1)
    for k in range(n):
        h_prev, h = h, 2 * y * h - 2 * k * h_prev
    return h


class TestHermite:
    def test_h0_is_one(self):
        assert hermite(0, 3.7) == 1.0

    def test_h1(self):
        assert hermite(1, 1.5) == 3.0

    def test_h4_against_recurrence_oracle(self):
        assert hermite(4, 1.0) == pytest.approx(float(hermite_exact(4, Fraction(1))), abs=0)

    def test_vectorized(self):
        ys = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(hermite(2, ys), 4 * ys**2 - 2)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            hermite(-1, 0.0)

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(min_value=0, max_value=6),
        num=st.integers(min_value=-64, max_value=64),
        den=st.sampled_from([1, 2, 4, 8, 16]),
    )
    def test_recurrence_exact_at_dyadic_rationals(self, n, num, den):
        # dyadic y keeps every intermediate exactly representable in float64
        y = Fraction(num, den)
        assert hermite(n, float(y)) == float(hermite_exact(n, y))


class TestWavefunctions:
    def test_ground_state_at_origin(self):
        assert position_wavefunction(0, 0.0) == pytest.approx((2 * math.pi) ** -0.25, abs=1e-12)
        assert position_wavefunction(0, 0.0) == pytest.approx(0.631619, abs=1e-6)

    def test_odd_parity_vanishes_at_origin(self):
        assert position_wavefunction(1, 0.0) == 0.0

    def test_normalization(self):
        xs = np.linspace(-12, 12, 200_001)
        norm = np.trapezoid(position_wavefunction(3, xs) ** 2, xs)
        assert norm == pytest.approx(1.0, abs=1e-8)

    def test_orthonormality_up_to_ten(self):
        xs = np.linspace(-12, 12, 120_001)
        psi = wavefunction_stack(10, xs)
        gram = np.trapezoid(psi[:, None, :] * psi[None, :, :], xs, axis=-1)
        np.testing.assert_allclose(gram, np.eye(11), atol=1e-8)

    def test_out_of_supported_order(self):
        with pytest.raises(OutOfSupportedOrder):
            position_wavefunction(SUPPORTED_WAVEFUNCTION_ORDER + 1, 0.0)

    def test_momentum_phase(self):
        value = momentum_wavefunction(0, 0.0)
        assert value == pytest.approx(0.631619 + 0j, abs=1e-6)
        ratio = momentum_wavefunction(2, 1.0) / position_wavefunction(2, 1.0)
        assert ratio == pytest.approx(-1.0 + 0j, abs=1e-12)

    def test_momentum_unitarity(self):
        ps = np.linspace(-12, 12, 200_001)
        norm = np.trapezoid(np.abs(momentum_wavefunction(2, ps)) ** 2, ps)
        assert norm == pytest.approx(1.0, abs=1e-8)

    def test_convention_is_pinned(self):
        with pytest.raises(ValueError):
            WavefunctionConvention(position_scale=1.0)
        with pytest.raises(ValueError):
            WavefunctionConvention(momentum_phase=1j)


class TestNoonState:
    def test_amplitudes_n1(self):
        ket = noon_state(1, 0.0, dim=4)
        assert ket.amplitudes[1, 0] == pytest.approx(0.70711, abs=1e-5)
        assert ket.amplitudes[0, 1] == pytest.approx(0.70711, abs=1e-5)

    def test_phase_n2(self):
        ket = noon_state(2, math.pi / 2, dim=5)
        assert ket.amplitudes[0, 2] == pytest.approx(0.70711j, abs=1e-5)

    def test_dim_too_small(self):
        with pytest.raises(DimTooSmall):
            noon_state(3, 0.0, dim=3)

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=5),
        phi=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_norm_and_embedding_invariance(self, n, phi):
        ket = noon_state(n, phi)
        assert ket.norm() == pytest.approx(1.0, abs=1e-12)
        bigger = embed(ket, ket.dim + 5)
        np.testing.assert_array_equal(bigger.amplitudes[: ket.dim, : ket.dim], ket.amplitudes)
        assert np.all(bigger.amplitudes[ket.dim :, :] == 0)


class TestOperators:
    @settings(max_examples=20, deadline=None)
    @given(dim=st.integers(min_value=3, max_value=20))
    def test_annihilation_elements(self, dim):
        a = operator_matrix("annihilate", dim).matrix
        for n in range(1, dim):
            assert a[n - 1, n] == pytest.approx(math.sqrt(n), abs=1e-14)
        assert np.count_nonzero(a) == dim - 1

    def test_x_entry(self):
        assert operator_matrix("x", 6).matrix[0, 1] == pytest.approx(1.0)

    def test_number_diagonal(self):
        num = operator_matrix("number", 7).matrix
        np.testing.assert_allclose(num, np.diag(np.arange(7, dtype=float)), atol=1e-12)

    def test_hermiticity(self):
        for kind in ("number", "x", "p"):
            mat = operator_matrix(kind, 12).matrix
            assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
        mat = operator_matrix("x_theta", 12, theta=0.37).matrix
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-12

    def test_x_theta_combination(self):
        dim = 10
        x = operator_matrix("x", dim).matrix
        p = operator_matrix("p", dim).matrix
        for theta in (0.0, math.pi / 4, 1.1, math.pi / 2):
            combo = math.cos(theta) * x + math.sin(theta) * p
            built = operator_matrix("x_theta", dim, theta=theta).matrix
            assert np.max(np.abs(built - combo)) < 1e-12

    def test_x_pi4_matches_sum_form(self):
        dim = 9
        x = operator_matrix("x", dim).matrix
        p = operator_matrix("p", dim).matrix
        built = operator_matrix("x_theta", dim, theta=math.pi / 4).matrix
        assert np.max(np.abs(built - (x + p) / math.sqrt(2))) < 1e-12

    def test_canonical_commutator_on_block(self):
        dim = 25
        x = operator_matrix("x", dim).matrix
        p = operator_matrix("p", dim).matrix
        comm = x @ p - p @ x
        block = comm[: dim - 1, : dim - 1]
        assert np.max(np.abs(block - 2j * np.eye(dim - 1))) < 1e-10

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            operator_matrix("squeeze", 5)

    def test_x_theta_requires_angle(self):
        with pytest.raises(ValueError):
            operator_matrix("x_theta", 5)


class TestCommutatorCheck:
    @pytest.mark.parametrize("n_power", [1, 2, 3])
    def test_reduction_holds(self, n_power):
        assert commutator_check(n_power, 40) < 1e-10

    def test_n2_against_ladder_form(self):
        # [n, P^2] should equal -2(a_dag^2 - a^2) on the safe block
        dim = 30
        num = operator_matrix("number", dim).matrix
        p = operator_matrix("p", dim).matrix
        a = operator_matrix("annihilate", dim).matrix
        adag = operator_matrix("create", dim).matrix
        lhs = num @ p @ p - p @ p @ num
        rhs = -2.0 * (adag @ adag - a @ a)
        keep = dim - 2
        assert np.max(np.abs(lhs[:keep, :keep] - rhs[:keep, :keep])) < 1e-10

    def test_headroom_requirement(self):
        with pytest.raises(ValueError):
            commutator_check(3, 12)
