import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbw_gyro.optics import (
    IDENTITY,
    apply,
    bs_matrix,
    cbw_order_matrix,
    field_pair,
    is_unitary,
    mzi_block,
    phase_matrix,
    rotation,
    round_trip_matrix,
)

phases = st.floats(-50, 50, allow_nan=False)
s2 = 1 / math.sqrt(2)


def assert_mat(actual, expected, atol=1e-12):
    np.testing.assert_allclose(actual, np.asarray(expected, dtype=complex), rtol=0, atol=atol)


class TestBeamSplitter:
    def test_balanced(self):
        assert_mat(bs_matrix(0.5), s2 * np.array([[1, 1j], [1j, 1]]))

    def test_transparent(self):
        assert_mat(bs_matrix(0), IDENTITY)

    def test_full_reflector(self):
        assert_mat(bs_matrix(1), [[0, 1j], [1j, 0]])

    @pytest.mark.parametrize("bad", [-0.1, 1.0001, float("nan"), float("inf")])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            bs_matrix(bad)


class TestPhase:
    def test_lower_pi(self):
        assert_mat(phase_matrix("lower", math.pi), np.diag([1, -1]))

    def test_both_zero(self):
        assert_mat(phase_matrix("both", 0.0), IDENTITY)

    def test_upper_half_pi(self):
        assert_mat(phase_matrix("upper", math.pi / 2), np.diag([1j, 1]))

    def test_bad_arm(self):
        with pytest.raises(ValueError, match="arm"):
            phase_matrix("middle", 0.1)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            phase_matrix("upper", float("nan"))


class TestMZI:
    def test_plus_at_zero(self):
        assert_mat(mzi_block("plus", 0.0, 0.0), [[0, 1j], [1j, 0]])

    def test_minus_quarter_wave(self):
        # ½[[e-1, i(e+1)], [i(e+1), 1-e]] with e = i, worked by hand
        assert_mat(mzi_block("minus", math.pi / 2, 0.0), 0.5 * np.array(
            [[1j - 1, 1j - 1], [1j - 1, 1 - 1j]]))

    @pytest.mark.parametrize("psi", [0.0, 0.3, -1.7, 2.9, 11.0])
    def test_printed_matrices(self, psi):
        e = np.exp(1j * psi)
        plus = 0.5 * np.array([[1 - e, 1j * (1 + e)], [1j * (1 + e), -(1 - e)]])
        ec = np.conj(e)
        minus = 0.5 * e * np.array([[1 - ec, 1j * (1 + ec)], [1j * (1 + ec), -(1 - ec)]])
        assert_mat(mzi_block("plus", psi), plus)
        assert_mat(mzi_block("minus", psi), minus)

    @pytest.mark.parametrize("zeta", [0.0, 0.4, math.pi, -2.2])
    def test_pair_at_zero_psi(self, zeta):
        out = apply(mzi_block("plus", 0.0, zeta) @ mzi_block("minus", 0.0, zeta), [1, 0])
        assert_mat(out, [-np.exp(2j * zeta), 0])

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            mzi_block("up", 0.1)

    def test_differential_zeta_is_not_global(self):
        common = mzi_block("plus", 0.3, math.pi / 2)
        diff = mzi_block("plus", 0.3, math.pi / 2, zeta_mode="differential")
        assert is_unitary(diff)
        # common-mode only differs from zeta=0 by a scalar factor
        ratio = common / mzi_block("plus", 0.3)
        assert np.allclose(ratio, ratio[0, 0])
        ratio = diff / mzi_block("plus", 0.3)
        assert not np.allclose(ratio, ratio[0, 0])


class TestCBWOrder:
    def test_second_order_quarter_wave(self):
        assert_mat(cbw_order_matrix(math.pi / 2, 2, True), IDENTITY)

    def test_third_order(self):
        assert_mat(apply(cbw_order_matrix(math.pi / 3, 3, True), [1, 0]), [-1, 0])

    def test_first_order_at_pi(self):
        # -exp(i pi) * cos(pi) = -1
        assert_mat(apply(cbw_order_matrix(math.pi, 1, True), [1, 0]), [-1, 0])

    def test_first_order_is_round_trip(self, rng):
        for psi in rng.uniform(-4 * math.pi, 4 * math.pi, 1000):
            assert_mat(cbw_order_matrix(psi, 1, True), round_trip_matrix(psi))

    def test_global_flag_off(self, rng):
        for psi in rng.uniform(-10, 10, 50):
            for m in (1, 2, 7, 5000):
                assert_mat(cbw_order_matrix(psi, m, False),
                           (-1) ** m * rotation(m * psi), atol=1e-9)

    @pytest.mark.parametrize("m", [0, -3])
    def test_order_domain(self, m):
        with pytest.raises(ValueError):
            cbw_order_matrix(0.2, m)

    def test_order_type(self):
        with pytest.raises(TypeError):
            cbw_order_matrix(0.2, 1.5)


def test_apply_examples():
    assert_mat(apply(IDENTITY, field_pair(1, 0)), [1, 0])
    assert_mat(apply(bs_matrix(0.5), field_pair(1, 0)), [s2, 1j * s2])


@settings(max_examples=200, deadline=None)
@given(r=st.floats(0, 1), psi=phases, zeta=phases, arm=st.sampled_from(["upper", "lower", "both"]),
       m=st.integers(1, 5000), sign=st.sampled_from(["plus", "minus"]),
       mode=st.sampled_from(["common", "differential"]))
def test_all_elements_unitary(r, psi, zeta, arm, m, sign, mode):
    for mat in (bs_matrix(r), phase_matrix(arm, psi), mzi_block(sign, psi, zeta, mode),
                cbw_order_matrix(psi, m, True), cbw_order_matrix(psi, m, False)):
        assert is_unitary(mat, 1e-12)


@settings(max_examples=200, deadline=None)
@given(psi=phases, e0=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_round_trip_conserves_energy(psi, e0):
    out = apply(round_trip_matrix(psi), [e0, 0])
    assert abs(np.sum(np.abs(out) ** 2) - abs(e0) ** 2) <= 1e-12 * max(abs(e0) ** 2, 1e-300)


@settings(max_examples=100, deadline=None)
@given(psi=phases)
def test_product_identity(psi):
    prod = mzi_block("plus", psi, 0.0) @ mzi_block("minus", psi, 0.0)
    assert_mat(prod, -np.exp(1j * psi) * rotation(psi))


def test_rotation_composition(rng):
    for psi in rng.uniform(-math.pi, math.pi, 20):
        for m in (2, 10, 100, 5000):
            assert_mat(np.linalg.matrix_power(rotation(psi), m), rotation(m * psi), atol=1e-9)


def test_quantization_nulls():
    for m in range(1, 101):
        for k in range(-m, m + 1):
            out = apply(cbw_order_matrix(k * math.pi / m, m, True), [1, 0])
            assert abs(out[1]) < 1e-12


def test_phi_breaks_rotation_form():
    psi = 0.7
    out = apply(round_trip_matrix(psi, phi=math.pi / 3), [1, 0])
    ref = apply(round_trip_matrix(psi), [1, 0])
    # differ by more than a global phase
    assert abs(abs(out[1]) - abs(ref[1])) > 1e-3
