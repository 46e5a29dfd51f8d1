import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_secrecy.quantization import (QuantizationModel, distortion_factor,
                                      quant_covariance, transmit_power)


class TestDistortionFactor:
    def test_one_bit_constant(self):
        assert distortion_factor(1) == 0.3634

    def test_two_bits_closed_form(self):
        assert distortion_factor(2) == pytest.approx(0.1700436903969579, rel=1e-14)

    def test_deep_quantizer_vanishes(self):
        assert distortion_factor(30) < 1e-17

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            distortion_factor(0)

    @given(st.integers(1, 40))
    @settings(max_examples=40, deadline=None)
    def test_monotone_decreasing(self, b):
        assert distortion_factor(b + 1) < distortion_factor(b)

    def test_model_invariants(self):
        for b in range(1, 12):
            q = QuantizationModel.from_bits(b)
            assert q.b_q + q.eta == pytest.approx(1.0, abs=1e-15)
            assert 0.0 < q.eta < 1.0

    def test_ideal_model(self):
        q = QuantizationModel.ideal()
        assert q.b_q == 1.0 and q.eta == 0.0


class TestQuantCovariance:
    def test_zero_vector(self):
        assert np.allclose(quant_covariance(0.5, np.zeros(3)), 0.0)

    def test_unit_gain_no_distortion(self):
        assert np.allclose(quant_covariance(1.0, np.array([1.0, 2.0, 3j])), 0.0)

    def test_hand_value(self):
        a = quant_covariance(0.6366, np.array([1.0, 1j]))
        assert np.allclose(np.diag(a), 0.23134044, atol=1e-8)
        assert np.allclose(a, np.diag(np.diag(a)))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 12))
    @settings(max_examples=40, deadline=None)
    def test_psd_and_trace(self, seed, n):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b_q = rng.uniform(0.05, 1.0)
        a = quant_covariance(b_q, w)
        assert np.all(np.diag(a) >= 0.0)
        expected = b_q * (1 - b_q) * np.sum(np.abs(w) ** 2)
        assert np.trace(a) == pytest.approx(expected, rel=1e-12)


class TestTransmitPower:
    def test_zero_vector(self):
        assert transmit_power(0.5, np.zeros(4)) == 0.0

    def test_unit_gain_is_plain_norm(self):
        w = np.array([1.0 + 1j, 2.0])
        assert transmit_power(1.0, w) == pytest.approx(np.sum(np.abs(w) ** 2), rel=1e-15)

    def test_hand_value(self):
        assert transmit_power(0.6366, np.array([1.0, 1.0])) == pytest.approx(1.2732, abs=1e-9)

    def test_identity_on_random_vectors(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = rng.integers(1, 16)
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            b_q = rng.uniform(0.01, 1.0)
            assert transmit_power(b_q, w) == pytest.approx(
                b_q * np.sum(np.abs(w) ** 2), rel=1e-12)

    def test_high_resolution_limit(self):
        w = np.array([0.3 - 2j, 1.5])
        q = QuantizationModel.from_bits(24)
        assert q.b_q == pytest.approx(1.0, abs=1e-13)
        assert transmit_power(q.b_q, w) == pytest.approx(np.sum(np.abs(w) ** 2), rel=1e-12)
