# Linear (additive-noise) model of coarse DAC quantization and the
# resulting transmit-power identity behind a semi-unitary codebook.
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Measured distortion factor for 1-bit quantization; the closed form below
# is the high-resolution approximation used for b >= 2.
ETA_ONE_BIT = 0.3634


def distortion_factor(b: int) -> float:
    """Distortion factor eta_b of a b-bit quantizer; decreasing in b."""
    if b < 1:
        raise ValueError("bit depth must be >= 1")
    if b == 1:
        return ETA_ONE_BIT
    return float(np.pi * np.sqrt(3.0) / 2.0 * 2.0 ** (-2 * b))


@dataclass(frozen=True)
class QuantizationModel:
    """Linear gain b_q = 1 - eta plus uncorrelated distortion of a b-bit DAC."""

    bits: int | None
    eta: float
    b_q: float

    def __post_init__(self):
        if not (0.0 <= self.eta < 1.0):
            raise ValueError("eta must lie in [0, 1)")
        if abs(self.b_q + self.eta - 1.0) > 1e-15:
            raise ValueError("b_q and eta must sum to 1")

    @staticmethod
    def from_bits(b: int) -> "QuantizationModel":
        eta = distortion_factor(b)
        return QuantizationModel(bits=b, eta=eta, b_q=1.0 - eta)

    @staticmethod
    def ideal() -> "QuantizationModel":
        """Hardware-unlimited reference: unit gain, zero distortion."""
        return QuantizationModel(bits=None, eta=0.0, b_q=1.0)


def quant_covariance(b_q: float, w: np.ndarray) -> np.ndarray:
    """Diagonal distortion covariance b_q*(1-b_q)*diag(|w_i|^2)."""
    if not (0.0 < b_q <= 1.0):
        raise ValueError("b_q must lie in (0, 1]")
    w = np.asarray(w, complex)
    return np.diag(b_q * (1.0 - b_q) * np.abs(w) ** 2)


def transmit_power(b_q: float, w: np.ndarray) -> float:
    """Radiated power ||b_q w||^2 + tr(A_Q); algebraically b_q*||w||^2."""
    if not (0.0 < b_q <= 1.0):
        raise ValueError("b_q must lie in (0, 1]")
    w = np.asarray(w, complex)
    norm_sq = float(np.sum(np.abs(w) ** 2))
    return b_q**2 * norm_sq + float(np.trace(quant_covariance(b_q, w)))
