# Achievable-rate and secrecy-rate evaluation from a full system state.
# The quantizer enters through the linear gain b_q on the signal and a
# diagonal distortion term in each receiver's effective noise floor.
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeamformerState, ChannelSet, PhaseVector
from .quantization import QuantizationModel

LN2 = float(np.log(2.0))


def composite_rows(ch: ChannelSet, phases: PhaseVector, f_rf: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Cascaded rows h^H Theta G F and h_e^H Theta G F, each shape (n_rf,)."""
    gf = ch.g @ f_rf
    theta = phases.theta
    m_user = (ch.h.conj() * theta) @ gf
    m_eve = (ch.h_e.conj() * theta) @ gf
    return m_user, m_eve


@dataclass(frozen=True)
class EffectiveLinks:
    """Post-codebook effective rows and per-receiver noise denominators.

    d_user/d_eve include the quantizer gain b_q; omega_* are the full rate
    denominators (distortion power + thermal noise) for the beamformer the
    links were built with.
    """

    d_user: np.ndarray
    d_eve: np.ndarray
    omega_user: float
    omega_eve: float

    def __post_init__(self):
        if self.omega_user <= 0 or self.omega_eve <= 0:
            raise ValueError("noise denominators must be positive")


def links_from_rows(m_user: np.ndarray, m_eve: np.ndarray, w: np.ndarray,
                    q: QuantizationModel, sigma2: float, sigma_e2: float
                    ) -> EffectiveLinks:
    """Effective links for arbitrary composite rows (cascaded or direct)."""
    m_user = np.asarray(m_user, complex)
    m_eve = np.asarray(m_eve, complex)
    w = np.asarray(w, complex)
    if m_user.shape != w.shape or m_eve.shape != w.shape:
        raise ValueError("row and beamformer dimensions disagree")
    distortion = q.b_q * (1.0 - q.b_q)
    omega_user = distortion * float(np.sum(np.abs(m_user * w) ** 2)) + sigma2
    omega_eve = distortion * float(np.sum(np.abs(m_eve * w) ** 2)) + sigma_e2
    return EffectiveLinks(q.b_q * m_user, q.b_q * m_eve, omega_user, omega_eve)


def effective_links(ch: ChannelSet, phases: PhaseVector, bf: BeamformerState,
                    q: QuantizationModel, sigma2: float, sigma_e2: float
                    ) -> EffectiveLinks:
    m_user, m_eve = composite_rows(ch, phases, bf.f_rf)
    return links_from_rows(m_user, m_eve, bf.w, q, sigma2, sigma_e2)


def user_rate(links: EffectiveLinks, w: np.ndarray) -> float:
    """log2(1 + |D w|^2 / omega), in bits/s/Hz."""
    gain = float(np.abs(links.d_user @ np.asarray(w, complex)) ** 2)
    return float(np.log1p(gain / links.omega_user) / LN2)


def eve_rate(links: EffectiveLinks, w: np.ndarray) -> float:
    gain = float(np.abs(links.d_eve @ np.asarray(w, complex)) ** 2)
    return float(np.log1p(gain / links.omega_eve) / LN2)


def secrecy_rate(r_user: float, r_eve: float) -> float:
    """Clamped rate gap max(0, R - R_e)."""
    return max(0.0, r_user - r_eve)


def rate_summary(ch: ChannelSet, phases: PhaseVector, bf: BeamformerState,
                 q: QuantizationModel, sigma2: float, sigma_e2: float
                 ) -> tuple[float, float, float]:
    """(R, R_e, R_s) for one full state."""
    links = effective_links(ch, phases, bf, q, sigma2, sigma_e2)
    r = user_rate(links, bf.w)
    r_e = eve_rate(links, bf.w)
    return r, r_e, secrecy_rate(r, r_e)
