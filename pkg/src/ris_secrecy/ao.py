# Alternating optimization: beamformer updates via the conic SCA solver,
# RIS phases via the element-wise coordinate sweep, plus the comparison
# schemes used in the experiment campaigns.
from __future__ import annotations

import enum
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .channel import gen_direct_channels
from .model import (BeamformerState, ChannelSet, PhaseVector, SystemConfig,
                    build_codebook, require_valid)
from .phases import PhaseProblem, bcd_sweep
from .quantization import QuantizationModel
from .rates import (EffectiveLinks, composite_rows, effective_links,
                    links_from_rows, eve_rate, secrecy_rate, user_rate)
from .sca import sca_solve, sca_solve_rows


class SchemeKind(enum.Enum):
    PROPOSED = "Proposed"
    MRT_BCD = "MRT-BCD"
    NO_RIS = "NO-RIS"
    UPPER_BOUND = "UpperBound"


@dataclass(frozen=True)
class AOResult:
    w: np.ndarray
    phases: PhaseVector
    trace: tuple[float, ...]
    converged: bool
    iterations: int
    initial_phases: PhaseVector
    warnings: tuple[str, ...]


def mrt_beamformer(links: EffectiveLinks, q: QuantizationModel, power: float) -> np.ndarray:
    """Full-power beamformer along the user's effective channel."""
    d = links.d_user
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        _warnings.warn("effective user channel is zero; MRT returns the zero vector")
        return np.zeros_like(d)
    return np.sqrt(power / q.b_q) * np.conj(d) / norm


def ao_optimize(ch: ChannelSet, cfg: SystemConfig,
                q: QuantizationModel | None = None,
                rng: np.random.Generator | None = None,
                continuous_phases: bool = False,
                max_outer: int = 20, tol: float = 1e-4,
                max_sweeps: int = 20) -> AOResult:
    """Alternate beamformer and phase blocks until the secrecy rate settles.

    Phases start uniformly at random on the discrete grid (kept continuous
    afterwards when `continuous_phases` is set); the beamformer starts at
    full-power MRT and each SCA call is warm-started from the current
    iterate, which makes the trace non-decreasing.
    """
    require_valid(cfg)
    if q is None:
        q = QuantizationModel.from_bits(cfg.dac_bits)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    sigma2, sigma_e2 = cfg.noise_user_watts, cfg.noise_eve_watts

    f_rf = build_codebook(cfg.n_tx, cfg.n_rf)
    phases = PhaseVector.random_discrete(cfg.n_ris, cfg.phase_levels, rng)
    if continuous_phases:
        phases = PhaseVector(phases.phi, None)
    initial_phases = phases

    links = effective_links(ch, phases, BeamformerState(f_rf, np.zeros(cfg.n_rf)),
                            q, sigma2, sigma_e2)
    w = mrt_beamformer(links, q, cfg.power_watts)
    warnings: list[str] = []

    def current_rs() -> float:
        lk = links_from_rows(*composite_rows(ch, phases, f_rf), w, q, sigma2, sigma_e2)
        return secrecy_rate(user_rate(lk, w), eve_rate(lk, w))

    trace = [current_rs()]
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        sca = sca_solve(ch, phases, BeamformerState(f_rf, w), q, cfg, w0=w)
        w = sca.w
        warnings.extend(sca.warnings)

        problem = PhaseProblem.from_state(ch, BeamformerState(f_rf, w), q, sigma2, sigma_e2)
        phases, _ = bcd_sweep(problem, phases, max_sweeps=max_sweeps)

        trace.append(current_rs())
        if abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break

    return AOResult(w=w, phases=phases, trace=tuple(trace), converged=converged,
                    iterations=outer, initial_phases=initial_phases,
                    warnings=tuple(warnings))


@dataclass(frozen=True)
class SchemeRun:
    """Final operating point of one scheme on one channel draw."""

    kind: SchemeKind
    r_user: float
    r_eve: float
    r_s: float
    iterations: int
    converged: bool
    warnings: tuple[str, ...]
    w: np.ndarray
    phases: PhaseVector


def _finalize(kind, ch, f_rf, phases, w, q, sigma2, sigma_e2, iterations,
              converged, warnings) -> SchemeRun:
    links = links_from_rows(*composite_rows(ch, phases, f_rf), w, q, sigma2, sigma_e2)
    r = user_rate(links, w)
    r_e = eve_rate(links, w)
    return SchemeRun(kind, r, r_e, secrecy_rate(r, r_e), iterations, converged,
                     tuple(warnings), w, phases)


def run_scheme(kind: SchemeKind, ch: ChannelSet, cfg: SystemConfig,
               direct: tuple[np.ndarray, np.ndarray] | None = None,
               rng: np.random.Generator | None = None) -> SchemeRun:
    """Run one comparison scheme on a fixed channel draw.

    `direct` supplies the blocked AP->user/AP->eve vectors used by the
    RIS-free baseline; when omitted they are drawn from cfg.seed.
    """
    require_valid(cfg)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    sigma2, sigma_e2 = cfg.noise_user_watts, cfg.noise_eve_watts
    f_rf = build_codebook(cfg.n_tx, cfg.n_rf)

    if kind is SchemeKind.PROPOSED:
        res = ao_optimize(ch, cfg, rng=rng)
        return _finalize(kind, ch, f_rf, res.phases, res.w,
                         QuantizationModel.from_bits(cfg.dac_bits), sigma2, sigma_e2,
                         res.iterations, res.converged, res.warnings)

    if kind is SchemeKind.UPPER_BOUND:
        res = ao_optimize(ch, cfg, q=QuantizationModel.ideal(), rng=rng,
                          continuous_phases=True)
        return _finalize(kind, ch, f_rf, res.phases, res.w,
                         QuantizationModel.ideal(), sigma2, sigma_e2,
                         res.iterations, res.converged, res.warnings)

    if kind is SchemeKind.MRT_BCD:
        q = QuantizationModel.from_bits(cfg.dac_bits)
        phases = PhaseVector.random_discrete(cfg.n_ris, cfg.phase_levels, rng)
        links = effective_links(ch, phases, BeamformerState(f_rf, np.zeros(cfg.n_rf)),
                                q, sigma2, sigma_e2)
        w = mrt_beamformer(links, q, cfg.power_watts)
        problem = PhaseProblem.from_state(ch, BeamformerState(f_rf, w), q, sigma2, sigma_e2)
        phases, trace = bcd_sweep(problem, phases, collect_trace=True)
        sweeps = trace[-1][0] + 1 if trace else 0
        return _finalize(kind, ch, f_rf, phases, w, q, sigma2, sigma_e2,
                         sweeps, True, ())

    if kind is SchemeKind.NO_RIS:
        q = QuantizationModel.from_bits(cfg.dac_bits)
        if direct is None:
            direct = gen_direct_channels(cfg, rng)
        h_du, h_de = direct
        m_user = h_du.conj() @ f_rf
        m_eve = h_de.conj() @ f_rf
        res = sca_solve_rows(m_user, m_eve, q, cfg.power_watts, sigma2, sigma_e2)
        links = links_from_rows(m_user, m_eve, res.w, q, sigma2, sigma_e2)
        r = user_rate(links, res.w)
        r_e = eve_rate(links, res.w)
        return SchemeRun(kind, r, r_e, secrecy_rate(r, r_e), res.iterations,
                         res.converged, res.warnings, res.w,
                         PhaseVector.zeros(cfg.n_ris, cfg.phase_levels))

    raise ValueError(f"unknown scheme {kind!r}")
