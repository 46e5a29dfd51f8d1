# Projected gradient ascent on the smooth rate gap, used as an
# independent cross-check of the conic SCA solver.
from __future__ import annotations

import numpy as np

from .model import BeamformerState, ChannelSet, PhaseVector, SystemConfig
from .quantization import QuantizationModel
from .rates import composite_rows
from .sca import NormalizedLinks, objective_bits, objective_gradient


def project_to_ball(u: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ||u|| <= radius (scales, never grows)."""
    norm = float(np.linalg.norm(u))
    if norm > radius:
        return u * (radius / norm)
    return np.array(u, copy=True)


def pga_rows(m_user: np.ndarray, m_eve: np.ndarray, q: QuantizationModel,
             power: float, sigma2: float, sigma_e2: float,
             w0: np.ndarray | None = None, max_iters: int = 500,
             grad_tol: float = 1e-10) -> tuple[np.ndarray, list[float]]:
    """Gradient ascent with backtracking line search on explicit rows.

    Always returns the best iterate seen; the trace holds the objective
    (R - R_e, bits) per accepted step.
    """
    nl = NormalizedLinks.from_rows(m_user, m_eve, q, power, sigma2, sigma_e2)
    if w0 is not None:
        u = project_to_ball(nl.from_w(w0))
    elif np.linalg.norm(nl.a_u) > 0:
        u = np.conj(nl.a_u) / np.linalg.norm(nl.a_u)
    else:
        u = np.zeros(nl.n_rf, complex)

    f = objective_bits(nl, u)
    trace = [f]
    best_u, best_f = u, f
    step = 1.0
    for _ in range(max_iters):
        grad = objective_gradient(nl, u)
        gnorm_sq = float(np.sum(np.abs(grad) ** 2))
        if gnorm_sq < grad_tol**2:
            break
        trial = step
        accepted = False
        while trial > 1e-14:
            u_new = project_to_ball(u + trial * grad)
            f_new = objective_bits(nl, u_new)
            if f_new > f + 1e-4 * trial * gnorm_sq:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        u, f = u_new, f_new
        trace.append(f)
        if f > best_f:
            best_u, best_f = u, f
        step = min(trial * 2.0, 1e3)
    return nl.to_w(best_u), trace


def pga_baseline(ch: ChannelSet, phases: PhaseVector, bf: BeamformerState,
                 q: QuantizationModel, cfg: SystemConfig,
                 w0: np.ndarray | None = None, max_iters: int = 500) -> np.ndarray:
    m_user, m_eve = composite_rows(ch, phases, bf.f_rf)
    w, _ = pga_rows(m_user, m_eve, q, cfg.power_watts,
                    cfg.noise_user_watts, cfg.noise_eve_watts,
                    w0=w0, max_iters=max_iters)
    return w
