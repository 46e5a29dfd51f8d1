# Element-wise coordinate descent over the discrete RIS phase shifts.
#
# With the beamformer held fixed, the pre-clamp secrecy objective
# 2^(R - R_e) as a function of a single element's phase is a ratio of four
# strictly positive trigonometric polynomials of degree one.  Each element
# is optimized by a dense grid plus golden-section refinement, projected
# onto the discrete grid, and accepted only if the objective does not
# decrease.
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BeamformerState, ChannelSet, PhaseVector, TWO_PI
from .quantization import QuantizationModel

GRID_POINTS = 2048
_PHI_GRID = np.linspace(0.0, TWO_PI, GRID_POINTS, endpoint=False)
_COS_GRID = np.cos(_PHI_GRID)
_SIN_GRID = np.sin(_PHI_GRID)
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PhaseProblem:
    """Phase-only view of the system: everything except theta is folded in.

    c, d:  per-element signal vectors toward user and eavesdropper
    a, b:  per-element distortion matrices (n_ris, n_rf); scaled so that
           ||theta^T a||^2 is exactly the user's distortion noise power
    """

    c: np.ndarray
    d: np.ndarray
    a: np.ndarray
    b: np.ndarray
    sigma2: float
    sigma_e2: float

    @staticmethod
    def from_state(ch: ChannelSet, bf: BeamformerState, q: QuantizationModel,
                   sigma2: float, sigma_e2: float) -> "PhaseProblem":
        gf = ch.g @ bf.f_rf
        gfw = gf @ bf.w
        root = math.sqrt(max(q.b_q * (1.0 - q.b_q), 0.0))
        return PhaseProblem(
            c=q.b_q * ch.h.conj() * gfw,
            d=q.b_q * ch.h_e.conj() * gfw,
            a=root * (ch.h.conj()[:, None] * gf) * bf.w[None, :],
            b=root * (ch.h_e.conj()[:, None] * gf) * bf.w[None, :],
            sigma2=sigma2,
            sigma_e2=sigma_e2,
        )

    @property
    def n_ris(self) -> int:
        return self.c.shape[0]


def objective_of_theta(problem: PhaseProblem, theta: np.ndarray) -> float:
    """Pre-clamp secrecy objective 2^(R - R_e) for a full phase vector."""
    sig_u = abs(np.dot(theta, problem.c)) ** 2
    sig_e = abs(np.dot(theta, problem.d)) ** 2
    den_u = float(np.sum(np.abs(theta @ problem.a) ** 2)) + problem.sigma2
    den_e = float(np.sum(np.abs(theta @ problem.b) ** 2)) + problem.sigma_e2
    return ((sig_u + den_u) * den_e) / ((sig_e + den_e) * den_u)


@dataclass(frozen=True)
class BCDCoefficients:
    """The twelve scalars of one element's ratio objective.

    Grouped as ((mu + mu_bar cos - mu_tilde sin) / (eta + ...)) *
    ((lam + ...) / (rho + ...)); the mu/eta groups carry the full user/eve
    rate numerators, the lam/rho groups the eve/user noise denominators.
    """

    mu: float
    mu_bar: float
    mu_tilde: float
    eta: float
    eta_bar: float
    eta_tilde: float
    lam: float
    lam_bar: float
    lam_tilde: float
    rho: float
    rho_bar: float
    rho_tilde: float

    def groups(self) -> np.ndarray:
        """4x3 array of (const, cos, sin) rows: mu, eta, lam, rho."""
        return np.array([
            [self.mu, self.mu_bar, self.mu_tilde],
            [self.eta, self.eta_bar, self.eta_tilde],
            [self.lam, self.lam_bar, self.lam_tilde],
            [self.rho, self.rho_bar, self.rho_tilde],
        ])


def bcd_coefficients(problem: PhaseProblem, i: int, phases: PhaseVector) -> BCDCoefficients:
    """Coefficients of the ratio objective as a function of element i's phase."""
    theta = phases.theta
    if not 0 <= i < problem.n_ris:
        raise IndexError(f"element index {i} out of range")

    p_i = np.dot(theta, problem.c) - theta[i] * problem.c[i]
    p_bar = np.dot(theta, problem.d) - theta[i] * problem.d[i]
    v = theta @ problem.a - theta[i] * problem.a[i]
    v_bar = theta @ problem.b - theta[i] * problem.b[i]
    q_i = problem.a[i]
    q_bar = problem.b[i]
    c_i = problem.c[i]
    d_i = problem.d[i]

    cross_u = c_i * np.conj(p_i)
    cross_e = d_i * np.conj(p_bar)
    cross_a = np.sum(q_i * np.conj(v))
    cross_b = np.sum(q_bar * np.conj(v_bar))

    pow_a = float(np.sum(np.abs(q_i) ** 2) + np.sum(np.abs(v) ** 2))
    pow_b = float(np.sum(np.abs(q_bar) ** 2) + np.sum(np.abs(v_bar) ** 2))

    return BCDCoefficients(
        mu=abs(c_i) ** 2 + abs(p_i) ** 2 + pow_a + problem.sigma2,
        mu_bar=2.0 * float(np.real(cross_u + cross_a)),
        mu_tilde=2.0 * float(np.imag(cross_u + cross_a)),
        eta=abs(d_i) ** 2 + abs(p_bar) ** 2 + pow_b + problem.sigma_e2,
        eta_bar=2.0 * float(np.real(cross_e + cross_b)),
        eta_tilde=2.0 * float(np.imag(cross_e + cross_b)),
        lam=pow_b + problem.sigma_e2,
        lam_bar=2.0 * float(np.real(cross_b)),
        lam_tilde=2.0 * float(np.imag(cross_b)),
        rho=pow_a + problem.sigma2,
        rho_bar=2.0 * float(np.real(cross_a)),
        rho_tilde=2.0 * float(np.imag(cross_a)),
    )


def _group_values(coeffs: BCDCoefficients, cos_phi, sin_phi):
    g = coeffs.groups()
    return [g[k, 0] + g[k, 1] * cos_phi - g[k, 2] * sin_phi for k in range(4)]


def ratio_objective(coeffs: BCDCoefficients, phi):
    """Evaluate the per-element ratio objective at phase(s) phi."""
    n_mu, n_eta, n_lam, n_rho = _group_values(coeffs, np.cos(phi), np.sin(phi))
    scale = max(abs(coeffs.mu), abs(coeffs.eta), abs(coeffs.lam), abs(coeffs.rho), 1e-300)
    for name, val in (("eta", n_eta), ("rho", n_rho), ("mu", n_mu), ("lam", n_lam)):
        if np.min(val) <= -1e-12 * scale:
            raise ArithmeticError(
                f"{name} factor of the ratio objective is non-positive; "
                "coefficients are inconsistent")
    return (n_mu * n_lam) / (n_eta * n_rho)


def ratio_objective_halftan(coeffs: BCDCoefficients, t):
    """Same objective through the half-angle substitution t = tan(phi/2)."""
    g = coeffs.groups()
    one_pt2 = 1.0 + np.square(t)
    vals = [g[k, 0] * one_pt2 + g[k, 1] * (1.0 - np.square(t)) - 2.0 * g[k, 2] * t
            for k in range(4)]
    return (vals[0] * vals[2]) / (vals[1] * vals[3])


def stationarity_residual(coeffs: BCDCoefficients, phi: float) -> float:
    """Normalized first-order optimality residual in the half-angle domain.

    Returns |sum of the four signed terms| / sum of their magnitudes; zero
    for a flat objective.  Singular at phi = pi where t diverges; callers
    treat that point as a boundary case.
    """
    t = math.tan(phi / 2.0)
    g = coeffs.groups()
    signs = (1.0, -1.0, 1.0, -1.0)
    total = 0.0
    total_abs = 0.0
    for k in range(4):
        const, bar, tilde = g[k]
        den = const * (1.0 + t * t) + bar * (1.0 - t * t) - 2.0 * tilde * t
        term = ((const - bar) * t - tilde) / den
        total += signs[k] * term
        total_abs += abs(term)
    if total_abs < 1e-300:
        return 0.0
    return abs(total) / total_abs


def _golden_section_max(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    a, b = lo, hi
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def solve_theorem1(coeffs: BCDCoefficients) -> float:
    """Global maximizer of the element's ratio objective over [0, 2*pi).

    Dense-grid bracketing followed by golden-section refinement; the grid
    point is kept when refinement does not strictly improve, which also
    fixes the flat-objective tie-break at phi = 0.
    """
    g = coeffs.groups()
    vals_num = (g[0, 0] + g[0, 1] * _COS_GRID - g[0, 2] * _SIN_GRID) * \
               (g[2, 0] + g[2, 1] * _COS_GRID - g[2, 2] * _SIN_GRID)
    vals_den = (g[1, 0] + g[1, 1] * _COS_GRID - g[1, 2] * _SIN_GRID) * \
               (g[3, 0] + g[3, 1] * _COS_GRID - g[3, 2] * _SIN_GRID)
    vals = vals_num / vals_den
    best = int(np.argmax(vals))
    step = TWO_PI / GRID_POINTS
    phi0 = _PHI_GRID[best]

    refined = _golden_section_max(lambda p: ratio_objective(coeffs, p),
                                  phi0 - step, phi0 + step)
    if ratio_objective(coeffs, refined) > vals[best]:
        return float(np.mod(refined, TWO_PI))
    return float(phi0)


def project_discrete(phi_star: float, levels: int) -> float:
    """Nearest point of the discrete grid in circular distance.

    Ties are broken toward the smaller grid index.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    grid = np.arange(levels) * (TWO_PI / levels)
    diff = np.abs(np.mod(phi_star, TWO_PI) - grid)
    circ = np.minimum(diff, TWO_PI - diff)
    return float(grid[int(np.argmin(circ))])


def bcd_sweep(problem: PhaseProblem, phases: PhaseVector, max_sweeps: int = 20,
              collect_trace: bool = False
              ) -> tuple[PhaseVector, list[tuple[int, int, float, float]]]:
    """Cyclic per-element maximization with a monotone acceptance guard.

    Each element's continuous maximizer is projected onto the discrete grid
    (when the input is marked discrete) and kept only if the objective does
    not decrease.  Stops after a sweep that changes no element.  The trace
    rows are (sweep, element, phi, secrecy_rate).
    """
    phi = phases.phi.copy()
    trace: list[tuple[int, int, float, float]] = []
    for sweep in range(max_sweeps):
        changed = False
        for i in range(problem.n_ris):
            coeffs = bcd_coefficients(problem, i, PhaseVector(phi, None))
            candidate = solve_theorem1(coeffs)
            if phases.discrete:
                candidate = project_discrete(candidate, phases.levels)
            if ratio_objective(coeffs, candidate) >= ratio_objective(coeffs, phi[i]):
                if abs(candidate - phi[i]) > 1e-10:
                    changed = True
                phi[i] = candidate
            if collect_trace:
                ratio = ratio_objective(coeffs, phi[i])
                trace.append((sweep, i, float(phi[i]), max(0.0, math.log2(ratio))))
        if not changed:
            break
    return PhaseVector(phi, phases.levels), trace


def exhaustive_phase_search(problem: PhaseProblem, levels: int,
                            max_combinations: int = 10 ** 6) -> PhaseVector:
    """Global optimum over the full discrete grid by enumeration.

    Intended as a reference for small instances only; refuses instances
    with more than `max_combinations` grid points.
    """
    n = problem.n_ris
    total = levels ** n
    if total > max_combinations:
        raise ValueError(
            f"exhaustive search over {levels}^{n} = {total} combinations "
            f"exceeds the limit of {max_combinations}")
    # mixed-radix enumeration, last element varying fastest
    idx = np.arange(total)
    digits = np.empty((total, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        digits[:, pos] = idx % levels
        idx //= levels
    theta_all = np.exp(1j * digits * (TWO_PI / levels))

    sig_u = np.abs(theta_all @ problem.c) ** 2
    sig_e = np.abs(theta_all @ problem.d) ** 2
    den_u = np.sum(np.abs(theta_all @ problem.a) ** 2, axis=1) + problem.sigma2
    den_e = np.sum(np.abs(theta_all @ problem.b) ** 2, axis=1) + problem.sigma_e2
    values = ((sig_u + den_u) * den_e) / ((sig_e + den_e) * den_u)
    best = int(np.argmax(values))
    return PhaseVector(digits[best] * (TWO_PI / levels), levels)
