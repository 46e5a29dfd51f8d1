# Inner-approximation (successive convex approximation) solver for the
# digital beamforming subproblem with the RIS phases fixed.
#
# Each iteration solves a small conic program over the noise-normalized
# beamformer u = w / sqrt(P/b_q):
#
#   maximize  log2(1 + rho) - t
#   subject to
#     rate_tangent:  rho under the tangent plane of z^2/omega at the anchor
#     user_signal:   z^2 under the tangent of the user signal power |a_u u|^2
#     eve_cone:      r^2 / omega_e <= linearized (2^t - 1)   [rotated cone]
#     eve_signal:    |a_e u|^2 under the tangent of r^2
#     power_ball:    ||u||^2 <= 1
#     user_noise:    omega at least the exact user noise power
#     eve_noise:     omega_e at most the tangent of the eavesdropper noise
#
# Every surrogate is tight at the anchor and conservative elsewhere, so the
# true objective is non-decreasing across iterations.  The reverse
# (equality-enforcing) surrogates for the eavesdropper block pin the
# subproblem to the anchor value of a_e u (their only common point), so
# they are available for inspection but excluded from the default
# constraint set; see `include_eve_equality`.
from __future__ import annotations

import functools
import math
import warnings as _warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .model import BeamformerState, ChannelSet, PhaseVector, SystemConfig
from .quantization import QuantizationModel
from .rates import EffectiveLinks, composite_rows

LN2 = float(np.log(2.0))

# Normalized-scale floor that keeps tangent anchors away from zero.
ANCHOR_FLOOR = 1e-8
# Below this normalized user-channel norm the user is unreachable and the
# zero beamformer is returned directly.
NEGLIGIBLE_LINK = 1e-9


class SubproblemError(RuntimeError):
    """Raised when the convex subproblem cannot be solved to tolerance."""


@dataclass(frozen=True)
class NormalizedLinks:
    """Noise- and power-normalized beamforming data.

    a_u, a_e: signal rows; |a u|^2 is the received SINR numerator over the
              receiver noise for u on the unit ball.
    g_u, g_e: distortion rows; ||g * u||^2 + 1 is the normalized rate
              denominator.
    radius:   sqrt(P / b_q), mapping u back to w = radius * u.
    """

    a_u: np.ndarray
    a_e: np.ndarray
    g_u: np.ndarray
    g_e: np.ndarray
    radius: float
    sigma: float
    sigma_e: float

    @staticmethod
    def from_rows(m_user: np.ndarray, m_eve: np.ndarray, q: QuantizationModel,
                  power: float, sigma2: float, sigma_e2: float) -> "NormalizedLinks":
        radius = math.sqrt(power / q.b_q)
        sigma = math.sqrt(sigma2)
        sigma_e = math.sqrt(sigma_e2)
        root = math.sqrt(max(q.b_q * (1.0 - q.b_q), 0.0))
        return NormalizedLinks(
            a_u=q.b_q * m_user * radius / sigma,
            a_e=q.b_q * m_eve * radius / sigma_e,
            g_u=root * m_user * radius / sigma,
            g_e=root * m_eve * radius / sigma_e,
            radius=radius,
            sigma=sigma,
            sigma_e=sigma_e,
        )

    @property
    def n_rf(self) -> int:
        return self.a_u.shape[0]

    def to_w(self, u: np.ndarray) -> np.ndarray:
        return self.radius * np.asarray(u, complex)

    def from_w(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w, complex) / self.radius


def sinr_pair(nl: NormalizedLinks, u: np.ndarray) -> tuple[float, float]:
    num_u = abs(np.dot(nl.a_u, u)) ** 2
    den_u = float(np.sum(np.abs(nl.g_u * u) ** 2)) + 1.0
    num_e = abs(np.dot(nl.a_e, u)) ** 2
    den_e = float(np.sum(np.abs(nl.g_e * u) ** 2)) + 1.0
    return num_u / den_u, num_e / den_e


def objective_bits(nl: NormalizedLinks, u: np.ndarray) -> float:
    """Pre-clamp rate gap R - R_e in bits/s/Hz for a normalized beamformer."""
    s_u, s_e = sinr_pair(nl, u)
    return float((np.log1p(s_u) - np.log1p(s_e)) / LN2)


def objective_gradient(nl: NormalizedLinks, u: np.ndarray) -> np.ndarray:
    """Conjugate gradient d/du* of objective_bits; ascent direction."""
    u = np.asarray(u, complex)

    def sinr_grad(a, g):
        au = np.dot(a, u)
        num = abs(au) ** 2
        den = float(np.sum(np.abs(g * u) ** 2)) + 1.0
        grad = (np.conj(a) * au * den - num * (np.abs(g) ** 2 * u)) / den**2
        return num / den, grad

    s_u, grad_u = sinr_grad(nl.a_u, nl.g_u)
    s_e, grad_e = sinr_grad(nl.a_e, nl.g_e)
    return (grad_u / (1.0 + s_u) - grad_e / (1.0 + s_e)) / LN2


@dataclass(frozen=True)
class SCAAnchors:
    """Expansion point of one convex subproblem, in raw (un-normalized) units."""

    w_bar: np.ndarray
    z_bar: float
    omega_bar: float
    r_bar: float
    t_bar: float
    eta: float

    def __post_init__(self):
        for name in ("z_bar", "omega_bar", "r_bar", "t_bar", "eta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"anchor {name} is not finite")

    @staticmethod
    def from_normalized(nl: NormalizedLinks, u: np.ndarray) -> "SCAAnchors":
        """Exact anchors at u, with floors keeping tangents non-degenerate."""
        z_n = max(abs(np.dot(nl.a_u, u)), ANCHOR_FLOOR)
        omega_n = float(np.sum(np.abs(nl.g_u * u) ** 2)) + 1.0
        r_n = max(abs(np.dot(nl.a_e, u)), ANCHOR_FLOOR)
        omega_e_n = float(np.sum(np.abs(nl.g_e * u) ** 2)) + 1.0
        t_bar = math.log2(1.0 + r_n**2 / omega_e_n)
        eta = math.sqrt((2.0**t_bar - 1.0) / (omega_e_n * nl.sigma_e**2))
        return SCAAnchors(
            w_bar=nl.to_w(u),
            z_bar=z_n * nl.sigma,
            omega_bar=omega_n * nl.sigma**2,
            r_bar=r_n * nl.sigma_e,
            t_bar=t_bar,
            eta=eta,
        )


@functools.lru_cache(maxsize=None)
def _subproblem_factory(n_rf: int, include_eve_equality: bool):
    """Compiled parametric conic program, cached per beamformer length."""
    wr = cp.Variable(n_rf, name="w_re")
    wi = cp.Variable(n_rf, name="w_im")
    z = cp.Variable(name="z")
    omega = cp.Variable(name="omega")
    rho = cp.Variable(name="rho")
    t = cp.Variable(name="t")
    r = cp.Variable(name="r")
    omega_e = cp.Variable(name="omega_e")
    ev_re = cp.Variable(name="eve_sig_re")
    ev_im = cp.Variable(name="eve_sig_im")
    s = cp.Variable(n_rf, name="per_entry_power")

    p = {
        "k1": cp.Parameter(nonneg=True), "k2": cp.Parameter(nonneg=True),
        "linz_const": cp.Parameter(), "linz_re": cp.Parameter(n_rf), "linz_im": cp.Parameter(n_rf),
        "a_const": cp.Parameter(), "a_slope": cp.Parameter(nonneg=True),
        "e_re": cp.Parameter(n_rf), "e_im": cp.Parameter(n_rf),
        "c5_const": cp.Parameter(), "c5_slope": cp.Parameter(nonneg=True),
        "m2": cp.Parameter(n_rf, nonneg=True),
        "we_const": cp.Parameter(), "we_re": cp.Parameter(n_rf), "we_im": cp.Parameter(n_rf),
    }

    groups = {
        "rate_tangent": [rho <= p["k1"] * z - p["k2"] * omega],
        "user_signal": [cp.square(z) <= p["linz_const"] + p["linz_re"] @ wr + p["linz_im"] @ wi],
        "eve_cone": [cp.quad_over_lin(r, omega_e) <= p["a_const"] + p["a_slope"] * t],
        "eve_signal": [
            ev_re == p["e_re"] @ wr - p["e_im"] @ wi,
            ev_im == p["e_re"] @ wi + p["e_im"] @ wr,
            cp.square(ev_re) + cp.square(ev_im) <= p["c5_const"] + p["c5_slope"] * r,
        ],
        "power_ball": [cp.sum_squares(wr) + cp.sum_squares(wi) <= 1.0],
        "user_noise": [
            s >= cp.square(wr) + cp.square(wi),
            1.0 + p["m2"] @ s <= omega,
        ],
        "eve_noise": [omega_e <= p["we_const"] + p["we_re"] @ wr + p["we_im"] @ wi],
    }
    if include_eve_equality:
        y_agm1 = cp.Variable(name="agm_noise")
        y_agm2 = cp.Variable(name="agm_rate")
        p.update({
            "agm_eta": cp.Parameter(nonneg=True),
            "agm_const": cp.Parameter(), "agm_slope": cp.Parameter(nonneg=True),
            "rb_const": cp.Parameter(), "rb_re": cp.Parameter(n_rf), "rb_im": cp.Parameter(n_rf),
        })
        groups["eve_agm"] = [
            y_agm1 == p["agm_eta"] * omega_e,
            y_agm2 == p["agm_const"] + p["agm_slope"] * t,
            0.5 * (cp.square(y_agm1) + cp.square(y_agm2)) <= p["c5_const"] + p["c5_slope"] * r,
        ]
        groups["eve_signal_reverse"] = [
            cp.square(r) <= p["rb_const"] + p["rb_re"] @ wr + p["rb_im"] @ wi,
        ]

    constraints = [c for group in groups.values() for c in group]
    problem = cp.Problem(cp.Maximize(cp.log1p(rho) / LN2 - t), constraints)
    variables = {"w_re": wr, "w_im": wi, "z": z, "omega": omega, "rho": rho,
                 "t": t, "r": r, "omega_e": omega_e}
    return problem, variables, p, groups


@dataclass
class ConicSubproblem:
    """One parameterized convex subproblem, ready to solve.

    Shares a compiled problem object per beamformer length, so build and
    solve subproblems sequentially within a thread.
    """

    problem: cp.Problem
    variables: dict
    constraint_groups: dict
    normalized: NormalizedLinks
    anchors: SCAAnchors
    metadata: dict = field(default_factory=dict)


def _tangent_of_signal_power(a: np.ndarray, u_bar: np.ndarray):
    """Affine coefficients of the tangent of |a u|^2 at u_bar."""
    grad = np.conj(a) * np.dot(a, u_bar)
    const = abs(np.dot(a, u_bar)) ** 2 - 2.0 * float(
        np.real(grad).dot(np.real(u_bar)) + np.imag(grad).dot(np.imag(u_bar)))
    return const, 2.0 * np.real(grad), 2.0 * np.imag(grad)


def build_subproblem(anchors: SCAAnchors, links: EffectiveLinks,
                     q: QuantizationModel, power: float,
                     include_eve_equality: bool = False) -> ConicSubproblem:
    """Instantiate the convex subproblem at the given anchors.

    `links` must be built at the anchor beamformer; receiver noise powers
    are recovered from its denominators.
    """
    m_user = links.d_user / q.b_q
    m_eve = links.d_eve / q.b_q
    distortion = q.b_q * (1.0 - q.b_q)
    w_bar = anchors.w_bar
    sigma2 = links.omega_user - distortion * float(np.sum(np.abs(m_user * w_bar) ** 2))
    sigma_e2 = links.omega_eve - distortion * float(np.sum(np.abs(m_eve * w_bar) ** 2))
    if sigma2 <= 0 or sigma_e2 <= 0:
        raise ValueError("links are inconsistent with the anchor beamformer")
    nl = NormalizedLinks.from_rows(m_user, m_eve, q, power, sigma2, sigma_e2)
    return build_subproblem_normalized(anchors, nl, include_eve_equality)


def build_subproblem_normalized(anchors: SCAAnchors, nl: NormalizedLinks,
                                include_eve_equality: bool = False) -> ConicSubproblem:
    problem, variables, p, groups = _subproblem_factory(nl.n_rf, include_eve_equality)
    u_bar = nl.from_w(anchors.w_bar)
    z_bar = anchors.z_bar / nl.sigma
    omega_bar = anchors.omega_bar / nl.sigma**2
    r_bar = anchors.r_bar / nl.sigma_e
    t_bar = anchors.t_bar

    p["k1"].value = 2.0 * z_bar / omega_bar
    p["k2"].value = (z_bar / omega_bar) ** 2

    const, coef_re, coef_im = _tangent_of_signal_power(nl.a_u, u_bar)
    p["linz_const"].value = const
    p["linz_re"].value = coef_re
    p["linz_im"].value = coef_im

    slope = 2.0**t_bar * LN2
    p["a_slope"].value = slope
    p["a_const"].value = 2.0**t_bar - 1.0 - slope * t_bar

    p["e_re"].value = np.real(nl.a_e)
    p["e_im"].value = np.imag(nl.a_e)
    p["c5_const"].value = -(r_bar**2)
    p["c5_slope"].value = 2.0 * r_bar

    p["m2"].value = np.abs(nl.g_u) ** 2

    ge2 = np.abs(nl.g_e) ** 2
    p["we_re"].value = 2.0 * ge2 * np.real(u_bar)
    p["we_im"].value = 2.0 * ge2 * np.imag(u_bar)
    p["we_const"].value = 1.0 - float(np.sum(ge2 * np.abs(u_bar) ** 2))

    if include_eve_equality:
        eta_norm = anchors.eta * nl.sigma_e
        p["agm_eta"].value = eta_norm
        p["agm_const"].value = p["a_const"].value / eta_norm
        p["agm_slope"].value = p["a_slope"].value / eta_norm
        const, coef_re, coef_im = _tangent_of_signal_power(nl.a_e, u_bar)
        p["rb_const"].value = const
        p["rb_re"].value = coef_re
        p["rb_im"].value = coef_im

    meta = {
        "objective_form": "exponential-cone log(1+rho)",
        "constraint_groups": sorted(groups),
        "include_eve_equality": include_eve_equality,
    }
    return ConicSubproblem(problem, variables, groups, nl, anchors, meta)


@dataclass(frozen=True)
class SubproblemSolution:
    """Variable assignment of one subproblem solve, in normalized units
    except for w (mapped back through the power radius)."""

    w: np.ndarray
    u: np.ndarray
    z: float
    omega: float
    rho: float
    t: float
    r: float
    omega_e: float
    objective: float
    status: str
    inaccurate: bool


def solve_subproblem(sp: ConicSubproblem) -> SubproblemSolution:
    """Solve to interior-point accuracy; falls back from Clarabel to SCS."""
    problem = sp.problem
    status = None
    with _warnings.catch_warnings():
        # inaccurate-solution warnings are handled through the status below
        _warnings.simplefilter("ignore", UserWarning)
        try:
            problem.solve(solver=cp.CLARABEL, warm_start=False)
            status = problem.status
        except cp.error.SolverError:
            status = "solver_error"
        if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            try:
                problem.solve(solver=cp.SCS, warm_start=False, eps=1e-9, max_iters=100_000)
                status = problem.status
            except cp.error.SolverError as exc:
                raise SubproblemError(f"conic solvers failed: {exc}") from exc
    if status in (cp.INFEASIBLE, cp.UNBOUNDED, cp.INFEASIBLE_INACCURATE,
                  cp.UNBOUNDED_INACCURATE):
        raise SubproblemError(f"subproblem reported {status}")
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SubproblemError(f"subproblem ended with status {status}")

    v = sp.variables
    u = v["w_re"].value + 1j * v["w_im"].value
    return SubproblemSolution(
        w=sp.normalized.to_w(u),
        u=u,
        z=float(v["z"].value),
        omega=float(v["omega"].value),
        rho=float(v["rho"].value),
        t=float(v["t"].value),
        r=float(v["r"].value),
        omega_e=float(v["omega_e"].value),
        objective=float(problem.value),
        status=status,
        inaccurate=status == cp.OPTIMAL_INACCURATE,
    )


@dataclass(frozen=True)
class SCAResult:
    """Outcome of one inner-approximation run.

    trace / power_trace / statuses are aligned per iterate, index 0 being
    the initial point; power_trace holds the radiated power b_q*||w||^2.
    """

    w: np.ndarray
    trace: tuple[float, ...]
    power_trace: tuple[float, ...]
    statuses: tuple[str, ...]
    iterations: int
    converged: bool
    warnings: tuple[str, ...]


def sca_solve_rows(m_user: np.ndarray, m_eve: np.ndarray, q: QuantizationModel,
                   power: float, sigma2: float, sigma_e2: float,
                   w0: np.ndarray | None = None, max_iters: int = 50,
                   tol: float = 1e-4) -> SCAResult:
    """Run the inner-approximation loop on explicit composite rows."""
    nl = NormalizedLinks.from_rows(m_user, m_eve, q, power, sigma2, sigma_e2)
    warn: list[str] = []

    if np.linalg.norm(nl.a_u) < NEGLIGIBLE_LINK:
        warn.append("user link negligible; returning zero beamformer")
        zero = np.zeros(nl.n_rf, complex)
        return SCAResult(zero, (objective_bits(nl, zero),), (0.0,), ("skipped",),
                         0, True, tuple(warn))

    if w0 is None:
        u = np.conj(nl.a_u) / np.linalg.norm(nl.a_u)
    else:
        u = nl.from_w(w0)
        norm = np.linalg.norm(u)
        if norm > 1.0:
            u = u / norm
    trace = [objective_bits(nl, u)]
    power_trace = [power * float(np.sum(np.abs(u) ** 2))]
    statuses = ["initial"]
    best_u, best_obj = u, trace[0]
    converged = False
    iterations = 0

    for iterations in range(1, max_iters + 1):
        anchors = SCAAnchors.from_normalized(nl, u)
        sp = build_subproblem_normalized(anchors, nl)
        try:
            sol = solve_subproblem(sp)
        except SubproblemError as exc:
            warn.append(str(exc))
            break
        if sol.inaccurate:
            warn.append(f"iteration {iterations}: {sol.status}")
        u_new = sol.u
        norm = np.linalg.norm(u_new)
        if norm > 1.0:
            u_new = u_new / norm
        obj = objective_bits(nl, u_new)
        trace.append(obj)
        power_trace.append(power * float(np.sum(np.abs(u_new) ** 2)))
        statuses.append(sol.status)
        if obj > best_obj:
            best_obj, best_u = obj, u_new
        u = u_new
        if abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break

    return SCAResult(nl.to_w(best_u), tuple(trace), tuple(power_trace),
                     tuple(statuses), iterations, converged, tuple(warn))


def sca_solve(ch: ChannelSet, phases: PhaseVector, bf: BeamformerState,
              q: QuantizationModel, cfg: SystemConfig,
              w0: np.ndarray | None = None, max_iters: int = 50,
              tol: float = 1e-4) -> SCAResult:
    """Optimize the digital beamformer for fixed RIS phases."""
    m_user, m_eve = composite_rows(ch, phases, bf.f_rf)
    return sca_solve_rows(m_user, m_eve, q, cfg.power_watts,
                          cfg.noise_user_watts, cfg.noise_eve_watts,
                          w0=w0, max_iters=max_iters, tol=tol)
