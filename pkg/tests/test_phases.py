import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_secrecy.channel import gen_channels
from ris_secrecy.model import (BeamformerState, PhaseVector, SystemConfig,
                               TWO_PI, build_codebook)
from ris_secrecy.phases import (BCDCoefficients, PhaseProblem, bcd_coefficients,
                                bcd_sweep, exhaustive_phase_search,
                                objective_of_theta, project_discrete,
                                ratio_objective, ratio_objective_halftan,
                                solve_theorem1, stationarity_residual)
from ris_secrecy.quantization import QuantizationModel
from ris_secrecy.rates import rate_summary


def random_setup(seed, n_tx=8, n_ris=4, n_rf=3, bits=1, levels=4):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(n_tx=n_tx, n_ris=n_ris, n_rf=n_rf, dac_bits=bits,
                       phase_levels=levels, power_watts=1e8)
    ch = gen_channels(cfg, rng)
    f_rf = build_codebook(n_tx, n_rf)
    q = QuantizationModel.from_bits(bits)
    w = rng.standard_normal(n_rf) + 1j * rng.standard_normal(n_rf)
    w *= np.sqrt(cfg.power_watts / q.b_q) / np.linalg.norm(w)
    bf = BeamformerState(f_rf, w)
    phases = PhaseVector.random_discrete(n_ris, levels, rng)
    problem = PhaseProblem.from_state(ch, bf, q, cfg.noise_user_watts, cfg.noise_eve_watts)
    return cfg, ch, bf, q, phases, problem


def random_coefficients(rng) -> BCDCoefficients:
    """Coefficient sets with every trig factor strictly positive."""
    vals = {}
    for name in ("mu", "eta", "lam", "rho"):
        const = rng.uniform(0.5, 10.0)
        margin = const * rng.uniform(0.0, 0.95)
        angle = rng.uniform(0, TWO_PI)
        vals[name] = const
        vals[name + "_bar"] = margin * np.cos(angle)
        vals[name + "_tilde"] = margin * np.sin(angle)
    return BCDCoefficients(
        mu=vals["mu"], mu_bar=vals["mu_bar"], mu_tilde=vals["mu_tilde"],
        eta=vals["eta"], eta_bar=vals["eta_bar"], eta_tilde=vals["eta_tilde"],
        lam=vals["lam"], lam_bar=vals["lam_bar"], lam_tilde=vals["lam_tilde"],
        rho=vals["rho"], rho_bar=vals["rho_bar"], rho_tilde=vals["rho_tilde"])


class TestCoefficients:
    def test_matches_rate_modules_on_random_states(self):
        for seed in range(25):
            cfg, ch, bf, q, phases, problem = random_setup(seed)
            i = seed % cfg.n_ris
            coeffs = bcd_coefficients(problem, i, phases)
            r, r_e, _ = rate_summary(ch, phases, bf, q,
                                     cfg.noise_user_watts, cfg.noise_eve_watts)
            expected = 2.0 ** (r - r_e)
            got = ratio_objective(coeffs, phases.phi[i])
            assert got == pytest.approx(expected, rel=1e-10)

    def test_single_element_has_no_cross_terms(self):
        cfg, ch, bf, q, phases, problem = random_setup(3, n_ris=1)
        coeffs = bcd_coefficients(problem, 0, phases)
        assert coeffs.mu_bar == 0.0 and coeffs.mu_tilde == 0.0
        assert coeffs.rho_bar == 0.0 and coeffs.rho_tilde == 0.0

    def test_zero_beamformer_flat_unit_ratio(self):
        cfg, ch, bf, q, phases, _ = random_setup(5)
        problem = PhaseProblem.from_state(ch, bf.with_w(np.zeros(cfg.n_rf)), q,
                                          cfg.noise_user_watts, cfg.noise_eve_watts)
        coeffs = bcd_coefficients(problem, 1, phases)
        for phi in np.linspace(0, TWO_PI, 13):
            assert ratio_objective(coeffs, phi) == pytest.approx(1.0, rel=1e-12)

    def test_out_of_range_index(self):
        _, _, _, _, phases, problem = random_setup(1)
        with pytest.raises(IndexError):
            bcd_coefficients(problem, 99, phases)

    def test_denominators_positive_on_grid(self):
        for seed in range(10):
            cfg, _, _, _, phases, problem = random_setup(seed)
            coeffs = bcd_coefficients(problem, 0, phases)
            g = coeffs.groups()
            phi = np.linspace(0, TWO_PI, 512, endpoint=False)
            for k in range(4):
                vals = g[k, 0] + g[k, 1] * np.cos(phi) - g[k, 2] * np.sin(phi)
                assert np.min(vals) > 0.0


class TestRatioObjective:
    def test_flat_when_no_oscillating_terms(self):
        coeffs = BCDCoefficients(2.0, 0, 0, 4.0, 0, 0, 3.0, 0, 0, 6.0, 0, 0)
        for phi in (0.0, 1.0, np.pi, 5.5):
            assert ratio_objective(coeffs, phi) == pytest.approx(0.25, rel=1e-15)

    def test_value_at_zero(self):
        rng = np.random.default_rng(0)
        c = random_coefficients(rng)
        expected = ((c.mu + c.mu_bar) * (c.lam + c.lam_bar)) / \
                   ((c.eta + c.eta_bar) * (c.rho + c.rho_bar))
        assert ratio_objective(c, 0.0) == pytest.approx(expected, rel=1e-14)

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, TWO_PI, exclude_max=True))
    @settings(max_examples=80, deadline=None)
    def test_half_angle_substitution_agrees(self, seed, phi):
        if abs(phi - np.pi) < 1e-6:
            return
        c = random_coefficients(np.random.default_rng(seed))
        t = np.tan(phi / 2.0)
        assert ratio_objective_halftan(c, t) == pytest.approx(
            ratio_objective(c, phi), rel=1e-12)

    @given(st.floats(-20.0, 20.0))
    @settings(max_examples=60, deadline=None)
    def test_half_angle_identities(self, t):
        phi = 2.0 * np.arctan(t)
        assert np.sin(phi) == pytest.approx(2 * t / (1 + t * t), abs=1e-12)
        assert np.cos(phi) == pytest.approx((1 - t * t) / (1 + t * t), abs=1e-12)

    def test_inconsistent_coefficients_raise(self):
        bad = BCDCoefficients(1.0, 0, 0, -2.0, 0, 0, 1.0, 0, 0, 1.0, 0, 0)
        with pytest.raises(ArithmeticError):
            ratio_objective(bad, 0.3)


class TestSolveTheorem1:
    def test_flat_objective_returns_zero(self):
        coeffs = BCDCoefficients(2.0, 0, 0, 4.0, 0, 0, 3.0, 0, 0, 6.0, 0, 0)
        assert solve_theorem1(coeffs) == 0.0

    def test_matches_dense_grid_argmax(self):
        phi_grid = np.linspace(0, TWO_PI, 1_000_000, endpoint=False)
        cos_g, sin_g = np.cos(phi_grid), np.sin(phi_grid)
        rng = np.random.default_rng(123)
        for _ in range(50):
            c = random_coefficients(rng)
            g = c.groups()
            vals = ((g[0, 0] + g[0, 1] * cos_g - g[0, 2] * sin_g) *
                    (g[2, 0] + g[2, 1] * cos_g - g[2, 2] * sin_g)) / \
                   ((g[1, 0] + g[1, 1] * cos_g - g[1, 2] * sin_g) *
                    (g[3, 0] + g[3, 1] * cos_g - g[3, 2] * sin_g))
            best = float(np.max(vals))
            got = ratio_objective(c, solve_theorem1(c))
            assert got >= best - 1e-8 * max(1.0, abs(best))

    def test_returned_point_is_stationary(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            c = random_coefficients(rng)
            phi = solve_theorem1(c)
            if abs(phi - np.pi) < 1e-6:
                continue
            assert stationarity_residual(c, phi) < 1e-6

    def test_known_maximum_recovered(self):
        # single oscillating numerator: maximum where cos(phi - angle) peaks
        c = BCDCoefficients(2.0, 1.0, -1.0, 1.0, 0, 0, 1.0, 0, 0, 1.0, 0, 0)
        # mu factor = 2 + cos + sin = 2 + sqrt(2) cos(phi - pi/4)
        assert solve_theorem1(c) == pytest.approx(np.pi / 4, abs=1e-6)


class TestProjectDiscrete:
    def test_nearest_level(self):
        step = TWO_PI / 4
        assert project_discrete(0.9 * step, 4) == pytest.approx(step, abs=1e-15)

    def test_wraparound(self):
        step = TWO_PI / 4
        assert project_discrete(TWO_PI - step / 4, 4) == 0.0

    def test_midpoint_tie_goes_low(self):
        step = TWO_PI / 4
        assert project_discrete(step / 2, 4) == 0.0

    def test_rejects_single_level(self):
        with pytest.raises(ValueError):
            project_discrete(0.3, 1)

    @given(st.floats(-10.0, 10.0), st.integers(2, 64))
    @settings(max_examples=100, deadline=None)
    def test_matches_bruteforce_circular_argmin(self, phi, levels):
        grid = np.arange(levels) * (TWO_PI / levels)
        diff = np.abs(np.mod(phi, TWO_PI) - grid)
        circ = np.minimum(diff, TWO_PI - diff)
        assert project_discrete(phi, levels) == grid[int(np.argmin(circ))]


class TestBcdSweep:
    def test_output_on_discrete_grid(self):
        cfg, ch, bf, q, phases, problem = random_setup(11, n_ris=6, levels=8)
        result, _ = bcd_sweep(problem, phases)
        assert result.discrete and result.levels == 8
        k = result.phi / (TWO_PI / 8)
        assert np.allclose(k, np.round(k))

    def test_never_decreases_objective(self):
        for seed in range(15):
            cfg, ch, bf, q, phases, problem = random_setup(seed, n_ris=6)
            before = objective_of_theta(problem, phases.theta)
            result, _ = bcd_sweep(problem, phases)
            after = objective_of_theta(problem, result.theta)
            assert after >= before - 1e-12 * abs(before)

    def test_fixed_point_returned_unchanged(self):
        cfg, ch, bf, q, phases, problem = random_setup(21, n_ris=4, levels=4)
        first, _ = bcd_sweep(problem, phases)
        second, _ = bcd_sweep(problem, first)
        assert np.array_equal(first.phi, second.phi)

    def test_trace_rows_shape(self):
        cfg, ch, bf, q, phases, problem = random_setup(2, n_ris=3)
        _, trace = bcd_sweep(problem, phases, collect_trace=True)
        assert trace and all(len(row) == 4 for row in trace)
        assert trace[0][0] == 0 and trace[0][1] == 0

    def test_continuous_matches_fine_discrete(self):
        cfg, ch, bf, q, phases, problem = random_setup(31, n_ris=5)
        cont, _ = bcd_sweep(problem, PhaseVector(phases.phi, None))
        fine, _ = bcd_sweep(problem, PhaseVector(phases.phi, 2**20))
        obj_cont = objective_of_theta(problem, cont.theta)
        obj_fine = objective_of_theta(problem, fine.theta)
        assert obj_fine == pytest.approx(obj_cont, abs=1e-6 * max(1.0, obj_cont))


class TestExhaustive:
    def test_single_element_enumerates_levels(self):
        cfg, ch, bf, q, phases, problem = random_setup(41, n_ris=1, levels=4)
        best = exhaustive_phase_search(problem, 4)
        values = [objective_of_theta(problem, PhaseVector(np.array([k * TWO_PI / 4]), 4).theta)
                  for k in range(4)]
        assert objective_of_theta(problem, best.theta) == pytest.approx(max(values), rel=1e-12)

    def test_two_by_two(self):
        cfg, ch, bf, q, phases, problem = random_setup(43, n_ris=2, levels=2)
        best = exhaustive_phase_search(problem, 2)
        values = []
        for a in range(2):
            for b in range(2):
                theta = PhaseVector(np.array([a, b]) * np.pi, 2).theta
                values.append(objective_of_theta(problem, theta))
        assert objective_of_theta(problem, best.theta) == pytest.approx(max(values), rel=1e-12)

    def test_size_guard(self):
        cfg, ch, bf, q, phases, problem = random_setup(44, n_ris=8)
        with pytest.raises(ValueError, match="exceeds the limit"):
            exhaustive_phase_search(problem, 64)

    def test_bcd_reaches_exhaustive_on_small_instances(self):
        hits = 0
        for seed in range(20):
            cfg, ch, bf, q, phases, problem = random_setup(seed + 100, n_ris=3, levels=4)
            swept, _ = bcd_sweep(problem, phases)
            obj_bcd = objective_of_theta(problem, swept.theta)
            obj_ex = objective_of_theta(problem, exhaustive_phase_search(problem, 4).theta)
            assert obj_bcd <= obj_ex * (1 + 1e-9)
            if obj_bcd >= 0.95 * obj_ex:
                hits += 1
        assert hits >= 18
