import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_secrecy.ao import SchemeKind
from ris_secrecy.cli import main as cli_main
from ris_secrecy.experiments import (ExperimentConfig, TrialRecord,
                                     bcd_exhaustive_comparison, derive_seed,
                                     emit_convergence_trace, emit_csv,
                                     experiment_from_dict, parse_csv,
                                     run_monte_carlo)
from ris_secrecy.model import SystemConfig

SMALL_BASE = dict(n_tx=8, n_ris=4, n_rf=2, power_watts=1e9, seed=0)


def small_experiment(**kw):
    args = dict(base=SystemConfig(**SMALL_BASE), sweep_kind="none",
                sweep_values=(), n_trials=2,
                schemes=(SchemeKind.PROPOSED, SchemeKind.MRT_BCD),
                output_path="out.csv")
    args.update(kw)
    return ExperimentConfig(**args)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)

    @given(st.integers(0, 2**63), st.integers(0, 1000), st.integers(0, 1000))
    @settings(max_examples=60, deadline=None)
    def test_order_sensitive_and_bounded(self, master, a, b):
        s = derive_seed(master, a, b)
        assert 0 <= s < 2**64
        if a != b:
            assert derive_seed(master, a, b) != derive_seed(master, b, a)

    def test_no_collisions_in_typical_range(self):
        seen = {derive_seed(0, tag, trial) for tag in range(4) for trial in range(500)}
        assert len(seen) == 2000


class TestExperimentConfig:
    def test_from_dict_round_trip(self):
        exp = experiment_from_dict({
            "base": {"n_tx": 8, "n_ris": 4, "n_rf": 2},
            "sweep": {"kind": "n_ris", "values": [4, 8]},
            "n_trials": 3,
            "schemes": ["Proposed", "NO-RIS"],
            "output_path": "x.csv",
        })
        assert exp.sweep_kind == "n_ris" and exp.sweep_values == (4, 8)
        assert exp.schemes == (SchemeKind.PROPOSED, SchemeKind.NO_RIS)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown experiment keys"):
            experiment_from_dict({"base": {}, "extra": 1})

    def test_sweep_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            small_experiment(sweep_kind="n_ris", sweep_values=(8, 8))

    def test_trials_floor(self):
        with pytest.raises(ValueError, match="n_trials"):
            small_experiment(n_trials=0)


class TestMonteCarlo:
    def test_single_trial_single_scheme(self):
        exp = small_experiment(n_trials=1, schemes=(SchemeKind.MRT_BCD,))
        records = run_monte_carlo(exp)
        assert len(records) == 1
        rec = records[0]
        assert rec.scheme == "MRT-BCD" and np.isfinite(rec.r_s)

    def test_identical_runs_identical_records(self):
        import dataclasses
        exp = small_experiment()
        a = run_monte_carlo(exp)
        b = run_monte_carlo(exp)
        strip = [dataclasses.replace(rec, wall_time_ms=0.0) for rec in a + b]
        assert strip[:len(a)] == strip[len(a):]

    def test_schemes_share_channel_draws(self):
        exp = small_experiment()
        records = run_monte_carlo(exp)
        by_scheme = {}
        for rec in records:
            by_scheme.setdefault(rec.scheme, []).append(rec.seed)
        seeds = list(by_scheme.values())
        assert seeds[0] == seeds[1]

    def test_record_order_canonical(self):
        exp = small_experiment(sweep_kind="dac_bits", sweep_values=(1, 2),
                               n_trials=2, schemes=(SchemeKind.MRT_BCD,))
        records = run_monte_carlo(exp)
        values = [rec.sweep_value for rec in records]
        assert values == sorted(values)


class TestCsv:
    def make_records(self):
        return [
            TrialRecord(seed=7, scheme="Proposed", sweep_value=None, r_s=0.0,
                        r=1.5, r_e=0.25, iterations=4, wall_time_ms=12.5,
                        warnings=""),
            TrialRecord(seed=8, scheme="Proposed", sweep_value=None, r_s=0.0,
                        r=0.5, r_e=0.75, iterations=3, wall_time_ms=8.25,
                        warnings="note"),
        ]

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no records"):
            emit_csv([], tmp_path / "x.csv")

    def test_one_record_two_lines(self, tmp_path):
        path = tmp_path / "x.csv"
        emit_csv(self.make_records()[:1], path)
        assert path.read_text().count("\n") == 2

    def test_secrecy_recomputed_on_write(self, tmp_path):
        path = tmp_path / "x.csv"
        emit_csv(self.make_records(), path)
        rows = parse_csv(path)
        assert rows[0]["r_s"] == pytest.approx(1.25, abs=1e-12)
        assert rows[1]["r_s"] == 0.0

    def test_round_trip_precision(self, tmp_path):
        rng = np.random.default_rng(0)
        records = [TrialRecord(seed=i, scheme="Proposed", sweep_value=float(i),
                               r_s=0.0, r=float(rng.uniform(0, 10)),
                               r_e=float(rng.uniform(0, 10)), iterations=1,
                               wall_time_ms=1.0, warnings="")
                   for i in range(20)]
        path = tmp_path / "x.csv"
        emit_csv(records, path)
        rows = parse_csv(path)
        # 9 significant digits bound the worst-case relative error at 5e-9
        for rec, row in zip(records, rows):
            assert row["r"] == pytest.approx(rec.r, rel=5e-9)
            assert row["r_e"] == pytest.approx(rec.r_e, rel=5e-9)

    def test_timing_column_optional(self, tmp_path):
        path = tmp_path / "x.csv"
        emit_csv(self.make_records(), path, include_timing=False)
        header = path.read_text().splitlines()[0]
        assert "wall_time_ms" not in header

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "x.csv"
        emit_csv(self.make_records(), path)
        raw = path.read_bytes()
        assert b"\r" not in raw


class TestConvergenceTrace:
    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no records"):
            emit_convergence_trace([], tmp_path / "t.csv")

    def test_numbering_starts_at_zero(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_convergence_trace([0.1, 0.5, 0.6], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iteration,r_s"
        assert lines[1].startswith("0,")
        assert len(lines) == 4


class TestOracleSuite:
    def test_small_run(self):
        trials = bcd_exhaustive_comparison(3, master_seed=0)
        assert len(trials) == 3
        for t in trials:
            assert t.r_s_bcd <= t.r_s_exhaustive + 1e-9
            assert t.exhaustive_ms > 0.0


class TestCli:
    def test_run_subcommand(self, tmp_path):
        exp_path = tmp_path / "exp.json"
        exp_path.write_text(json.dumps({
            "base": SMALL_BASE,
            "sweep": None,
            "n_trials": 1,
            "schemes": ["MRT-BCD"],
            "output_path": str(tmp_path / "out.csv"),
        }))
        assert cli_main(["run", str(exp_path)]) == 0
        rows = parse_csv(tmp_path / "out.csv")
        assert len(rows) == 1
        assert (tmp_path / "out.csv.meta.json").exists()

    def test_run_determinism_byte_identical(self, tmp_path):
        exp_path = tmp_path / "exp.json"
        exp_path.write_text(json.dumps({
            "base": SMALL_BASE,
            "n_trials": 2,
            "schemes": ["MRT-BCD", "NO-RIS"],
            "output_path": str(tmp_path / "a.csv"),
        }))
        assert cli_main(["run", str(exp_path)]) == 0
        assert cli_main(["run", str(exp_path), "--out", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_converge_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(SMALL_BASE))
        out = tmp_path / "trace.csv"
        assert cli_main(["converge", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "iteration,r_s"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))
        assert abs(values[-1] - values[-2]) < 1e-4

    def test_oracle_subcommand(self, tmp_path, capsys):
        out = tmp_path / "oracle.csv"
        code = cli_main(["oracle", "--trials", "5", "--seed", "1", "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert "5/5" in capsys.readouterr().out or out.read_text().count("\n") == 6

    def test_bad_experiment_path(self, capsys):
        assert cli_main(["run", "/nonexistent/exp.json"]) == 2
        assert "error:" in capsys.readouterr().err
