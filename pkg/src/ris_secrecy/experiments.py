# Seeded Monte-Carlo campaigns over the comparison schemes, with CSV
# output suitable for external plotting.
from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ao import SchemeKind, mrt_beamformer, run_scheme
from .channel import assemble_channels, assemble_direct_channels, draw_trial
from .model import (BeamformerState, PhaseVector, SystemConfig, build_codebook,
                    config_from_dict, require_valid)
from .phases import PhaseProblem, bcd_sweep, exhaustive_phase_search
from .quantization import QuantizationModel
from .rates import effective_links, rate_summary

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# Stream tags keep channel draws shared across schemes and sweep columns
# while giving each scheme its own algorithm randomness.
_CHANNEL_TAG = 0x11
_ALGO_TAG = 0x22

SWEEP_KINDS = ("none", "n_ris", "dac_bits", "power")


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *parts: int) -> int:
    """Fold indices into a 64-bit sub-stream seed (splitmix-style).

    Each part advances the state by the golden-ratio increment and is then
    bit-mixed, so (master, parts) -> seed is deterministic and two distinct
    part tuples collide only with ~2^-64 probability.
    """
    state = master & _MASK64
    for part in parts:
        state = _mix64((state + _GOLDEN + part) & _MASK64)
    return state


@dataclass(frozen=True)
class ExperimentConfig:
    base: SystemConfig
    sweep_kind: str = "none"
    sweep_values: tuple = ()
    n_trials: int = 100
    schemes: tuple[SchemeKind, ...] = (SchemeKind.PROPOSED,)
    output_path: str = "campaign.csv"

    def __post_init__(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise ValueError(f"sweep kind must be one of {SWEEP_KINDS}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.sweep_kind != "none":
            vals = tuple(self.sweep_values)
            if not vals:
                raise ValueError("sweep values must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError("sweep values must be strictly increasing")
        if not self.schemes:
            raise ValueError("at least one scheme is required")


def experiment_from_dict(data: dict) -> ExperimentConfig:
    known = {"base", "sweep", "n_trials", "schemes", "output_path"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
    base = config_from_dict(data.get("base", {}))
    sweep = data.get("sweep")
    if sweep in (None, "none"):
        kind, values = "none", ()
    else:
        sweep_unknown = set(sweep) - {"kind", "values"}
        if sweep_unknown:
            raise ValueError(f"unknown sweep keys: {sorted(sweep_unknown)}")
        kind = sweep["kind"]
        values = tuple(sweep["values"])
    schemes = tuple(SchemeKind(name) for name in data.get("schemes", ["Proposed"]))
    return ExperimentConfig(base=base, sweep_kind=kind, sweep_values=values,
                            n_trials=int(data.get("n_trials", 100)),
                            schemes=schemes,
                            output_path=data.get("output_path", "campaign.csv"))


def load_experiment(path: str | Path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        return experiment_from_dict(json.load(f))


def apply_sweep(base: SystemConfig, kind: str, value) -> SystemConfig:
    if kind == "none":
        return base
    if kind == "n_ris":
        return dataclasses.replace(base, n_ris=int(value))
    if kind == "dac_bits":
        return dataclasses.replace(base, dac_bits=int(value))
    if kind == "power":
        return dataclasses.replace(base, power_watts=float(value))
    raise ValueError(f"unknown sweep kind {kind!r}")


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    scheme: str
    sweep_value: float | None
    r_s: float
    r: float
    r_e: float
    iterations: int
    wall_time_ms: float
    warnings: str


def _run_work_item(exp: ExperimentConfig, sweep_idx: int, trial: int) -> list[TrialRecord]:
    """All schemes on one channel draw; the draw is shared across schemes
    and across sweep columns so comparisons are paired."""
    master = exp.base.seed
    value = exp.sweep_values[sweep_idx] if exp.sweep_kind != "none" else None
    cfg = apply_sweep(exp.base, exp.sweep_kind, value) if value is not None else exp.base
    require_valid(cfg)

    channel_seed = derive_seed(master, _CHANNEL_TAG, trial)
    draw = draw_trial(cfg, np.random.default_rng(channel_seed))
    ch = assemble_channels(cfg, draw)
    direct = assemble_direct_channels(cfg, draw)

    records = []
    for scheme_idx, kind in enumerate(exp.schemes):
        rng = np.random.default_rng(derive_seed(master, _ALGO_TAG, scheme_idx, trial))
        start = time.perf_counter()
        try:
            run = run_scheme(kind, ch, cfg, direct=direct, rng=rng)
            wall_ms = (time.perf_counter() - start) * 1e3
            records.append(TrialRecord(
                seed=channel_seed, scheme=kind.value, sweep_value=value,
                r_s=run.r_s, r=run.r_user, r_e=run.r_eve,
                iterations=run.iterations, wall_time_ms=wall_ms,
                warnings="; ".join(run.warnings)))
        except Exception as exc:  # a failed trial must not kill the campaign
            wall_ms = (time.perf_counter() - start) * 1e3
            records.append(TrialRecord(
                seed=channel_seed, scheme=kind.value, sweep_value=value,
                r_s=math.nan, r=math.nan, r_e=math.nan,
                iterations=0, wall_time_ms=wall_ms,
                warnings=f"error: {exc}"))
    return records


def run_monte_carlo(exp: ExperimentConfig, threads: int = 1) -> list[TrialRecord]:
    """Every sweep value x trial x scheme, deterministically seeded.

    Identical experiments produce identical records; record order is
    canonicalized to (sweep, scheme, trial) regardless of thread count.
    """
    n_sweeps = len(exp.sweep_values) if exp.sweep_kind != "none" else 1
    items = [(si, tr) for si in range(n_sweeps) for tr in range(exp.n_trials)]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_work_item,
                                   [exp] * len(items),
                                   [si for si, _ in items],
                                   [tr for _, tr in items]))
    else:
        chunks = [_run_work_item(exp, si, tr) for si, tr in items]

    ordered = []
    for si in range(n_sweeps):
        for scheme_idx in range(len(exp.schemes)):
            for tr in range(exp.n_trials):
                ordered.append(chunks[si * exp.n_trials + tr][scheme_idx])
    return ordered


_CSV_FIELDS = ("seed", "scheme", "sweep_value", "r_s", "r", "r_e",
               "iterations", "wall_time_ms", "warnings")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def emit_csv(records: list[TrialRecord], path: str | Path,
             include_timing: bool = True) -> None:
    """Write records as UTF-8 CSV with LF endings and 9-significant-digit
    floats; the clamped secrecy rate is recomputed from (r, r_e) on write."""
    if not records:
        raise ValueError("no records")
    fields = _CSV_FIELDS if include_timing else tuple(
        f for f in _CSV_FIELDS if f != "wall_time_ms")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(fields) + "\n")
        for rec in records:
            row = dataclasses.asdict(rec)
            if math.isfinite(rec.r) and math.isfinite(rec.r_e):
                row["r_s"] = max(0.0, rec.r - rec.r_e)
            f.write(",".join(_fmt(row[name]) for name in fields) + "\n")


def parse_csv(path: str | Path) -> list[dict]:
    import csv as _csv

    with open(path, encoding="utf-8") as f:
        reader = _csv.DictReader(f)
        rows = []
        for raw in reader:
            row = dict(raw)
            for key in ("r_s", "r", "r_e", "wall_time_ms", "sweep_value"):
                if key in row and row[key] not in ("", None):
                    row[key] = float(row[key])
            for key in ("seed", "iterations"):
                row[key] = int(row[key])
            rows.append(row)
        return rows


def write_metadata(exp: ExperimentConfig, path: str | Path) -> None:
    meta = {
        "base": dataclasses.asdict(exp.base),
        "sweep": {"kind": exp.sweep_kind, "values": list(exp.sweep_values)},
        "n_trials": exp.n_trials,
        "schemes": [k.value for k in exp.schemes],
        "master_seed": exp.base.seed,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def emit_convergence_trace(trace, path: str | Path) -> None:
    """CSV (iteration, r_s) of one optimization run, iteration 0 first."""
    values = list(trace)
    if not values:
        raise ValueError("no records")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("iteration,r_s\n")
        for i, value in enumerate(values):
            f.write(f"{i},{value:.9g}\n")


def write_sca_trace(trace: list[float], power_per_iter: list[float],
                    statuses: list[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("iteration,objective,power,status\n")
        for i, (obj, pw, st) in enumerate(zip(trace, power_per_iter, statuses)):
            f.write(f"{i},{obj:.9g},{pw:.9g},{st}\n")


def write_bcd_trace(trace: list[tuple[int, int, float, float]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("sweep,element,phi,r_s\n")
        for sweep, element, phi, r_s in trace:
            f.write(f"{sweep},{element},{phi:.9g},{r_s:.9g}\n")


def default_oracle_config() -> SystemConfig:
    """Small instance on which exhaustive phase search is affordable."""
    return SystemConfig(n_tx=16, n_ris=3, n_rf=4, phase_levels=4,
                        power_watts=1.0e8)


@dataclass(frozen=True)
class OracleTrial:
    seed: int
    r_s_bcd: float
    r_s_exhaustive: float
    bcd_ms: float
    exhaustive_ms: float


def bcd_exhaustive_comparison(n_trials: int, master_seed: int,
                              cfg: SystemConfig | None = None) -> list[OracleTrial]:
    """Coordinate-descent phases vs. exhaustive enumeration on one draw each.

    Both final states are scored by the rates module, keeping the reference
    independent of the per-element coefficient path.
    """
    if cfg is None:
        cfg = default_oracle_config()
    require_valid(cfg)
    q = QuantizationModel.from_bits(cfg.dac_bits)
    f_rf = build_codebook(cfg.n_tx, cfg.n_rf)
    sigma2, sigma_e2 = cfg.noise_user_watts, cfg.noise_eve_watts

    out = []
    for trial in range(n_trials):
        seed = derive_seed(master_seed, _CHANNEL_TAG, trial)
        rng = np.random.default_rng(seed)
        ch = assemble_channels(cfg, draw_trial(cfg, rng))
        phases0 = PhaseVector.random_discrete(cfg.n_ris, cfg.phase_levels, rng)

        links = effective_links(ch, phases0, BeamformerState(f_rf, np.zeros(cfg.n_rf)),
                                q, sigma2, sigma_e2)
        w = mrt_beamformer(links, q, cfg.power_watts)
        bf = BeamformerState(f_rf, w)
        problem = PhaseProblem.from_state(ch, bf, q, sigma2, sigma_e2)

        t0 = time.perf_counter()
        phases_bcd, _ = bcd_sweep(problem, phases0)
        bcd_ms = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        phases_ex = exhaustive_phase_search(problem, cfg.phase_levels)
        ex_ms = (time.perf_counter() - t0) * 1e3

        _, _, rs_bcd = rate_summary(ch, phases_bcd, bf, q, sigma2, sigma_e2)
        _, _, rs_ex = rate_summary(ch, phases_ex, bf, q, sigma2, sigma_e2)
        out.append(OracleTrial(seed, rs_bcd, rs_ex, bcd_ms, ex_ms))
    return out
