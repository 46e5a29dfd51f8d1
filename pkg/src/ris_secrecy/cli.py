# Command-line front end for the experiment campaigns.
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .ao import ao_optimize
from .channel import gen_channels
from .experiments import (bcd_exhaustive_comparison, emit_convergence_trace,
                          emit_csv, load_experiment, run_monte_carlo,
                          write_metadata)
from .model import SystemConfig, load_config, require_valid


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-secrecy",
        description="Secrecy-rate experiments for a RIS-aided mmWave downlink "
                    "with low-resolution DACs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte-Carlo campaign from an "
                                       "experiment JSON file")
    p_run.add_argument("experiment", help="path to the experiment JSON")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument("--out", default=None, help="override the output CSV path")
    p_run.add_argument("--threads", type=int, default=1,
                       help="parallel worker processes (trials are independent)")
    p_run.add_argument("--timings", action="store_true",
                       help="also write a per-trial wall-time CSV sidecar")

    p_conv = sub.add_parser("converge", help="trace one alternating-optimization "
                                             "run for convergence plots")
    p_conv.add_argument("--config", default=None, help="system config JSON (defaults used otherwise)")
    p_conv.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_conv.add_argument("--out", default="convergence.csv")

    p_oracle = sub.add_parser("oracle", help="compare coordinate-descent phases "
                                             "against exhaustive search on small instances")
    p_oracle.add_argument("--trials", type=int, default=50)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--out", default=None, help="optional per-trial CSV")
    return parser


def _cmd_run(args) -> int:
    exp = load_experiment(args.experiment)
    if args.seed is not None:
        exp = dataclasses.replace(exp, base=dataclasses.replace(exp.base, seed=args.seed))
    out = Path(args.out if args.out is not None else exp.output_path)
    records = run_monte_carlo(exp, threads=args.threads)
    emit_csv(records, out, include_timing=False)
    write_metadata(exp, out.with_suffix(out.suffix + ".meta.json"))
    if args.timings:
        emit_csv(records, out.with_suffix(out.suffix + ".timing.csv"), include_timing=True)
    failures = sum(1 for rec in records if rec.warnings.startswith("error:"))
    print(f"wrote {len(records)} records to {out}"
          + (f" ({failures} failed trials)" if failures else ""))
    return 0


def _cmd_converge(args) -> int:
    cfg = load_config(args.config) if args.config else SystemConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    require_valid(cfg)
    ch = gen_channels(cfg, np.random.default_rng(cfg.seed))
    result = ao_optimize(ch, cfg)
    emit_convergence_trace(result.trace, args.out)
    print(f"converged={result.converged} after {result.iterations} outer iterations; "
          f"final R_s = {result.trace[-1]:.6f} bits/s/Hz; trace -> {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    trials = bcd_exhaustive_comparison(args.trials, args.seed)
    hits = sum(1 for t in trials if t.r_s_bcd >= 0.95 * t.r_s_exhaustive - 1e-12)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write("seed,r_s_bcd,r_s_exhaustive,bcd_ms,exhaustive_ms\n")
            for t in trials:
                f.write(f"{t.seed},{t.r_s_bcd:.9g},{t.r_s_exhaustive:.9g},"
                        f"{t.bcd_ms:.9g},{t.exhaustive_ms:.9g}\n")
    mean_bcd = float(np.mean([t.bcd_ms for t in trials]))
    mean_ex = float(np.mean([t.exhaustive_ms for t in trials]))
    print(f"{hits}/{len(trials)} trials reached 95% of the exhaustive secrecy rate "
          f"(mean {mean_bcd:.2f} ms vs {mean_ex:.2f} ms exhaustive)")
    ok = hits >= int(np.ceil(0.9 * len(trials)))
    if not ok:
        print("oracle check FAILED: coordinate descent fell short too often", file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "converge":
            return _cmd_converge(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
