#!/usr/bin/env python3
"""Secrecy rate of all schemes versus the number of RIS elements."""
import argparse

from ris_secrecy import ExperimentConfig, SystemConfig, emit_csv, run_monte_carlo
from ris_secrecy.ao import SchemeKind


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="sweep_ris_size.csv")
    args = parser.parse_args()

    exp = ExperimentConfig(
        base=SystemConfig(seed=args.seed),
        sweep_kind="n_ris",
        sweep_values=(8, 16, 24, 32),
        n_trials=args.trials,
        schemes=tuple(SchemeKind),
        output_path=args.out,
    )
    records = run_monte_carlo(exp, threads=args.threads)
    emit_csv(records, args.out, include_timing=False)
    print(f"wrote {len(records)} records to {args.out}")


if __name__ == "__main__":
    main()
