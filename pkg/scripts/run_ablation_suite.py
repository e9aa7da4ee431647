#!/usr/bin/env python3
"""Search under the full catalog and the three ablated ones, then compare.

Reproduces the function-set ablation protocol at desk scale: the same
seed and task, with conv, atte, or both removed from the catalog.
"""

import argparse
from dataclasses import replace

from gridnas.config import load_run_config
from gridnas.runner import execute

PRESETS = ("full", "s_no_conv", "s_no_atte", "s_no_conv_atte")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default="runs/ablation")
    parser.add_argument("--task", default="synthetic_ngram",
                        choices=["synthetic_ngram", "synthetic_majority"])
    args = parser.parse_args()

    rows = []
    for preset in PRESETS:
        cfg = load_run_config(
            preset="desk",
            seed=args.seed,
            output_dir=f"{args.out}/{preset}",
            catalog_preset=preset,
        )
        cfg.data = replace(cfg.data, source=args.task)
        outcome = execute(cfg)
        rows.append((preset, outcome.best_fitness, outcome.wall_seconds))
        print(f"... {preset}: {outcome.best_fitness:.4f} ({outcome.wall_seconds:.1f}s)")

    print(f"\ntask={args.task} seed={args.seed}")
    print(f"{'catalog':<16} {'best_fitness':>12} {'seconds':>8}")
    for preset, fitness, seconds in rows:
        print(f"{preset:<16} {fitness:>12.4f} {seconds:>8.1f}")


if __name__ == "__main__":
    main()
