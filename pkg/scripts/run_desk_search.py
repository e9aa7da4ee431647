#!/usr/bin/env python3
"""Run a desk-scale architecture search and print the outcome.

Example:
    python scripts/run_desk_search.py --seed 7 --out runs/desk7
    python scripts/run_desk_search.py --task synthetic_majority --generations 50
"""

import argparse
import json

from gridnas.config import load_run_config
from gridnas.runner import execute


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default="runs/desk")
    parser.add_argument("--task", default="synthetic_ngram",
                        choices=["synthetic_ngram", "synthetic_majority"])
    parser.add_argument("--generations", type=int, default=None)
    args = parser.parse_args()

    overrides = {"preset": "desk", "data": {"source": args.task}}
    if args.generations is not None:
        overrides["evolution"] = {"max_generation": args.generations}
    cfg_path = f"{args.out}.config.json"
    import os

    os.makedirs(os.path.dirname(cfg_path) or ".", exist_ok=True)
    with open(cfg_path, "w") as fh:
        json.dump(overrides, fh, indent=2)

    cfg = load_run_config(path=cfg_path, seed=args.seed, output_dir=args.out)
    outcome = execute(cfg)
    print(f"task={args.task} seed={args.seed}")
    print(f"best fitness  {outcome.best_fitness:.4f}")
    print(f"generations   {outcome.generations}")
    print(f"wall time     {outcome.wall_seconds:.1f}s")
    print(f"artifacts     {cfg.output_dir}/ (history.jsonl, best_genotype.json, best.dot)")


if __name__ == "__main__":
    main()
