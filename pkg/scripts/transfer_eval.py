#!/usr/bin/env python3
"""Re-evaluate a searched genotype on another task (transfer analog).

Takes a best_genotype.json from a finished search and trains/evaluates
the same architecture on both synthetic tasks, reporting the accuracy
delta between its origin task and the transfer target.
"""

import argparse
import json

from gridnas import CatalogConfig, Genotype, TensorShape, decode
from gridnas.data import desk_data
from gridnas.evaluator import evaluate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("genotype", help="best_genotype.json from a search")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    with open(args.genotype) as fh:
        genotype = Genotype.from_json(json.load(fh))
    catalog = CatalogConfig.from_names([f.value for f in genotype.functions])

    results = {}
    for task in ("synthetic_ngram", "synthetic_majority"):
        cfg = desk_data(seed=args.seed, source=task)
        shape = TensorShape(cfg.batch_size, cfg.max_len, cfg.embed_dim)
        graph = decode(genotype, catalog, shape)
        results[task] = evaluate(graph, cfg).fitness
        print(f"{task:<20} accuracy {results[task]:.4f}")

    delta = results["synthetic_ngram"] - results["synthetic_majority"]
    print(f"\ntransfer delta (ngram - majority): {delta:+.4f}")


if __name__ == "__main__":
    main()
