"""Command-line surface.

Subcommands: search, resume, eval, decode, ablate. Exit codes: 0 ok,
2 configuration, 3 checkpoint, 4 decode, 130 interrupted.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .config import load_run_config
from .data import DataConfig
from .decoder import decode, graph_to_json, to_dot
from .errors import (
    CatalogError,
    CheckpointError,
    ConfigError,
    DecodeError,
    EvaluationFailure,
    GridnasError,
)
from .evaluator import evaluate
from .external import ExternalEvaluatorClient, data_section
from .functions import ABLATION_PRESETS, CatalogConfig, TensorShape
from .genome import Genotype, phenotype_hash
from .runner import execute, resume

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECKPOINT = 3
EXIT_DECODE = 4
EXIT_INTERRUPT = 130


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridnas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run config JSON")
        p.add_argument("--preset", choices=["paper", "desk"], help="base preset")
        p.add_argument("--seed", type=int, help="overrides every seed in the config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--external", help="external evaluator command")

    p_search = sub.add_parser("search", help="run an architecture search")
    common(p_search)
    p_search.add_argument("--stop-after", type=int, help="stop after N generations (for testing interrupts)")

    p_resume = sub.add_parser("resume", help="continue a checkpointed search")
    p_resume.add_argument("checkpoint", help="checkpoint.json written by search")
    p_resume.add_argument("--out", help="override the recorded output directory")

    p_eval = sub.add_parser("eval", help="evaluate a stored genotype on a dataset")
    common(p_eval)
    p_eval.add_argument("genotype", help="genotype JSON file")
    p_eval.add_argument(
        "--catalog-preset",
        choices=sorted(ABLATION_PRESETS),
        help="restrict the catalog (rejects out-of-catalog genotypes)",
    )

    p_decode = sub.add_parser("decode", help="decode a genotype to a graph JSON / DOT file")
    p_decode.add_argument("genotype", help="genotype JSON file")
    p_decode.add_argument("--config", help="run config JSON (for the input shape)")
    p_decode.add_argument("--preset", choices=["paper", "desk"])
    p_decode.add_argument("--shape", type=int, nargs=3, metavar=("B", "L", "D"), help="input shape override")
    p_decode.add_argument("--out", help="write graph JSON here instead of stdout")
    p_decode.add_argument("--dot", help="also write a DOT rendering here")

    p_ablate = sub.add_parser("ablate", help="search with a restricted function catalog")
    p_ablate.add_argument("ablation", help="one of s_no_conv, s_no_atte, s_no_conv_atte")
    common(p_ablate)

    return parser


def _load_genotype(path: str) -> Genotype:
    try:
        with open(path, encoding="utf-8") as fh:
            return Genotype.from_json(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read genotype {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise DecodeError(f"genotype {path} is malformed: {exc}") from exc


def _cmd_search(args) -> int:
    cfg = load_run_config(
        path=args.config,
        preset=args.preset,
        seed=args.seed,
        output_dir=args.out,
        external=args.external,
    )
    outcome = execute(cfg, stop_after=args.stop_after)
    status = "completed" if outcome.completed else f"stopped at generation {outcome.generations}"
    print(
        f"search {status}: best fitness {outcome.best_fitness:.4f} "
        f"({outcome.wall_seconds:.1f}s, artifacts in {cfg.output_dir})"
    )
    return EXIT_OK


def _cmd_resume(args) -> int:
    outcome = resume(args.checkpoint, output_dir=args.out)
    if outcome.wall_seconds == 0.0 and outcome.completed:
        print(f"checkpoint already completed at generation {outcome.generations}; nothing to do")
    else:
        print(
            f"resumed to generation {outcome.generations}: best fitness {outcome.best_fitness:.4f}"
        )
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = load_run_config(
        path=args.config,
        preset=args.preset,
        seed=args.seed,
        external=args.external,
        catalog_preset=args.catalog_preset,
    )
    genotype = _load_genotype(args.genotype)
    catalog = (
        CatalogConfig.preset(args.catalog_preset)
        if args.catalog_preset
        else CatalogConfig.from_names([f.value for f in genotype.functions])
    )
    shape = TensorShape(cfg.data.batch_size, cfg.data.max_len, cfg.data.embed_dim)
    graph = decode(genotype, catalog, shape)
    if cfg.external is not None:
        with ExternalEvaluatorClient(cfg.external) as client:
            fitness = client.evaluate_graphs([graph_to_json(graph)], data_section(cfg.data))[0]
    else:
        fitness = evaluate(graph, cfg.data).fitness
    print(
        json.dumps(
            {
                "fitness": fitness,
                "hash": phenotype_hash(genotype),
                "shapes": [list(n.out_shape) for n in graph.nodes],
            }
        )
    )
    return EXIT_OK


def _cmd_decode(args) -> int:
    genotype = _load_genotype(args.genotype)
    if args.shape is not None:
        shape = TensorShape(*args.shape)
    else:
        cfg = load_run_config(path=args.config, preset=args.preset)
        shape = TensorShape(cfg.data.batch_size, cfg.data.max_len, cfg.data.embed_dim)
    catalog = CatalogConfig.from_names([f.value for f in genotype.functions])
    graph = decode(genotype, catalog, shape)
    text = json.dumps(graph_to_json(graph))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(graph))
    return EXIT_OK


def _cmd_ablate(args) -> int:
    if args.ablation not in ABLATION_PRESETS:
        raise ConfigError(
            f"unknown ablation preset {args.ablation!r}; choose from {sorted(ABLATION_PRESETS)}"
        )
    out = args.out
    cfg = load_run_config(
        path=args.config,
        preset=args.preset,
        seed=args.seed,
        output_dir=out,
        external=args.external,
        catalog_preset=args.ablation,
    )
    if out is None:
        cfg.output_dir = f"{cfg.output_dir.rstrip('/')}_{args.ablation}"
    outcome = execute(cfg)
    print(
        f"ablation {args.ablation} completed: best fitness {outcome.best_fitness:.4f} "
        f"(catalog {cfg.catalog.names()}, artifacts in {cfg.output_dir})"
    )
    return EXIT_OK


_HANDLERS = {
    "search": _cmd_search,
    "resume": _cmd_resume,
    "eval": _cmd_eval,
    "decode": _cmd_decode,
    "ablate": _cmd_ablate,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except (DecodeError, CatalogError) as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except EvaluationFailure as exc:
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("interrupted; checkpoint flushed", file=sys.stderr)
        return EXIT_INTERRUPT
    except GridnasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
