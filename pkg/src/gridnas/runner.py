"""Search orchestration: artifacts, checkpoints, interrupt handling.

A run owns its output directory (lock file) and writes:

  history.jsonl      one record per generation (deterministic fields only)
  eval_log.jsonl     one record per fitness evaluation (includes wall time)
  checkpoint.json    full resumable state, rewritten every k generations
  best_genotype.json / best_graph.json / best.dot / summary.json on completion

History and checkpoints are rewritten from state on resume, so a run
checkpointed at generation k and resumed produces byte-identical files
to an uninterrupted run.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Optional

from .config import RunConfig
from .decoder import decode, graph_to_json, to_dot
from .errors import CheckpointError, ConfigError, EvaluationFailure
from .evaluator import FitnessEvaluator
from .evolution import EvolutionRun, GenerationReport
from .external import ExternalFitnessEvaluator
from .functions import TensorShape
from .genome import phenotype_hash

ENGINE_VERSION = "1"

CHECKPOINT_NAME = "checkpoint.json"
HISTORY_NAME = "history.jsonl"
EVAL_LOG_NAME = "eval_log.jsonl"
BEST_GENOTYPE_NAME = "best_genotype.json"
BEST_GRAPH_NAME = "best_graph.json"
BEST_DOT_NAME = "best.dot"
SUMMARY_NAME = "summary.json"
FAILED_NAME = "failed_genotype.json"


@dataclass
class SearchOutcome:
    config: RunConfig
    best_fitness: float
    best_hash: str
    generations: int
    completed: bool
    wall_seconds: float


class _DirLock:
    """One process owns the output directory at a time."""

    def __init__(self, output_dir: str):
        self.path = os.path.join(output_dir, ".lock")

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"output dir is locked by another run ({self.path}); remove the stale lock to proceed"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        try:
            os.unlink(self.path)
        except OSError:
            pass


def build_evaluator(cfg: RunConfig):
    if cfg.external is not None or cfg.data.source == "external":
        if cfg.external is None:
            raise ConfigError("data source 'external' requires an evaluator command (--external)")
        return ExternalFitnessEvaluator(cfg.data, cfg.catalog, cfg.external, use_cache=cfg.cache)
    return FitnessEvaluator(cfg.data, cfg.catalog, use_cache=cfg.cache)


def write_checkpoint(path: str, cfg: RunConfig, state: dict) -> None:
    payload = {
        "version": ENGINE_VERSION,
        "run_config": cfg.to_json(),
        "generation": state["generation"],
        "parent": state["parent"],
        "parent_fitness": state["parent_fitness"],
        "rng_state": state["rng_state"],
        "history": state["history"],
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_checkpoint(path: str) -> tuple[RunConfig, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} is corrupted: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("version") != ENGINE_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has engine version {payload.get('version')!r}, "
            f"this engine is {ENGINE_VERSION!r}"
        )
    required = {"run_config", "generation", "parent", "parent_fitness", "rng_state", "history"}
    missing = required - set(payload)
    if missing:
        raise CheckpointError(f"checkpoint {path} is missing field(s) {sorted(missing)}")
    try:
        cfg = RunConfig.from_json(payload["run_config"])
    except (KeyError, TypeError, ConfigError) as exc:
        raise CheckpointError(f"checkpoint {path} carries a bad run config: {exc}") from exc
    state = {
        "generation": payload["generation"],
        "parent": payload["parent"],
        "parent_fitness": payload["parent_fitness"],
        "rng_state": _rng_state_from_json(payload["rng_state"]),
        "history": payload["history"],
    }
    return cfg, state


def _rng_state_from_json(state: dict) -> dict:
    # json round-trips the PCG64 state dict unchanged (ints stay ints)
    return state


def _write_best_artifacts(cfg: RunConfig, run: EvolutionRun, out: str) -> str:
    best = run.parent
    assert best is not None
    with open(os.path.join(out, BEST_GENOTYPE_NAME), "w", encoding="utf-8") as fh:
        json.dump(best.to_json(), fh)
        fh.write("\n")
    shape = TensorShape(cfg.data.batch_size, cfg.data.max_len, cfg.data.embed_dim)
    graph = decode(best, cfg.catalog, shape)
    with open(os.path.join(out, BEST_GRAPH_NAME), "w", encoding="utf-8") as fh:
        json.dump(graph_to_json(graph), fh)
        fh.write("\n")
    with open(os.path.join(out, BEST_DOT_NAME), "w", encoding="utf-8") as fh:
        fh.write(to_dot(graph))
    return phenotype_hash(best)


def execute(
    cfg: RunConfig,
    resume_state: Optional[dict] = None,
    stop_after: Optional[int] = None,
) -> SearchOutcome:
    """Run (or continue) a search and materialize its artifacts.

    KeyboardInterrupt and evaluator failures flush a checkpoint before
    propagating, so no more than the current generation is lost.
    """
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    started = time.perf_counter()
    with _DirLock(out):
        evaluator = build_evaluator(cfg)
        history_fh = open(os.path.join(out, HISTORY_NAME), "w", encoding="utf-8")
        eval_fh = open(os.path.join(out, EVAL_LOG_NAME), "w", encoding="utf-8")

        def observer(report: GenerationReport) -> None:
            history_fh.write(json.dumps(report.record()) + "\n")
            history_fh.flush()
            for child in report.offspring:
                eval_fh.write(
                    json.dumps(
                        {
                            "gen": report.generation,
                            "hash": child.phenotype,
                            "fitness": child.fitness,
                            "seconds": round(child.seconds, 6),
                        }
                    )
                    + "\n"
                )
            eval_fh.flush()

        run = EvolutionRun(cfg.evolution, cfg.grid, cfg.catalog, evaluator, observer)
        ckpt_path = os.path.join(out, CHECKPOINT_NAME)
        try:
            if resume_state is not None:
                run.restore(resume_state)
                for record in run.history:
                    history_fh.write(json.dumps(record) + "\n")
                history_fh.flush()
            else:
                run.initialize()
                init = run.initial_eval
                eval_fh.write(
                    json.dumps(
                        {
                            "gen": -1,  # initialization, before generation 0
                            "hash": init.phenotype,
                            "fitness": init.fitness,
                            "seconds": round(init.seconds, 6),
                        }
                    )
                    + "\n"
                )
                eval_fh.flush()
            limit = cfg.evolution.max_generation if stop_after is None else min(
                stop_after, cfg.evolution.max_generation
            )
            while run.generation < limit:
                run.step()
                if run.generation % cfg.checkpoint_every == 0:
                    write_checkpoint(ckpt_path, cfg, run.state_dict())
            write_checkpoint(ckpt_path, cfg, run.state_dict())
        except KeyboardInterrupt:
            write_checkpoint(ckpt_path, cfg, run.state_dict())
            raise
        except EvaluationFailure as failure:
            with open(os.path.join(out, FAILED_NAME), "w", encoding="utf-8") as fh:
                json.dump(failure.genotype.to_json(), fh)
                fh.write("\n")
            if run.started:
                write_checkpoint(ckpt_path, cfg, run.state_dict())
            raise
        finally:
            history_fh.close()
            eval_fh.close()
            close = getattr(evaluator, "close", None)
            if close is not None:
                close()

        completed = run.finished
        best_hash = phenotype_hash(run.parent) if run.parent is not None else ""
        if completed:
            best_hash = _write_best_artifacts(cfg, run, out)
            summary = {
                "preset": cfg.preset,
                "catalog_preset": cfg.catalog_preset,
                "catalog": cfg.catalog.names(),
                "seed": cfg.seed,
                "generations": run.generation,
                "best_fitness": run.parent_fitness,
                "best_hash": best_hash,
                "wall_seconds": round(time.perf_counter() - started, 3),
            }
            with open(os.path.join(out, SUMMARY_NAME), "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=2)
                fh.write("\n")
    return SearchOutcome(
        config=cfg,
        best_fitness=run.parent_fitness,
        best_hash=best_hash,
        generations=run.generation,
        completed=completed,
        wall_seconds=time.perf_counter() - started,
    )


def resume(checkpoint_path: str, output_dir: Optional[str] = None) -> SearchOutcome:
    """Continue a checkpointed run; a completed checkpoint is a no-op."""
    cfg, state = load_checkpoint(checkpoint_path)
    if output_dir is not None:
        cfg.output_dir = output_dir
    if state["generation"] >= cfg.evolution.max_generation:
        return SearchOutcome(
            config=cfg,
            best_fitness=float(state["parent_fitness"]),
            best_hash="",
            generations=state["generation"],
            completed=True,
            wall_seconds=0.0,
        )
    return execute(cfg, resume_state=state)
