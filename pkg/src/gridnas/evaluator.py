"""Fitness evaluation: train a decoded architecture, report validation accuracy.

Fitness is the final-epoch validation accuracy in [0, 1]. Training
randomness is seeded from the data seed and the graph digest, so fitness
is a pure function of the phenotype: re-evaluating an architecture (or a
neutral-mutation twin) always reproduces the same number, which is what
makes the phenotype-hash cache sound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import DataConfig, Dataset, synth_dataset
from .decoder import ArchitectureGraph, decode, graph_digest, validate
from .errors import ConfigError
from .functions import CatalogConfig, TensorShape
from .genome import Genotype, phenotype_hash
from .model import adam_step, build_parameters, loss_and_grad, predict


@dataclass(frozen=True)
class EvalOutcome:
    fitness: float
    diverged: bool = False


@dataclass(frozen=True)
class FitnessRecord:
    phenotype: str
    fitness: float
    seconds: float
    generation: Optional[int]
    diverged: bool = False
    trained: bool = True


def _training_rng(cfg: DataConfig, digest: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, 2, int(digest[:15], 16)])


def evaluate(graph: ArchitectureGraph, cfg: DataConfig, dataset: Optional[Dataset] = None) -> EvalOutcome:
    """Train `graph` under `cfg` and return validation accuracy.

    A NaN/Inf loss aborts training and scores 0.0 with the divergence
    flag set; the search must survive numerically hostile architectures.
    """
    if graph.input_shape.dim != cfg.embed_dim:
        raise ConfigError(
            f"graph expects embed dim {graph.input_shape.dim}, data config has {cfg.embed_dim}"
        )
    if dataset is None:
        dataset = synth_dataset(cfg)
    rng = _training_rng(cfg, graph_digest(graph))
    store = build_parameters(graph, cfg.vocab_size, cfg.num_classes, rng)
    step = 0
    # overflow during training is an anticipated outcome (scored 0.0), not a bug
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(cfg.epochs):
            order = rng.permutation(len(dataset.train_x))
            for lo in range(0, len(order), cfg.batch_size):
                batch = order[lo : lo + cfg.batch_size]
                loss, grads = loss_and_grad(
                    graph, store, dataset.train_x[batch], dataset.train_y[batch]
                )
                if not np.isfinite(loss):
                    return EvalOutcome(0.0, diverged=True)
                step += 1
                adam_step(store, grads, cfg.lr, step)
        correct = 0
        for lo in range(0, len(dataset.val_x), cfg.batch_size):
            preds = predict(graph, store, dataset.val_x[lo : lo + cfg.batch_size])
            correct += int((preds == dataset.val_y[lo : lo + cfg.batch_size]).sum())
    return EvalOutcome(correct / len(dataset.val_y))


class FitnessEvaluator:
    """Callable genotype -> fitness with a phenotype-hash cache.

    Invalid genotypes (active bound, catalog, or shape violations) score
    exactly 0.0 without training. Cache hits never retrain, so neutral
    offspring and grid-shifted duplicates cost nothing.
    """

    def __init__(self, data_cfg: DataConfig, catalog: CatalogConfig, use_cache: bool = True):
        self.data_cfg = data_cfg
        self.catalog = catalog
        self.use_cache = use_cache
        self.input_shape = TensorShape(data_cfg.batch_size, data_cfg.max_len, data_cfg.embed_dim)
        self.cache: dict[str, float] = {}
        self.records: list[FitnessRecord] = []
        self.calls = 0
        self.trainings = 0
        self.generation: Optional[int] = None
        self._dataset: Optional[Dataset] = None

    def note_generation(self, generation: int) -> None:
        self.generation = generation

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = synth_dataset(self.data_cfg)
        return self._dataset

    def __call__(self, genotype: Genotype) -> float:
        self.calls += 1
        started = time.perf_counter()
        h = phenotype_hash(genotype)
        if self.use_cache and h in self.cache:
            return self.cache[h]
        report = validate(genotype, self.catalog, self.input_shape)
        if not report.valid:
            outcome = EvalOutcome(0.0)
            trained = False
        else:
            graph = decode(genotype, self.catalog, self.input_shape)
            outcome = evaluate(graph, self.data_cfg, self.dataset)
            trained = True
            self.trainings += 1
        self.records.append(
            FitnessRecord(
                phenotype=h,
                fitness=outcome.fitness,
                seconds=time.perf_counter() - started,
                generation=self.generation,
                diverged=outcome.diverged,
                trained=trained,
            )
        )
        if self.use_cache:
            self.cache[h] = outcome.fitness
        return outcome.fitness
