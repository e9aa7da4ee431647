"""1+lambda evolution strategy with forced and neutral point mutation.

Each generation the parent produces lambda offspring by forced mutation
(every gene in scope). If every offspring is strictly worse, the parent
is kept but its inactive genes are shuffled by neutral mutation: the
phenotype, and therefore the fitness, is unchanged, so no re-evaluation
happens. Otherwise the best offspring (ties to the lowest index, so an
equal-fitness child replaces its parent and genetic drift continues)
becomes the next parent.

Mutation rates: Sum genes mutate at an elevated rate to discourage
single-chain architectures, and all rates double for the late fraction
of the run to sharpen exploration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, EvaluationFailure
from .functions import Fn, parameter_domain
from .genome import (
    Gene,
    Genotype,
    GridConfig,
    RandomStream,
    active_count,
    active_nodes,
    phenotype_hash,
    random_genotype,
    valid_sources,
)
from .functions import CatalogConfig

SCOPE_ALL = "all"
SCOPE_INACTIVE = "inactive_only"


@dataclass(frozen=True)
class EvolutionConfig:
    lam: int = 4
    max_generation: int = 1000
    base_rate: float = 0.1
    sum_rate: float = 0.2
    late_fraction: float = 0.25
    late_multiplier: float = 2.0
    offspring_retry_cap: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.lam < 1:
            raise ConfigError("lambda must be >= 1")
        if not 0.0 < self.base_rate <= self.sum_rate <= 1.0:
            raise ConfigError("need 0 < base_rate <= sum_rate <= 1")
        if self.sum_rate * self.late_multiplier > 1.0:
            raise ConfigError("late multiplier would push the sum rate above 1")
        if not 0.0 < self.late_fraction < 1.0:
            raise ConfigError("late_fraction must lie in (0, 1)")
        if self.max_generation < 0 or self.offspring_retry_cap < 1:
            raise ConfigError("max_generation must be >= 0 and retry cap >= 1")

    def to_json(self) -> dict:
        return {
            "lam": self.lam,
            "max_generation": self.max_generation,
            "base_rate": self.base_rate,
            "sum_rate": self.sum_rate,
            "late_fraction": self.late_fraction,
            "late_multiplier": self.late_multiplier,
            "offspring_retry_cap": self.offspring_retry_cap,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "EvolutionConfig":
        return cls(**data)


def late_threshold(cfg: EvolutionConfig) -> int:
    """First generation of the late phase."""
    return math.ceil((1.0 - cfg.late_fraction) * cfg.max_generation)


def effective_rate(cfg: EvolutionConfig, generation: int, gene_function: Optional[Fn]) -> float:
    """Per-field mutation probability for a gene at this generation.

    `gene_function=None` addresses the output-connection gene, which
    mutates at the non-Sum rate.
    """
    base = cfg.sum_rate if gene_function is Fn.SUM else cfg.base_rate
    if generation >= late_threshold(cfg):
        return base * cfg.late_multiplier
    return base


def _resample(current, domain, rng: RandomStream):
    alternatives = [x for x in domain if x != current]
    if not alternatives:
        return current
    return alternatives[int(rng.integers(len(alternatives)))]


def point_mutate(
    genotype: Genotype,
    rate_fn: Callable[[Optional[Fn]], float],
    scope: str,
    rng: RandomStream,
) -> Genotype:
    """Independent per-field resampling to a different valid value.

    Fields are the gene's function, both connections and its parameter;
    under SCOPE_ALL the output connection counts as one more field. When
    a function change lands, the parameter is redrawn from the new
    function's domain unconditionally. Singleton domains never change.
    """
    if scope not in (SCOPE_ALL, SCOPE_INACTIVE):
        raise ConfigError(f"unknown mutation scope {scope!r}")
    skip = frozenset(active_nodes(genotype)) if scope == SCOPE_INACTIVE else frozenset()
    config = genotype.config
    enabled = genotype.functions
    genes = list(genotype.genes)
    for idx in range(1, config.node_count + 1):
        if idx in skip:
            continue
        gene = genes[idx - 1]
        rate = rate_fn(gene.function)
        sources = valid_sources(config, config.column_of(idx))
        fn = gene.function
        if rng.random() < rate:
            fn = _resample(fn, enabled, rng)
        in1 = gene.in1
        if rng.random() < rate:
            in1 = _resample(in1, sources, rng)
        in2 = gene.in2
        if rng.random() < rate:
            in2 = _resample(in2, sources, rng)
        if fn is not gene.function:
            domain = parameter_domain(fn)
            param = domain[int(rng.integers(len(domain)))]
        else:
            param = gene.param
            if rng.random() < rate:
                param = _resample(param, parameter_domain(fn), rng)
        if (fn, in1, in2, param) != (gene.function, gene.in1, gene.in2, gene.param):
            genes[idx - 1] = Gene(fn, in1, in2, param)
    output = genotype.output
    if scope == SCOPE_ALL and rng.random() < rate_fn(None):
        output = _resample(output, range(config.node_count + 1), rng)
    return Genotype(config=config, genes=tuple(genes), output=output, functions=enabled)


def forced_mutation(
    genotype: Genotype, cfg: EvolutionConfig, generation: int, rng: RandomStream
) -> Genotype:
    """Offspring by whole-genome point mutation, retried into the active bound.

    If no attempt within the retry cap lands inside
    [active_min, active_max], the last attempt is returned anyway; the
    evaluator scores such genotypes 0.0.
    """
    rate_fn = lambda fn: effective_rate(cfg, generation, fn)
    config = genotype.config
    child = genotype
    for _ in range(cfg.offspring_retry_cap):
        child = point_mutate(genotype, rate_fn, SCOPE_ALL, rng)
        if config.active_min <= active_count(child) <= config.active_max:
            return child
    return child


def neutral_mutation(
    genotype: Genotype, cfg: EvolutionConfig, generation: int, rng: RandomStream
) -> Genotype:
    """Point mutation restricted to inactive genes; the phenotype is untouched."""
    rate_fn = lambda fn: effective_rate(cfg, generation, fn)
    return point_mutate(genotype, rate_fn, SCOPE_INACTIVE, rng)


@dataclass(frozen=True)
class OffspringEval:
    phenotype: str
    fitness: float
    seconds: float


@dataclass(frozen=True)
class GenerationReport:
    generation: int
    parent_fitness: float
    best_offspring_fitness: float
    neutral_step: bool
    selected_index: Optional[int]
    offspring: tuple[OffspringEval, ...]

    def record(self) -> dict:
        """The persistent per-generation history entry."""
        return {
            "generation": self.generation,
            "parent_fitness": self.parent_fitness,
            "best_offspring_fitness": self.best_offspring_fitness,
            "neutral_step": self.neutral_step,
        }


@dataclass
class EvolutionResult:
    best: Genotype
    best_fitness: float
    history: list[dict]
    state: dict


class EvolutionRun:
    """Stepwise 1+lambda run whose full state round-trips through JSON.

    The only random stream is `self.rng`; the evaluator derives its own
    randomness from phenotype identity, so restoring the stream state
    (plus parent and history) resumes a run bit-exactly.
    """

    def __init__(
        self,
        cfg: EvolutionConfig,
        grid: GridConfig,
        catalog: CatalogConfig,
        evaluator: Callable[[Genotype], float],
        observer: Optional[Callable[[GenerationReport], None]] = None,
    ):
        self.cfg = cfg
        self.grid = grid
        self.catalog = catalog
        self.evaluator = evaluator
        self.observer = observer
        self.rng: RandomStream = np.random.default_rng([cfg.seed, 0])
        self.parent: Optional[Genotype] = None
        self.parent_fitness: float = 0.0
        self.history: list[dict] = []
        self.initial_eval: Optional[OffspringEval] = None

    @property
    def generation(self) -> int:
        return len(self.history)

    @property
    def started(self) -> bool:
        return self.parent is not None

    @property
    def finished(self) -> bool:
        return self.started and self.generation >= self.cfg.max_generation

    def _evaluate(self, genotype: Genotype) -> float:
        try:
            fitness = float(self.evaluator(genotype))
        except Exception as exc:  # serialize the culprit for post-mortem
            raise EvaluationFailure(genotype, exc) from exc
        if not 0.0 <= fitness <= 1.0:
            raise EvaluationFailure(genotype, ValueError(f"fitness {fitness} outside [0, 1]"))
        return fitness

    def initialize(self) -> None:
        """Create and evaluate the random starting parent."""
        self.parent = random_genotype(self.grid, self.catalog, self.rng)
        self._note_generation(0)
        t0 = time.perf_counter()
        self.parent_fitness = self._evaluate(self.parent)
        self.initial_eval = OffspringEval(
            phenotype_hash(self.parent), self.parent_fitness, time.perf_counter() - t0
        )

    def _note_generation(self, generation: int) -> None:
        note = getattr(self.evaluator, "note_generation", None)
        if note is not None:
            note(generation)

    def step(self) -> GenerationReport:
        """Run one generation: lambda offspring, selection or neutral drift."""
        assert self.parent is not None, "initialize() must run first"
        gen = self.generation
        self._note_generation(gen)
        offspring = [
            forced_mutation(self.parent, self.cfg, gen, self.rng) for _ in range(self.cfg.lam)
        ]
        many = getattr(self.evaluator, "evaluate_many", None)
        started = time.perf_counter()
        if many is not None:
            try:
                raw = [float(f) for f in many(offspring)]
            except Exception as exc:
                raise EvaluationFailure(offspring[0], exc) from exc
            per_child = (time.perf_counter() - started) / len(offspring)
            evals = [
                OffspringEval(phenotype_hash(child), f, per_child)
                for child, f in zip(offspring, raw)
            ]
        else:
            evals = []
            for child in offspring:
                t0 = time.perf_counter()
                fitness = self._evaluate(child)
                evals.append(OffspringEval(phenotype_hash(child), fitness, time.perf_counter() - t0))
        best_offspring = max(e.fitness for e in evals)
        if best_offspring < self.parent_fitness:
            self.parent = neutral_mutation(self.parent, self.cfg, gen, self.rng)
            neutral, selected = True, None
        else:
            selected = min(i for i, e in enumerate(evals) if e.fitness == best_offspring)
            self.parent = offspring[selected]
            self.parent_fitness = evals[selected].fitness
            neutral = False
        report = GenerationReport(
            generation=gen,
            parent_fitness=self.parent_fitness,
            best_offspring_fitness=best_offspring,
            neutral_step=neutral,
            selected_index=selected,
            offspring=tuple(evals),
        )
        self.history.append(report.record())
        if self.observer is not None:
            self.observer(report)
        return report

    def run(self, stop_after: Optional[int] = None) -> None:
        if not self.started:
            self.initialize()
        limit = self.cfg.max_generation if stop_after is None else min(stop_after, self.cfg.max_generation)
        while self.generation < limit:
            self.step()

    def state_dict(self) -> dict:
        assert self.parent is not None
        return {
            "generation": self.generation,
            "parent": self.parent.to_json(),
            "parent_fitness": self.parent_fitness,
            "rng_state": self.rng.bit_generator.state,
            "history": list(self.history),
        }

    def restore(self, state: dict) -> None:
        self.parent = Genotype.from_json(state["parent"])
        self.parent_fitness = float(state["parent_fitness"])
        self.rng.bit_generator.state = state["rng_state"]
        self.history = list(state["history"])

    def result(self) -> EvolutionResult:
        assert self.parent is not None
        return EvolutionResult(
            best=self.parent,
            best_fitness=self.parent_fitness,
            history=list(self.history),
            state=self.state_dict(),
        )


def evolve(
    cfg: EvolutionConfig,
    grid: GridConfig,
    catalog: CatalogConfig,
    evaluator: Callable[[Genotype], float],
    observer: Optional[Callable[[GenerationReport], None]] = None,
) -> EvolutionResult:
    """Run the full 1+lambda loop and return the best genotype found.

    Parent fitness is non-decreasing, so the final parent is the
    best-ever individual.
    """
    run = EvolutionRun(cfg, grid, catalog, evaluator, observer)
    run.run()
    return run.result()
