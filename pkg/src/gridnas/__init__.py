"""Evolutionary neural architecture search over a Cartesian grid encoding."""

__version__ = "0.1.0"

from .functions import CatalogConfig, Fn, TensorShape, arity, infer_shape, parameter_domain
from .genome import (
    Gene,
    Genotype,
    GridConfig,
    active_count,
    active_nodes,
    phenotype_hash,
    random_genotype,
    valid_sources,
)
from .decoder import ArchitectureGraph, decode, graph_digest, to_dot, validate
from .evolution import (
    EvolutionConfig,
    EvolutionResult,
    EvolutionRun,
    effective_rate,
    evolve,
    forced_mutation,
    neutral_mutation,
    point_mutate,
)
from .data import DataConfig, synth_dataset
from .evaluator import FitnessEvaluator, evaluate

__all__ = [
    "ArchitectureGraph",
    "CatalogConfig",
    "DataConfig",
    "EvolutionConfig",
    "EvolutionResult",
    "EvolutionRun",
    "Fn",
    "FitnessEvaluator",
    "Gene",
    "Genotype",
    "GridConfig",
    "TensorShape",
    "active_count",
    "active_nodes",
    "arity",
    "decode",
    "effective_rate",
    "evaluate",
    "evolve",
    "forced_mutation",
    "graph_digest",
    "infer_shape",
    "neutral_mutation",
    "parameter_domain",
    "phenotype_hash",
    "point_mutate",
    "random_genotype",
    "synth_dataset",
    "to_dot",
    "valid_sources",
    "validate",
]
