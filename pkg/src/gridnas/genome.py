"""Grid genotype representation and the operations defined on it.

A genotype is a fixed r x c grid of genes plus one output connection.
Node addressing: index 0 is the graph input; the function node at row
i in [1..r], column j in [1..c] has index (j-1)*r + i. Connections may
only point to strictly earlier columns (bounded by `levels_back`), which
makes ascending index order a valid topological order by construction.

Genes that no backward path from the output reaches are *inactive*:
silent genetic material that mutation can rearrange without changing
the decoded architecture.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError, InitializationError
from .functions import CatalogConfig, Fn, FULL_SET, ParamValue, parameter_domain

RandomStream = np.random.Generator

INIT_RETRY_CAP = 10_000


@dataclass(frozen=True)
class GridConfig:
    rows: int
    cols: int
    levels_back: int
    input_count: int = 1
    output_count: int = 1
    active_min: int = 0
    active_max: Optional[int] = None
    inputs_always_reachable: bool = True

    def __post_init__(self):
        if self.active_max is None:
            object.__setattr__(self, "active_max", self.rows * self.cols)
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("grid must have at least one row and one column")
        if not 1 <= self.levels_back <= self.cols:
            raise ConfigError(
                f"levels_back must lie in [1, cols]: got {self.levels_back} for {self.cols} columns"
            )
        if self.input_count != 1 or self.output_count != 1:
            raise ConfigError("only single-input single-output grids are supported")
        if not 0 <= self.active_min <= self.active_max <= self.rows * self.cols:
            raise ConfigError(
                f"need 0 <= active_min <= active_max <= rows*cols, got "
                f"[{self.active_min}, {self.active_max}] on a {self.rows}x{self.cols} grid"
            )

    @property
    def node_count(self) -> int:
        return self.rows * self.cols

    def column_of(self, index: int) -> int:
        if not 1 <= index <= self.node_count:
            raise ConfigError(f"node index {index} outside grid")
        return (index - 1) // self.rows + 1

    def column_indices(self, column: int) -> range:
        start = (column - 1) * self.rows + 1
        return range(start, start + self.rows)

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "levels_back": self.levels_back,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "active_min": self.active_min,
            "active_max": self.active_max,
            "inputs_always_reachable": self.inputs_always_reachable,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridConfig":
        return cls(**data)


def valid_sources(config: GridConfig, column: int) -> tuple[int, ...]:
    """All node indices a gene in `column` may connect to, ascending.

    Covers the columns within `levels_back` of the gene's own column and,
    depending on configuration, the input node. Never contains a node of
    the same or a later column.
    """
    if not 1 <= column <= config.cols:
        raise ConfigError(f"column {column} outside [1, {config.cols}]")
    sources: list[int] = []
    if config.inputs_always_reachable or column <= config.levels_back:
        sources.append(0)
    first = max(1, column - config.levels_back)
    for col in range(first, column):
        sources.extend(config.column_indices(col))
    return tuple(sources)


@dataclass(frozen=True)
class Gene:
    function: Fn
    in1: int
    in2: int
    param: ParamValue

    def to_json(self) -> list:
        param = list(self.param) if isinstance(self.param, tuple) else self.param
        return [self.function.value, self.in1, self.in2, param]

    @classmethod
    def from_json(cls, data: list) -> "Gene":
        fn, in1, in2, param = data
        if isinstance(param, list):
            param = tuple(param)
        return cls(Fn(fn), int(in1), int(in2), param)


@dataclass(frozen=True)
class Genotype:
    """Immutable grid of genes plus output connection.

    `functions` records the catalog identity under which the genotype was
    created; mutation resamples functions from that same set.
    """

    config: GridConfig
    genes: tuple[Gene, ...]
    output: int
    functions: tuple[Fn, ...] = FULL_SET
    _fingerprint: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.genes) != self.config.node_count:
            raise ConfigError(
                f"expected {self.config.node_count} genes, got {len(self.genes)}"
            )
        if not 0 <= self.output <= self.config.node_count:
            raise ConfigError(f"output ref {self.output} outside grid")

    def gene(self, index: int) -> Gene:
        return self.genes[index - 1]

    @property
    def config_fingerprint(self) -> str:
        if self._fingerprint is None:
            payload = {"grid": self.config.to_json(), "functions": [f.value for f in self.functions]}
            digest = hashlib.sha256(
                json.dumps(payload, separators=(",", ":")).encode()
            ).hexdigest()
            object.__setattr__(self, "_fingerprint", digest)
        return self._fingerprint

    def to_json(self) -> dict:
        return {
            "config": {
                "grid": self.config.to_json(),
                "functions": [f.value for f in self.functions],
            },
            "grid": [g.to_json() for g in self.genes],
            "output": self.output,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Genotype":
        config = GridConfig.from_json(data["config"]["grid"])
        functions = tuple(Fn(n) for n in data["config"]["functions"])
        genes = tuple(Gene.from_json(g) for g in data["grid"])
        return cls(config=config, genes=genes, output=int(data["output"]), functions=functions)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "Genotype":
        return cls.from_json(json.loads(text))


def _sample_gene(
    config: GridConfig, catalog: tuple[Fn, ...], column: int, rng: RandomStream
) -> Gene:
    sources = valid_sources(config, column)
    fn = catalog[int(rng.integers(len(catalog)))]
    in1 = sources[int(rng.integers(len(sources)))]
    in2 = sources[int(rng.integers(len(sources)))]
    domain = parameter_domain(fn)
    param = domain[int(rng.integers(len(domain)))]
    return Gene(fn, in1, in2, param)


def random_genotype(
    config: GridConfig, catalog: CatalogConfig, rng: RandomStream
) -> Genotype:
    """Uniform random genotype whose active count satisfies the config bounds.

    Whole-genotype rejection sampling: a sample outside
    [active_min, active_max] is discarded and redrawn, keeping the
    distribution uniform over admissible genotypes.
    """
    enabled = tuple(catalog.enabled)
    for _ in range(INIT_RETRY_CAP):
        genes = tuple(
            _sample_gene(config, enabled, config.column_of(idx), rng)
            for idx in range(1, config.node_count + 1)
        )
        output = int(rng.integers(config.node_count + 1))
        genotype = Genotype(config=config, genes=genes, output=output, functions=enabled)
        if config.active_min <= active_count(genotype) <= config.active_max:
            return genotype
    raise InitializationError(
        f"no genotype with active count in [{config.active_min}, {config.active_max}] "
        f"found after {INIT_RETRY_CAP} attempts"
    )


def active_nodes(genotype: Genotype) -> list[int]:
    """Function nodes reachable backward from the output, ascending.

    A one-input function contributes only its first edge; a two-input
    function contributes both. Ascending index order is a topological
    order because every edge points to a strictly earlier column.
    """
    active: set[int] = set()
    stack = [genotype.output] if genotype.output > 0 else []
    while stack:
        ref = stack.pop()
        if ref in active:
            continue
        active.add(ref)
        gene = genotype.gene(ref)
        if gene.in1 > 0:
            stack.append(gene.in1)
        if gene.function is Fn.SUM and gene.in2 > 0:
            stack.append(gene.in2)
    return sorted(active)


def active_count(genotype: Genotype) -> int:
    return len(active_nodes(genotype))


def phenotype_hash(genotype: Genotype) -> str:
    """Digest of the active subgraph only, position-independent.

    Active node refs are remapped to their rank in the active list
    (input stays 0), so genotypes that differ only in inactive genes or
    in where the active chain sits on the grid hash identically.
    """
    active = active_nodes(genotype)
    remap = {0: 0}
    for pos, ref in enumerate(active, start=1):
        remap[ref] = pos
    payload: list = []
    for ref in active:
        gene = genotype.gene(ref)
        param = list(gene.param) if isinstance(gene.param, tuple) else gene.param
        entry = [gene.function.value, param, remap[gene.in1]]
        if gene.function is Fn.SUM:
            entry.append(remap[gene.in2])
        payload.append(entry)
    payload.append(remap[genotype.output])
    blob = json.dumps(payload, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
