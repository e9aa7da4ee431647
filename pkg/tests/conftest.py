import numpy as np
import pytest

from gridnas import CatalogConfig, Fn, Gene, Genotype, GridConfig
from gridnas.config import desk_grid, paper_grid


@pytest.fixture
def catalog():
    return CatalogConfig()


@pytest.fixture
def paper_grid_cfg():
    return paper_grid()


@pytest.fixture
def desk_grid_cfg():
    return desk_grid()


def rng(seed=0):
    return np.random.default_rng(seed)


def filler_grid(config: GridConfig) -> list[Gene]:
    """A grid of valid do-nothing genes (relu wired to the input)."""
    return [Gene(Fn.RELU, 0, 0, None) for _ in range(config.node_count)]


def chain_genotype(config: GridConfig, spec: list[tuple[int, Gene]], output: int) -> Genotype:
    """Genotype with the given genes placed at explicit indices, filler elsewhere."""
    genes = filler_grid(config)
    for idx, gene in spec:
        genes[idx - 1] = gene
    return Genotype(config=config, genes=tuple(genes), output=output)


def reference_chain_genotype() -> Genotype:
    """The searched 11-node architecture used as the decoder's shape fixture.

    One wiring consistent with the published dimension chain on the full
    5x20 grid: two parallel branches (sum->conv, linear->lnorm) merged by
    a sum, a self-sum, then atte/lnorm/atte/conv/conv to the output.
    """
    grid = paper_grid()
    spec = [
        (1, Gene(Fn.SUM, 0, 0, None)),          # input twice -> 300
        (6, Gene(Fn.LINEAR, 0, 0, 128)),        # -> 128
        (11, Gene(Fn.CONV, 1, 0, (32, 1))),     # -> 32
        (16, Gene(Fn.LNORM, 6, 0, None)),       # -> 128
        (21, Gene(Fn.SUM, 11, 16, None)),       # merge -> 128
        (26, Gene(Fn.SUM, 21, 21, None)),       # same input twice -> 128
        (31, Gene(Fn.ATTE, 26, 0, 16)),         # -> 128
        (36, Gene(Fn.LNORM, 31, 0, None)),      # -> 128
        (41, Gene(Fn.ATTE, 36, 0, 4)),          # -> 128
        (46, Gene(Fn.CONV, 41, 0, (32, 3))),    # -> 32
        (51, Gene(Fn.CONV, 46, 0, (16, 5))),    # -> 16
    ]
    return chain_genotype(grid, spec, output=51)


REFERENCE_CHAIN_SHAPES = [
    ("sum", (8, 400, 300)),
    ("linear", (8, 400, 128)),
    ("conv", (8, 400, 32)),
    ("lnorm", (8, 400, 128)),
    ("sum", (8, 400, 128)),
    ("sum", (8, 400, 128)),
    ("atte", (8, 400, 128)),
    ("lnorm", (8, 400, 128)),
    ("atte", (8, 400, 128)),
    ("conv", (8, 400, 32)),
    ("conv", (8, 400, 16)),
]
