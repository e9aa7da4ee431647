"""Exception types shared across the engine."""


class GridnasError(Exception):
    """Base class for all engine errors."""


class ConfigError(GridnasError):
    """A configuration value violates its invariants (CLI exit code 2)."""


class InitializationError(GridnasError):
    """Random initialization could not satisfy the active-node bound."""


class ShapeError(GridnasError):
    """A node function cannot be applied to the given tensor shapes."""


class DecodeError(GridnasError):
    """A genotype cannot be decoded into a trainable graph (CLI exit code 4)."""


class CatalogError(GridnasError):
    """A genotype references a function outside the enabled catalog."""


class CheckpointError(GridnasError):
    """A checkpoint file is corrupted or incompatible (CLI exit code 3)."""


class EvaluationFailure(GridnasError):
    """The fitness evaluator raised; carries the offending genotype for post-mortem."""

    def __init__(self, genotype, cause):
        super().__init__(f"fitness evaluation failed: {cause}")
        self.genotype = genotype
        self.cause = cause
