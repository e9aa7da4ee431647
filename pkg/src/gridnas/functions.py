"""Node function catalog: arity, parameter domains and shape rules.

Every architecture is assembled from seven node functions. Each function
maps rank-3 activations (batch, length, dim) to rank-3 activations and
never touches the batch or length axes; only the feature dimension moves.
Ablation presets restrict the catalog to study the contribution of
individual functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Union

from .errors import ConfigError, ShapeError


class Fn(str, Enum):
    CONV = "conv"
    ATTE = "atte"
    LINEAR = "linear"
    SUM = "sum"
    RELU = "relu"
    LNORM = "lnorm"
    GLU = "glu"

    def __str__(self) -> str:  # keeps JSON and DOT output compact
        return self.value


# Canonical ordering used for sampling and serialization.
FULL_SET: tuple[Fn, ...] = (
    Fn.CONV,
    Fn.ATTE,
    Fn.LINEAR,
    Fn.SUM,
    Fn.RELU,
    Fn.LNORM,
    Fn.GLU,
)

# A parameter is one of: (channel, kernel) for conv, an int for atte/linear,
# or None for the parameterless functions.
ParamValue = Union[int, tuple[int, int], None]

CONV_CHANNELS = (16, 32)
CONV_KERNELS = (1, 3, 5)
ATTE_HEADS = (4, 8, 16)
LINEAR_CHANNELS = (32, 128)

_PARAM_DOMAINS: dict[Fn, tuple[ParamValue, ...]] = {
    Fn.CONV: tuple((c, k) for c in CONV_CHANNELS for k in CONV_KERNELS),
    Fn.ATTE: ATTE_HEADS,
    Fn.LINEAR: LINEAR_CHANNELS,
    Fn.SUM: (None,),
    Fn.RELU: (None,),
    Fn.LNORM: (None,),
    Fn.GLU: (None,),
}


class TensorShape(NamedTuple):
    """(batch, length, dim) triple governing all shape inference."""

    batch: int
    length: int
    dim: int

    def validate(self) -> None:
        if min(self) < 1:
            raise ShapeError(f"all shape components must be >= 1, got {tuple(self)}")


def arity(fn: Fn) -> int:
    return 2 if fn is Fn.SUM else 1


def parameter_domain(fn: Fn) -> tuple[ParamValue, ...]:
    return _PARAM_DOMAINS[fn]


def infer_shape(
    fn: Fn,
    param: ParamValue,
    in1: TensorShape,
    in2: Optional[TensorShape] = None,
) -> TensorShape:
    """Output shape of applying `fn` with `param` to the given input shape(s).

    Raises ShapeError when the function cannot be applied: a two-input sum
    with mismatched batch/length, or a gated split on a single feature.
    """
    if (in2 is not None) != (arity(fn) == 2):
        raise ShapeError(f"{fn} takes {arity(fn)} input(s)")
    in1.validate()
    if fn is Fn.SUM:
        assert in2 is not None
        in2.validate()
        if in1.batch != in2.batch or in1.length != in2.length:
            raise ShapeError(
                f"sum inputs must agree on batch and length: {tuple(in1)} vs {tuple(in2)}"
            )
        return TensorShape(in1.batch, in1.length, max(in1.dim, in2.dim))
    if fn is Fn.CONV:
        channel, _kernel = param  # type: ignore[misc]
        return TensorShape(in1.batch, in1.length, channel)
    if fn is Fn.LINEAR:
        return TensorShape(in1.batch, in1.length, int(param))  # type: ignore[arg-type]
    if fn is Fn.GLU:
        # Gate needs two halves to split; a single feature cannot be gated.
        if in1.dim < 2:
            raise ShapeError("glu requires feature dim >= 2")
        return TensorShape(in1.batch, in1.length, math.ceil(in1.dim / 2))
    # atte / relu / lnorm keep the shape
    return in1


def describe(fn: Fn, param: ParamValue) -> str:
    """Human-readable node label, e.g. 'Conv(ch=32,k=1)'."""
    if fn is Fn.CONV:
        c, k = param  # type: ignore[misc]
        return f"Conv(ch={c},k={k})"
    if fn is Fn.ATTE:
        return f"Atte(heads={param})"
    if fn is Fn.LINEAR:
        return f"Linear(ch={param})"
    return fn.value.capitalize() if fn is not Fn.RELU else "ReLU"


@dataclass(frozen=True)
class CatalogConfig:
    """The set of node functions available to the search."""

    enabled: tuple[Fn, ...] = FULL_SET

    def __post_init__(self):
        if not self.enabled:
            raise ConfigError("catalog must enable at least one function")
        seen = set()
        for fn in self.enabled:
            if fn in seen:
                raise ConfigError(f"duplicate function in catalog: {fn}")
            seen.add(fn)

    def __contains__(self, fn: Fn) -> bool:
        return fn in self.enabled

    def names(self) -> list[str]:
        return [fn.value for fn in self.enabled]

    @classmethod
    def from_names(cls, names: list[str]) -> "CatalogConfig":
        try:
            wanted = {Fn(n.lower()) for n in names}
        except ValueError as exc:
            raise ConfigError(f"unknown function name: {exc}") from None
        return cls(tuple(fn for fn in FULL_SET if fn in wanted))

    @classmethod
    def preset(cls, name: str) -> "CatalogConfig":
        try:
            removed = ABLATION_PRESETS[name]
        except KeyError:
            raise ConfigError(
                f"unknown catalog preset {name!r}; choose from {sorted(ABLATION_PRESETS)}"
            ) from None
        return cls(tuple(fn for fn in FULL_SET if fn not in removed))


ABLATION_PRESETS: dict[str, frozenset[Fn]] = {
    "full": frozenset(),
    "s_no_conv": frozenset({Fn.CONV}),
    "s_no_atte": frozenset({Fn.ATTE}),
    "s_no_conv_atte": frozenset({Fn.CONV, Fn.ATTE}),
}
