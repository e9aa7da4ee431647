"""Parameter bookkeeping and graph execution on top of the autodiff engine.

Parameter shapes are fully determined by the decoded graph and the data
configuration; initialization is a seeded Glorot-uniform draw so a run
is reproducible from its seed alone. The classifier head mean-pools the
output node's activation over the sequence and maps it to class logits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decoder import ArchitectureGraph, output_shape
from .functions import Fn
from . import tensor as T

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class ParameterStore:
    """Named parameters plus Adam moment buffers, all float64."""

    tensors: dict[str, T.Tensor] = field(default_factory=dict)
    adam_m: dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, name: str, values: np.ndarray) -> T.Tensor:
        t = T.Tensor(values)
        self.tensors[name] = t
        self.adam_m[name] = np.zeros_like(t.data)
        self.adam_v[name] = np.zeros_like(t.data)
        return t

    def zero_grads(self) -> None:
        for t in self.tensors.values():
            t.grad = None

    def grads(self) -> dict[str, np.ndarray]:
        """Gradients by name; parameters untouched by the tape report zeros."""
        return {
            name: (t.grad if t.grad is not None else np.zeros_like(t.data))
            for name, t in self.tensors.items()
        }


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int):
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def build_parameters(
    graph: ArchitectureGraph,
    vocab_size: int,
    num_classes: int,
    rng: np.random.Generator,
) -> ParameterStore:
    """Allocate and initialize every parameter the graph needs.

    Creation order is fixed (embedding, nodes ascending, classifier) so a
    given rng state always produces the same initialization.
    """
    store = ParameterStore()
    d_in = graph.input_shape.dim
    store.add("embedding.table", _glorot(rng, (vocab_size, d_in), vocab_size, d_in))
    shapes = {0: graph.input_shape}
    for node in graph.nodes:
        shapes[node.id] = node.out_shape
        d = shapes[node.inputs[0]].dim
        prefix = f"node{node.id}"
        if node.function is Fn.CONV:
            channels, kernel = node.param
            store.add(
                f"{prefix}.kernel",
                _glorot(rng, (kernel, d, channels), kernel * d, kernel * channels),
            )
            store.add(f"{prefix}.bias", np.zeros(channels))
        elif node.function is Fn.ATTE:
            proj = T.attention_param_dims(d, node.param)
            for role in ("wq", "wk", "wv"):
                store.add(f"{prefix}.{role}", _glorot(rng, (d, proj), d, proj))
            store.add(f"{prefix}.wo", _glorot(rng, (proj, d), proj, d))
        elif node.function is Fn.LINEAR:
            channels = node.param
            store.add(f"{prefix}.weight", _glorot(rng, (d, channels), d, channels))
            store.add(f"{prefix}.bias", np.zeros(channels))
        elif node.function is Fn.LNORM:
            width = node.out_shape.dim
            store.add(f"{prefix}.gain", np.ones(width))
            store.add(f"{prefix}.bias", np.zeros(width))
        # sum / relu / glu carry no parameters
    d_out = output_shape(graph).dim
    store.add("classifier.weight", _glorot(rng, (d_out, num_classes), d_out, num_classes))
    store.add("classifier.bias", np.zeros(num_classes))
    return store


def forward(graph: ArchitectureGraph, store: ParameterStore, token_batch: np.ndarray) -> T.Tensor:
    """Token ids (b, l) -> class logits (b, num_classes)."""
    acts: dict[int, T.Tensor] = {0: T.embedding(store.tensors["embedding.table"], token_batch)}
    for node in graph.nodes:
        x = acts[node.inputs[0]]
        prefix = f"node{node.id}"
        if node.function is Fn.CONV:
            y = T.conv1d_same(x, store.tensors[f"{prefix}.kernel"], store.tensors[f"{prefix}.bias"])
        elif node.function is Fn.ATTE:
            y = T.attention(
                x,
                store.tensors[f"{prefix}.wq"],
                store.tensors[f"{prefix}.wk"],
                store.tensors[f"{prefix}.wv"],
                store.tensors[f"{prefix}.wo"],
                node.param,
            )
        elif node.function is Fn.LINEAR:
            y = T.add(T.matmul(x, store.tensors[f"{prefix}.weight"]), store.tensors[f"{prefix}.bias"])
        elif node.function is Fn.SUM:
            y = T.padded_sum(x, acts[node.inputs[1]])
        elif node.function is Fn.RELU:
            y = T.relu(x)
        elif node.function is Fn.LNORM:
            y = T.layer_norm(x, store.tensors[f"{prefix}.gain"], store.tensors[f"{prefix}.bias"])
        elif node.function is Fn.GLU:
            y = T.glu(x)
        else:  # pragma: no cover
            raise AssertionError(f"unhandled function {node.function}")
        acts[node.id] = y
    pooled = T.mean_positions(acts[graph.output_node])
    return T.add(T.matmul(pooled, store.tensors["classifier.weight"]), store.tensors["classifier.bias"])


def loss_and_grad(
    graph: ArchitectureGraph,
    store: ParameterStore,
    token_batch: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy plus gradients for every parameter."""
    store.zero_grads()
    logits = forward(graph, store, token_batch)
    loss = T.cross_entropy(logits, labels)
    loss.backward()
    return float(loss.data), store.grads()


def predict(graph: ArchitectureGraph, store: ParameterStore, token_batch: np.ndarray) -> np.ndarray:
    logits = forward(graph, store, token_batch)
    return logits.data.argmax(axis=-1)


def adam_step(
    store: ParameterStore,
    grads: dict[str, np.ndarray],
    lr: float,
    t: int,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> None:
    """Standard bias-corrected Adam update, in place. `t` is 1-based."""
    assert t >= 1
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for name, tensor in store.tensors.items():
        g = grads[name]
        m = store.adam_m[name]
        v = store.adam_v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        tensor.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
