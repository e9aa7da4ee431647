"""Minimal reverse-mode autodiff engine over rank-3 activations.

Just enough machinery to train any decoded architecture at desk scale:
double-precision numpy arrays, a tape built by operator closures, and
the seven node operators plus embedding, mean pooling, a classifier
head, softmax cross-entropy and Adam.

Composite operators (attention, gated split) are assembled from the
primitives below, so their gradients are correct by composition; the
fused primitives (convolution, layer norm, cross-entropy) carry
hand-derived backward rules that the finite-difference suite checks.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .decoder import ArchitectureGraph
from .errors import ShapeError
from .functions import Fn

LNORM_EPS = 1e-12


class Tensor:
    """A node in the autodiff tape."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self._parents = tuple(parents)
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def backward(self) -> None:
        """Accumulate gradients of this (scalar) tensor into the whole tape."""
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _accum(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    squeeze = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if squeeze:
        g = g.sum(axis=squeeze, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data, (a, b))

    def backward(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    out._backward = backward
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data, (a, b))

    def backward(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    out._backward = backward
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data * c, (a,))

    def backward(g):
        _accum(a, g * c)

    out._backward = backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(np.matmul(a.data, b.data), (a, b))

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        _accum(a, _unbroadcast(ga, a.data.shape))
        _accum(b, _unbroadcast(gb, b.data.shape))

    out._backward = backward
    return out


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0.0), (a,))

    def backward(g):
        _accum(a, g * (a.data > 0.0))

    out._backward = backward
    return out


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(s, (a,))

    def backward(g):
        _accum(a, g * s * (1.0 - s))

    out._backward = backward
    return out


def softmax_last(a: Tensor) -> Tensor:
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(s, (a,))

    def backward(g):
        _accum(a, (g - (g * s).sum(axis=-1, keepdims=True)) * s)

    out._backward = backward
    return out


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = Tensor(a.data.reshape(shape), (a,))

    def backward(g):
        _accum(a, g.reshape(a.data.shape))

    out._backward = backward
    return out


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    out = Tensor(a.data.transpose(axes), (a,))
    inverse = tuple(np.argsort(axes))

    def backward(g):
        _accum(a, g.transpose(inverse))

    out._backward = backward
    return out


def pad_last(a: Tensor, count: int) -> Tensor:
    """Zero-pad the feature axis at its end by `count` entries."""
    width = [(0, 0)] * (a.data.ndim - 1) + [(0, count)]
    out = Tensor(np.pad(a.data, width), (a,))
    d = a.data.shape[-1]

    def backward(g):
        _accum(a, g[..., :d])

    out._backward = backward
    return out


def slice_last(a: Tensor, start: int, stop: int) -> Tensor:
    out = Tensor(a.data[..., start:stop], (a,))

    def backward(g):
        full = np.zeros_like(a.data)
        full[..., start:stop] = g
        _accum(a, full)

    out._backward = backward
    return out


def mean_positions(a: Tensor) -> Tensor:
    """Mean-pool over the sequence axis: (b, l, d) -> (b, d)."""
    l = a.data.shape[1]
    out = Tensor(a.data.mean(axis=1), (a,))

    def backward(g):
        _accum(a, np.repeat(g[:, None, :], l, axis=1) / l)

    out._backward = backward
    return out


def embedding(table: Tensor, token_ids: np.ndarray) -> Tensor:
    """Lookup rows of `table` for an integer (b, l) batch."""
    ids = np.asarray(token_ids)
    out = Tensor(table.data[ids], (table,))

    def backward(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))

    out._backward = backward
    return out


def conv1d_same(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """1-D convolution over the sequence with symmetric zero padding.

    x: (b, l, d); kernel: (K, d, C) with K odd; bias: (C,). Length is
    preserved: positions near the edges see zero context.
    """
    b, l, d = x.data.shape
    K, kd, C = kernel.data.shape
    if kd != d:
        raise ShapeError(f"conv kernel expects dim {kd}, input has {d}")
    p = (K - 1) // 2
    xpad = np.zeros((b, l + 2 * p, d))
    xpad[:, p : p + l, :] = x.data
    result = np.zeros((b, l, C))
    for k in range(K):
        result += xpad[:, k : k + l, :] @ kernel.data[k]
    result += bias.data
    out = Tensor(result, (x, kernel, bias))

    def backward(g):
        _accum(bias, g.sum(axis=(0, 1)))
        gk = np.zeros_like(kernel.data)
        gxpad = np.zeros_like(xpad)
        for k in range(K):
            gk[k] = np.einsum("bld,blc->dc", xpad[:, k : k + l, :], g)
            gxpad[:, k : k + l, :] += g @ kernel.data[k].T
        _accum(kernel, gk)
        _accum(x, gxpad[:, p : p + l, :])

    out._backward = backward
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    """Normalize each (batch, position) over the feature axis, then affine."""
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LNORM_EPS)
    xhat = xc * inv
    out = Tensor(xhat * gain.data + bias.data, (x, gain, bias))
    n = x.data.shape[-1]

    def backward(g):
        _accum(gain, (g * xhat).sum(axis=tuple(range(g.ndim - 1))))
        _accum(bias, g.sum(axis=tuple(range(g.ndim - 1))))
        gh = g * gain.data
        gx = inv * (
            gh
            - gh.mean(axis=-1, keepdims=True)
            - xhat * (gh * xhat).mean(axis=-1, keepdims=True)
        )
        _accum(x, gx)

    out._backward = backward
    return out


def glu(x: Tensor) -> Tensor:
    """Gated split: pad to even width, gate the first half by the second."""
    d = x.data.shape[-1]
    if d < 2:
        raise ShapeError("glu requires feature dim >= 2")
    padded = pad_last(x, 1) if d % 2 else x
    half = math.ceil(d / 2)
    a = slice_last(padded, 0, half)
    b = slice_last(padded, half, 2 * half)
    return mul(a, sigmoid(b))


def padded_sum(a: Tensor, b: Tensor) -> Tensor:
    """Element-wise sum after zero-padding the narrower feature axis at its end."""
    da, db = a.data.shape[-1], b.data.shape[-1]
    if da < db:
        a = pad_last(a, db - da)
    elif db < da:
        b = pad_last(b, da - db)
    return add(a, b)


def attention(
    x: Tensor, wq: Tensor, wk: Tensor, wv: Tensor, wo: Tensor, heads: int
) -> Tensor:
    """Multi-head scaled dot-product self-attention, no positional terms.

    Head count is clamped to the feature dim; per-head width is
    d // clamped_heads, so every (dim, heads) pair stays decodable.
    """
    b, l, d = x.data.shape
    h = min(heads, d)
    dh = d // h

    def split(t: Tensor) -> Tensor:
        return transpose(reshape(t, (b, l, h, dh)), (0, 2, 1, 3))

    q = split(matmul(x, wq))
    k = split(matmul(x, wk))
    v = split(matmul(x, wv))
    scores = scale(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(dh))
    weights = softmax_last(scores)
    ctx = matmul(weights, v)
    merged = reshape(transpose(ctx, (0, 2, 1, 3)), (b, l, h * dh))
    return matmul(merged, wo)


def attention_param_dims(dim: int, heads: int) -> int:
    """Width of the fused projection for a (dim, heads) attention node."""
    h = min(heads, dim)
    return h * (dim // h)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean softmax cross-entropy over the batch, numerically guarded."""
    y = np.asarray(labels)
    z = logits.data - logits.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - lse
    n = y.shape[0]
    loss = -logp[np.arange(n), y].mean()
    out = Tensor(loss, (logits,))
    probs = np.exp(logp)

    def backward(g):
        dz = probs.copy()
        dz[np.arange(n), y] -= 1.0
        _accum(logits, g * dz / n)

    out._backward = backward
    return out
