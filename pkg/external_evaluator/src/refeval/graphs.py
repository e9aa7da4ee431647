"""Torch model assembled from a wire-format graph description.

Operator semantics mirror the engine's catalog: 1-D same-padded
convolution over the sequence, clamped-head self-attention, per-position
linear maps, tail-zero-padded sums, split-half gating, and layer norm
over the feature axis. The classifier head mean-pools the output node
over the sequence and maps it to class logits.
"""

from __future__ import annotations

import math

import torch
from torch import nn


class ClampedAttention(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = min(heads, dim)
        self.dh = dim // self.heads
        proj = self.heads * self.dh
        self.wq = nn.Linear(dim, proj, bias=False)
        self.wk = nn.Linear(dim, proj, bias=False)
        self.wv = nn.Linear(dim, proj, bias=False)
        self.wo = nn.Linear(proj, dim, bias=False)

    def forward(self, x):
        b, l, _ = x.shape

        def split(t):
            return t.view(b, l, self.heads, self.dh).transpose(1, 2)

        q, k, v = split(self.wq(x)), split(self.wk(x)), split(self.wv(x))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.dh)
        ctx = torch.softmax(scores, dim=-1) @ v
        return self.wo(ctx.transpose(1, 2).reshape(b, l, -1))


class SeqConv(nn.Module):
    def __init__(self, dim: int, channels: int, kernel: int):
        super().__init__()
        self.conv = nn.Conv1d(dim, channels, kernel, padding=(kernel - 1) // 2)

    def forward(self, x):
        return self.conv(x.transpose(1, 2)).transpose(1, 2)


class SplitGate(nn.Module):
    def forward(self, x):
        d = x.shape[-1]
        if d % 2:
            x = nn.functional.pad(x, (0, 1))
        a, b = x.chunk(2, dim=-1)
        return a * torch.sigmoid(b)


def padded_sum(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    da, db = a.shape[-1], b.shape[-1]
    if da < db:
        a = nn.functional.pad(a, (0, db - da))
    elif db < da:
        b = nn.functional.pad(b, (0, da - db))
    return a + b


class GraphClassifier(nn.Module):
    """Embedding -> graph nodes -> mean pool -> class logits."""

    def __init__(self, graph: dict, vocab_size: int, num_classes: int):
        super().__init__()
        _, _, d_in = graph["input_shape"]
        self.graph = graph
        self.embedding = nn.Embedding(vocab_size, d_in)
        self.ops = nn.ModuleDict()
        dims = {0: d_in}
        for node in graph["nodes"]:
            pos, fn, param = node["id"], node["fn"], node["param"]
            d = dims[node["inputs"][0]]
            if fn == "conv":
                self.ops[str(pos)] = SeqConv(d, param[0], param[1])
            elif fn == "atte":
                self.ops[str(pos)] = ClampedAttention(d, param)
            elif fn == "linear":
                self.ops[str(pos)] = nn.Linear(d, param)
            elif fn == "lnorm":
                self.ops[str(pos)] = nn.LayerNorm(d)
            elif fn == "glu":
                self.ops[str(pos)] = SplitGate()
            dims[pos] = node["shape"][2]
        out_dim = dims[graph["output"]]
        self.head = nn.Linear(out_dim, num_classes)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        acts = {0: self.embedding(tokens)}
        for node in self.graph["nodes"]:
            pos, fn = node["id"], node["fn"]
            x = acts[node["inputs"][0]]
            if fn == "sum":
                y = padded_sum(x, acts[node["inputs"][1]])
            elif fn == "relu":
                y = torch.relu(x)
            else:
                y = self.ops[str(pos)](x)
            acts[pos] = y
        pooled = acts[self.graph["output"]].mean(dim=1)
        return self.head(pooled)
