"""Train a requested graph and report test accuracy as its fitness.

Reproducibility caveat: results are deterministic for a given request
seed to the extent the underlying stack allows: torch CPU kernels are
deterministic, but other devices or torch versions may differ in the
last bits.
"""

from __future__ import annotations

import numpy as np
import torch

from .datasets import load_dataset
from .glove import load_glove
from .graphs import GraphClassifier


def train_and_score(request: dict, datasets_dir: str | None = None, device: str = "cpu") -> float:
    data = request["data"]
    seed = int(data["seed"])
    torch.manual_seed(seed)
    dataset = load_dataset(
        datasets_dir, data["dataset_name"], int(data["max_len"]), int(data["num_classes"]), seed
    )
    model = GraphClassifier(request["graph"], len(dataset.vocab), int(data["num_classes"]))

    embeddings = data.get("embeddings", "none")
    if embeddings != "none":
        table, _ = load_glove(
            embeddings, dataset.vocab, int(data["embed_dim"]), np.random.default_rng([seed, 13])
        )
        with torch.no_grad():
            model.embedding.weight.copy_(torch.as_tensor(table, dtype=model.embedding.weight.dtype))

    dev = torch.device(device)
    model.to(dev)
    train_x = torch.as_tensor(dataset.train_x, device=dev)
    train_y = torch.as_tensor(dataset.train_y, device=dev)
    test_x = torch.as_tensor(dataset.test_x, device=dev)
    test_y = torch.as_tensor(dataset.test_y, device=dev)

    optimizer = torch.optim.Adam(model.parameters(), lr=float(data["lr"]))
    loss_fn = torch.nn.CrossEntropyLoss()
    batch = 8
    order_rng = np.random.default_rng([seed, 17])
    model.train()
    for _ in range(int(data["epochs"])):
        order = order_rng.permutation(len(train_x))
        for lo in range(0, len(order), batch):
            idx = torch.as_tensor(order[lo : lo + batch], device=dev)
            optimizer.zero_grad()
            loss = loss_fn(model(train_x[idx]), train_y[idx])
            if not torch.isfinite(loss):
                return 0.0
            loss.backward()
            optimizer.step()

    model.eval()
    with torch.no_grad():
        correct = 0
        for lo in range(0, len(test_x), batch):
            logits = model(test_x[lo : lo + batch])
            correct += int((logits.argmax(dim=-1) == test_y[lo : lo + batch]).sum())
    return correct / len(test_y)
