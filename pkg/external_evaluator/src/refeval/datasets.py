"""Dataset loading for the reference evaluator.

`toy` is a built-in synthetic token-majority task so protocol and
training tests need no files. Anything else resolves to
<datasets_dir>/<name>/{train,test}.tsv with one `label<TAB>text` line
per example: whitespace tokenization, lowercased, vocabulary built from
training tokens with frequency >= 2.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

PAD, UNK = 0, 1
MIN_FREQ = 2


@dataclass
class LoadedDataset:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    vocab: list[str]  # index -> token; positions 0/1 are <pad>/<unk>


def toy_dataset(max_len: int, num_classes: int, seed: int) -> LoadedDataset:
    """Token-majority task over disjoint per-class vocab ranges."""
    rng = np.random.default_rng([seed, 7])
    vocab_size = 8 * num_classes + 2
    pool = vocab_size - 2

    def batch(n):
        xs = np.empty((n, max_len), dtype=np.int64)
        ys = np.empty(n, dtype=np.int64)
        per_class = pool // num_classes
        for i in range(n):
            label = int(rng.integers(num_classes))
            row = rng.integers(2, vocab_size, size=max_len)
            strong = rng.random(max_len) < 0.6
            lo = 2 + label * per_class
            row[strong] = rng.integers(lo, lo + per_class, size=int(strong.sum()))
            counts = [
                np.isin(row, np.arange(2 + c * per_class, 2 + (c + 1) * per_class)).sum()
                for c in range(num_classes)
            ]
            xs[i] = row
            ys[i] = int(np.argmax(counts))
        return xs, ys

    train_x, train_y = batch(160)
    test_x, test_y = batch(64)
    vocab = ["<pad>", "<unk>"] + [f"tok{i}" for i in range(pool)]
    return LoadedDataset(train_x, train_y, test_x, test_y, vocab)


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def _read_tsv(path: str) -> tuple[list[int], list[list[str]]]:
    labels, texts = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            label, _, text = line.partition("\t")
            labels.append(int(label))
            texts.append(tokenize(text))
    return labels, texts


def _encode(texts: list[list[str]], index: dict[str, int], max_len: int) -> np.ndarray:
    out = np.full((len(texts), max_len), PAD, dtype=np.int64)
    for i, tokens in enumerate(texts):
        for j, tok in enumerate(tokens[:max_len]):
            out[i, j] = index.get(tok, UNK)
    return out


def file_dataset(datasets_dir: str, name: str, max_len: int) -> LoadedDataset:
    base = os.path.join(datasets_dir, name)
    train_labels, train_texts = _read_tsv(os.path.join(base, "train.tsv"))
    test_labels, test_texts = _read_tsv(os.path.join(base, "test.tsv"))
    freq: dict[str, int] = {}
    for tokens in train_texts:
        for tok in tokens:
            freq[tok] = freq.get(tok, 0) + 1
    vocab = ["<pad>", "<unk>"] + sorted(t for t, n in freq.items() if n >= MIN_FREQ)
    index = {tok: i for i, tok in enumerate(vocab)}
    return LoadedDataset(
        train_x=_encode(train_texts, index, max_len),
        train_y=np.asarray(train_labels, dtype=np.int64),
        test_x=_encode(test_texts, index, max_len),
        test_y=np.asarray(test_labels, dtype=np.int64),
        vocab=vocab,
    )


def load_dataset(datasets_dir: str | None, name: str, max_len: int, num_classes: int, seed: int) -> LoadedDataset:
    if name == "toy":
        return toy_dataset(max_len, num_classes, seed)
    if datasets_dir is None:
        raise FileNotFoundError(f"dataset {name!r} needs --datasets-dir")
    return file_dataset(datasets_dir, name, max_len)
