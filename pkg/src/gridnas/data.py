"""Desk-scale synthetic sentence-classification tasks.

Two generators with different inductive demands:

* `synthetic_majority`: each class owns a disjoint token pool and the
  label is the class whose tokens occur most often. Solvable from token
  frequencies alone (a bag-of-words model suffices).
* `synthetic_ngram`: paired classes share the same marker tokens but in
  opposite bigram order, so unigram statistics carry no signal and only
  models that see sequence locality (convolution, attention) can
  separate them.

Both are deterministic per seed with disjoint train/validation splits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

MAJORITY_FOCUS = 0.55  # probability a token comes from the dominant class pool
NGRAM_COPIES = 2  # marker bigram insertions per sentence
NGRAM_GAP = 3  # minimum distance between insertion starts


@dataclass(frozen=True)
class DataConfig:
    vocab_size: int = 40
    num_classes: int = 2
    max_len: int = 12
    embed_dim: int = 16
    train_size: int = 192
    val_size: int = 96
    batch_size: int = 8
    epochs: int = 5
    lr: float = 0.01
    seed: int = 0
    source: str = "synthetic_ngram"
    dataset_name: str = "toy"  # forwarded to external evaluators only

    def __post_init__(self):
        if self.source not in ("synthetic_majority", "synthetic_ngram", "external"):
            raise ConfigError(f"unknown data source {self.source!r}")
        if self.vocab_size < self.num_classes + 2:
            raise ConfigError(
                f"vocab_size must be >= num_classes + 2, got {self.vocab_size} for "
                f"{self.num_classes} classes"
            )
        if min(self.num_classes, self.max_len, self.embed_dim, self.batch_size) < 1:
            raise ConfigError("num_classes, max_len, embed_dim, batch_size must be >= 1")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "DataConfig":
        return cls(**data)


def desk_data(seed: int = 0, source: str = "synthetic_ngram") -> DataConfig:
    return DataConfig(seed=seed, source=source)


def paper_scale_data(seed: int = 0, imdb_like: bool = False) -> DataConfig:
    """Full-scale shape parameters: length 50 (400 for IMDB-like), dim 300."""
    return DataConfig(
        vocab_size=2000,
        num_classes=2,
        max_len=400 if imdb_like else 50,
        embed_dim=300,
        train_size=2048,
        val_size=512,
        batch_size=8,
        epochs=50,
        lr=0.01,
        seed=seed,
    )


@dataclass
class Dataset:
    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    class_tokens: tuple[frozenset, ...]  # per-class token sets, for oracles

    def __post_init__(self):
        for arr in (self.train_x, self.val_x):
            arr.setflags(write=False)


def _majority_label(sentence: np.ndarray, pools: list[range]) -> int:
    counts = [int(np.isin(sentence, pool).sum()) for pool in pools]
    return int(np.argmax(counts))  # argmax breaks ties toward the lower class


def _gen_majority(cfg: DataConfig, rng: np.random.Generator, n: int):
    pool_size = cfg.vocab_size // (cfg.num_classes + 1)
    if pool_size < 1:
        raise ConfigError("vocab too small for per-class token pools")
    pools = [range(c * pool_size, (c + 1) * pool_size) for c in range(cfg.num_classes)]
    xs = np.empty((n, cfg.max_len), dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for i in range(n):
        dominant = int(rng.integers(cfg.num_classes))
        focused = rng.random(cfg.max_len) < MAJORITY_FOCUS
        row = rng.integers(0, cfg.vocab_size, size=cfg.max_len)
        row[focused] = rng.integers(pools[dominant].start, pools[dominant].stop, size=int(focused.sum()))
        xs[i] = row
        ys[i] = _majority_label(row, pools)
    class_tokens = tuple(frozenset(pool) for pool in pools)
    return xs, ys, class_tokens


def _ngram_markers(num_classes: int) -> list[tuple[int, int]]:
    """Class c's marker bigram; paired classes share tokens in opposite order."""
    bigrams = []
    for c in range(num_classes):
        pair = c // 2
        a, b = 2 * pair, 2 * pair + 1
        bigrams.append((a, b) if c % 2 == 0 else (b, a))
    return bigrams


def _gen_ngram(cfg: DataConfig, rng: np.random.Generator, n: int):
    bigrams = _ngram_markers(cfg.num_classes)
    marker_count = 2 * ((cfg.num_classes + 1) // 2)
    if cfg.vocab_size - marker_count < 2:
        raise ConfigError("vocab too small to hold marker and background tokens")
    if cfg.max_len < NGRAM_COPIES * NGRAM_GAP:
        raise ConfigError(f"max_len must be >= {NGRAM_COPIES * NGRAM_GAP} for the ngram task")
    xs = np.empty((n, cfg.max_len), dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for i in range(n):
        label = int(rng.integers(cfg.num_classes))
        row = rng.integers(marker_count, cfg.vocab_size, size=cfg.max_len)
        starts: list[int] = []
        while len(starts) < NGRAM_COPIES:
            p = int(rng.integers(cfg.max_len - 1))
            if all(abs(p - q) >= NGRAM_GAP for q in starts):
                starts.append(p)
        a, b = bigrams[label]
        for p in starts:
            row[p], row[p + 1] = a, b
        xs[i] = row
        ys[i] = label
    class_tokens = tuple(frozenset(bg) for bg in bigrams)
    return xs, ys, class_tokens


def synth_dataset(cfg: DataConfig) -> Dataset:
    """Generate the train and validation splits for a synthetic source."""
    rng = np.random.default_rng([cfg.seed, 1])
    gen = {"synthetic_majority": _gen_majority, "synthetic_ngram": _gen_ngram}
    try:
        generator = gen[cfg.source]
    except KeyError:
        raise ConfigError(f"{cfg.source!r} is not a synthetic source") from None
    train_x, train_y, class_tokens = generator(cfg, rng, cfg.train_size)
    val_x, val_y, _ = generator(cfg, rng, cfg.val_size)
    # keep the splits disjoint: regenerate any validation row seen in training
    seen = {tuple(row) for row in train_x}
    for i in range(cfg.val_size):
        while tuple(val_x[i]) in seen:
            rx, ry, _ = generator(cfg, rng, 1)
            val_x[i], val_y[i] = rx[0], ry[0]
    return Dataset(train_x, train_y, val_x, val_y, class_tokens)


def bag_of_words_predictions(class_tokens, xs: np.ndarray) -> np.ndarray:
    """Frequency-counting classifier over per-class token sets (ties -> lower class)."""
    counts = np.stack(
        [np.isin(xs, list(tokens)).sum(axis=1) for tokens in class_tokens], axis=1
    )
    return counts.argmax(axis=1)


def bag_of_words_accuracy(dataset: Dataset) -> float:
    preds = bag_of_words_predictions(dataset.class_tokens, dataset.val_x)
    return float((preds == dataset.val_y).mean())
