"""GloVe text-format embedding loader.

Each line is `token v1 v2 ... vd` separated by whitespace. Rows for
in-vocabulary tokens are copied verbatim; tokens without a pretrained
row fall back to seeded uniform noise so runs stay reproducible.
"""

from __future__ import annotations

import numpy as np

FALLBACK_SCALE = 0.1


class GloveError(ValueError):
    pass


def load_glove(
    path: str, vocab: list[str], embed_dim: int, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Returns (table of shape (len(vocab), embed_dim), covered row count)."""
    rows: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != embed_dim:
                raise GloveError(
                    f"{path}:{lineno}: vector has dim {len(values)}, expected {embed_dim}"
                )
            rows[token] = np.asarray([float(v) for v in values])
    table = rng.uniform(-FALLBACK_SCALE, FALLBACK_SCALE, size=(len(vocab), embed_dim))
    covered = 0
    for i, token in enumerate(vocab):
        if token in rows:
            table[i] = rows[token]
            covered += 1
    return table, covered
