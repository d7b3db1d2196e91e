"""Text encoders producing fixed-length representations.

The builtin encoder hashes whitespace tokens into a trainable embedding
table and mean-pools the rows; it is small enough to fine-tune end to end
on a desk machine.  An out-of-process pretrained encoder is reachable
through the bridge client instead (see ``bridge.py``).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def token_bucket(token: str, buckets: int) -> int:
    """Stable token hash; crc32 so results do not vary across processes."""
    return zlib.crc32(token.encode("utf-8")) % buckets


@dataclass
class BuiltinEncoderConfig:
    dim: int = 64
    buckets: int = 2**15
    init_scale: float = 0.3
    # float32 halves the optimizer's memory traffic on the table, which
    # dominates training time; float64 is for gradient checks.
    dtype: str = "float32"


class BuiltinEncoder:
    """Hashed-embedding mean-pool encoder with a trainable table."""

    kind = "builtin_hashed_embedding"

    def __init__(self, config: BuiltinEncoderConfig | None = None, seed: int = 0):
        self.config = config or BuiltinEncoderConfig()
        rng = np.random.default_rng(seed)
        self.table = rng.normal(
            0.0, self.config.init_scale, size=(self.config.buckets, self.config.dim)
        ).astype(self.config.dtype)

    @property
    def dim(self) -> int:
        return self.config.dim

    def token_ids(self, text: str) -> np.ndarray:
        buckets = self.config.buckets
        return np.array([token_bucket(t, buckets) for t in text.split()], dtype=np.int64)

    def encode_ids(self, ids: np.ndarray) -> np.ndarray:
        if ids.size == 0:
            return np.zeros(self.config.dim, dtype=self.table.dtype)
        return self.table[ids].mean(axis=0)

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        """Representations for a batch of level-2 texts, one row per text."""
        out = np.zeros((len(texts), self.config.dim))
        for i, text in enumerate(texts):
            out[i] = self.encode_ids(self.token_ids(text))
        return out

    def encode_one(self, text: str) -> np.ndarray:
        return self.encode_ids(self.token_ids(text))

    def accumulate_grad(
        self, id_lists: Sequence[np.ndarray], d_reprs: np.ndarray, out: np.ndarray
    ) -> np.ndarray:
        """Scatter representation gradients back onto embedding rows.

        Mean pooling sends each document's gradient to its token rows scaled
        by 1/len(tokens); repeated tokens accumulate.  ``out`` must be a
        zeroed table-shaped buffer and is returned filled.
        """
        for ids, d_repr in zip(id_lists, d_reprs):
            if ids.size:
                np.add.at(out, ids, d_repr / ids.size)
        return out
