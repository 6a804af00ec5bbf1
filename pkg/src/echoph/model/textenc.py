"""Frozen deterministic text embedding.

Token ids map to fixed random-projection vectors (seeded constant), which are
mean-pooled. The table is a buffer, never a parameter: no optimizer can touch
it, and any frozen encoder with the same call signature can be swapped in.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


class FrozenTextEncoder(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int, seed: int):
        super().__init__()
        self.vocab_size = vocab_size
        self.embed_dim = embed_dim
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        table = rng.normal(0.0, 1.0 / np.sqrt(embed_dim), size=(vocab_size, embed_dim))
        self.register_buffer("table", torch.as_tensor(table, dtype=torch.get_default_dtype()))

    @torch.no_grad()
    def forward(self, token_batch: list[list[int]]) -> torch.Tensor:
        """Mean-pooled token vectors; empty sequences embed to zero."""
        out = torch.zeros(len(token_batch), self.embed_dim, dtype=self.table.dtype)
        for i, ids in enumerate(token_batch):
            if len(ids) == 0:
                continue
            idx = torch.as_tensor(ids, dtype=torch.long)
            if int(idx.max()) >= self.vocab_size or int(idx.min()) < 0:
                raise ValueError("token id outside the frozen vocabulary")
            out[i] = self.table[idx].mean(dim=0)
        return out
