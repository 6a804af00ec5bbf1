"""Cross-view fusion with a summed query.

Per-view feature grids are flattened to token sequences (raster order, token
dim C). Queries are computed per view and summed over the active views; keys
and values are the concatenation of the active views' tokens. The attentive
output goes through a LayerNorm, the projection to the embedding dim, and a
token mean-pool. Masked views are physically dropped from K/V and the query
sum, so masking out views is arithmetically identical to never passing them.
"""

from __future__ import annotations

import math

import torch
from torch import nn


class NoActiveViewsError(ValueError):
    pass


def flatten_grid(features: torch.Tensor) -> torch.Tensor:
    """(B, V, C, *grid) -> (B, V, N, C) in raster order."""
    b, v, c = features.shape[:3]
    return features.reshape(b, v, c, -1).transpose(2, 3)


class CrossViewAttention(nn.Module):
    def __init__(self, channels: int, embed_dim: int):
        super().__init__()
        self.channels = channels
        self.w_q = nn.Linear(channels, channels, bias=False)
        self.w_k = nn.Linear(channels, channels, bias=False)
        self.w_v = nn.Linear(channels, channels, bias=False)
        self.norm = nn.LayerNorm(channels)
        self.w_project = nn.Linear(channels, embed_dim)

    def fuse_tokens(self, tokens: torch.Tensor) -> torch.Tensor:
        """Fuse one case's active views. tokens: (V_active, N, C) -> (N, C)."""
        if tokens.ndim != 3 or tokens.shape[0] == 0:
            raise NoActiveViewsError("at least one unmasked view is required")
        q = self.w_q(tokens)                    # (V, N, C)
        k = self.w_k(tokens).reshape(-1, self.channels)   # (V*N, C)
        v = self.w_v(tokens).reshape(-1, self.channels)
        query = q.sum(dim=0)                    # (N, C), summed across views
        logits = query @ k.T / math.sqrt(self.channels)
        weights = torch.softmax(logits, dim=-1)
        return weights @ v                      # (N, C)

    def attention_weights(self, tokens: torch.Tensor) -> torch.Tensor:
        """Softmax rows for diagnostics/tests; same arithmetic as fuse_tokens."""
        q = self.w_q(tokens)
        k = self.w_k(tokens).reshape(-1, self.channels)
        query = q.sum(dim=0)
        return torch.softmax(query @ k.T / math.sqrt(self.channels), dim=-1)

    def forward(self, features: torch.Tensor, active: torch.Tensor | None = None) -> torch.Tensor:
        """features: (B, V, C, *grid); active: (B, V) bool. Returns (B, D)."""
        tokens = flatten_grid(features)
        b, n_views = tokens.shape[:2]
        if active is None:
            active = torch.ones(b, n_views, dtype=torch.bool, device=tokens.device)
        fused = []
        for i in range(b):
            keep = active[i]
            if not bool(keep.any()):
                raise NoActiveViewsError(f"case {i}: every view is masked")
            fa = self.fuse_tokens(tokens[i][keep])
            projected = self.w_project(self.norm(fa))
            fused.append(projected.mean(dim=0))
        return torch.stack(fused, dim=0)
