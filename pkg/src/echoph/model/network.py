"""The full multi-view, multi-modal assessment network.

Video and Doppler views pass through their shared per-modality encoders and
cross-view attention, producing a video embedding V and a Doppler embedding.
The Doppler embedding is concatenated with the frozen text embedding and
projected to the profile embedding C. Heads regress (mPAP, PVR): the final
head from [V, C], one branch head from V alone, one from C alone. Normalized
copies of V and C feed the alignment loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from echoph.model.attention import CrossViewAttention
from echoph.model.config import ModelConfig
from echoph.model.encoders import DopplerEncoder, VideoEncoder, encode_views
from echoph.model.textenc import FrozenTextEncoder


def normalize_embedding(x: torch.Tensor, dim: int = -1) -> torch.Tensor:
    """Scale rows to unit Euclidean norm. Zero rows are returned unchanged
    (degenerate; detectable via zero norm) rather than dividing by zero."""
    norms = x.norm(dim=dim, keepdim=True)
    return torch.where(norms > 0, x / norms.clamp_min(torch.finfo(x.dtype).tiny), x)


class Mlp(nn.Module):
    def __init__(self, d_in: int, hidden: int, d_out: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(d_in, hidden), nn.ReLU(inplace=True), nn.Linear(hidden, d_out)
        )

    def forward(self, x):
        return self.net(x)


@dataclass
class ModelOutput:
    video_embed: torch.Tensor          # (B, D) raw
    profile_embed: torch.Tensor        # (B, D) raw
    video_embed_norm: torch.Tensor     # (B, D) unit rows, for alignment
    profile_embed_norm: torch.Tensor
    final: torch.Tensor                # (B, 2): (mpap_hat, pvr_hat)
    branch_video: torch.Tensor         # (B, 2)
    branch_profile: torch.Tensor       # (B, 2)


class MultiViewNet(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.video_encoder = VideoEncoder(config)
        self.doppler_encoder = DopplerEncoder(config)
        self.video_attention = CrossViewAttention(config.channels, config.embed_dim)
        self.doppler_attention = CrossViewAttention(config.channels, config.embed_dim)
        self.text_encoder = FrozenTextEncoder(
            config.text_vocab_size, config.text_embed_dim, config.text_seed
        )
        self.profile_proj = nn.Linear(config.embed_dim + config.text_embed_dim, config.embed_dim)
        self.head_final = Mlp(2 * config.embed_dim, config.head_hidden, 2)
        self.head_video = Mlp(config.embed_dim, config.head_hidden, 2)
        self.head_profile = Mlp(config.embed_dim, config.head_hidden, 2)

    def trainable_parameters(self):
        return [p for p in self.parameters() if p.requires_grad]

    def forward(
        self,
        videos: torch.Tensor,            # (B, 4, 3, T, H, W)
        dopplers: torch.Tensor,          # (B, 4, 3, H, W)
        tokens: list[list[int]],
        video_active: torch.Tensor | None = None,   # (B, 4) bool
        doppler_active: torch.Tensor | None = None,
    ) -> ModelOutput:
        video_feats = encode_views(videos, self.video_encoder)
        doppler_feats = encode_views(dopplers, self.doppler_encoder)
        v_embed = self.video_attention(video_feats, video_active)
        d_embed = self.doppler_attention(doppler_feats, doppler_active)
        t_embed = self.text_encoder(tokens).to(v_embed.dtype)
        profile = self.profile_proj(torch.cat([d_embed, t_embed], dim=1))
        final = self.head_final(torch.cat([v_embed, profile], dim=1))
        return ModelOutput(
            video_embed=v_embed,
            profile_embed=profile,
            video_embed_norm=normalize_embedding(v_embed),
            profile_embed_norm=normalize_embedding(profile),
            final=final,
            branch_video=self.head_video(v_embed),
            branch_profile=self.head_profile(profile),
        )


def build_model(config: ModelConfig, init_seed: int = 0) -> MultiViewNet:
    """Construct with deterministic initialization and the configured dtype."""
    torch.manual_seed(init_seed)
    model = MultiViewNet(config)
    return model.to(getattr(torch, config.dtype))
