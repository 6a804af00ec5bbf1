"""Parameter-shared per-view encoders.

One strided residual stack per modality; every view of a modality passes
through the same parameters. GroupNorm keeps inference independent of batch
composition, so eval outputs are bit-stable.
"""

from __future__ import annotations

import torch
from torch import nn

from echoph.model.config import ModelConfig


def _gn(channels: int) -> nn.GroupNorm:
    return nn.GroupNorm(min(4, channels), channels)


class ResBlock3d(nn.Module):
    def __init__(self, c_in: int, c_out: int, stride):
        super().__init__()
        self.conv1 = nn.Conv3d(c_in, c_out, 3, stride=stride, padding=1, bias=False)
        self.norm1 = _gn(c_out)
        self.conv2 = nn.Conv3d(c_out, c_out, 3, padding=1, bias=False)
        self.norm2 = _gn(c_out)
        self.act = nn.ReLU(inplace=True)
        if c_in != c_out or tuple(stride) != (1, 1, 1):
            self.skip = nn.Sequential(
                nn.Conv3d(c_in, c_out, 1, stride=stride, bias=False), _gn(c_out)
            )
        else:
            self.skip = nn.Identity()

    def forward(self, x):
        out = self.act(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return self.act(out + self.skip(x))


class ResBlock2d(nn.Module):
    def __init__(self, c_in: int, c_out: int, stride):
        super().__init__()
        self.conv1 = nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1, bias=False)
        self.norm1 = _gn(c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1, bias=False)
        self.norm2 = _gn(c_out)
        self.act = nn.ReLU(inplace=True)
        if c_in != c_out or tuple(stride) != (1, 1):
            self.skip = nn.Sequential(
                nn.Conv2d(c_in, c_out, 1, stride=stride, bias=False), _gn(c_out)
            )
        else:
            self.skip = nn.Identity()

    def forward(self, x):
        out = self.act(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return self.act(out + self.skip(x))


class VideoEncoder(nn.Module):
    """3D residual stack: (B, 3, T, H, W) -> (B, C, T', H', W'). An optional
    adaptive pool pins the output grid to a configured shape."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv3d(3, config.video_stem_channels, 3,
                      stride=config.video_stem_stride, padding=1, bias=False),
            _gn(config.video_stem_channels),
            nn.ReLU(inplace=True),
        )
        blocks = []
        c_in = config.video_stem_channels
        for c_out, stride in zip(config.video_stage_channels, config.video_stage_strides):
            blocks.append(ResBlock3d(c_in, c_out, stride))
            c_in = c_out
        self.blocks = nn.Sequential(*blocks)
        self.pool = (
            nn.AdaptiveAvgPool3d(config.video_pool_grid)
            if config.video_pool_grid is not None else nn.Identity()
        )

    def forward(self, x):
        return self.pool(self.blocks(self.stem(x)))


class DopplerEncoder(nn.Module):
    """2D residual stack: (B, 3, H, W) -> (B, C, H'', W'')."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        s = config.doppler_stem_stride
        self.stem = nn.Sequential(
            nn.Conv2d(3, config.doppler_stem_channels, 5, stride=s, padding=2, bias=False),
            _gn(config.doppler_stem_channels),
            nn.ReLU(inplace=True),
        )
        blocks = []
        c_in = config.doppler_stem_channels
        for c_out, stride in zip(config.doppler_stage_channels, config.doppler_stage_strides):
            blocks.append(ResBlock2d(c_in, c_out, stride))
            c_in = c_out
        self.blocks = nn.Sequential(*blocks)
        self.pool = (
            nn.AdaptiveAvgPool2d(config.doppler_pool_grid)
            if config.doppler_pool_grid is not None else nn.Identity()
        )

    def forward(self, x):
        return self.pool(self.blocks(self.stem(x)))


def encode_views(view_batch: torch.Tensor, encoder: nn.Module) -> torch.Tensor:
    """Apply one shared encoder to every view.

    view_batch: (B, V, 3, ...) -> (B, V, C, ...feature grid).
    """
    b, v = view_batch.shape[:2]
    flat = view_batch.reshape(b * v, *view_batch.shape[2:])
    feats = encoder(flat)
    return feats.reshape(b, v, *feats.shape[1:])
