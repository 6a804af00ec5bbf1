"""Model hyperparameters.

The full-scale configuration keeps the reference backbone shape contract
(C=512, video feature grid 8x8x8, Doppler grid 16x12); the desk defaults keep
the same shape relations at a size a CPU can train.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass
class ModelConfig:
    channels: int = 32                 # C; attention scale d_k = C
    embed_dim: int = 32                # D; W_project maps C -> D
    temperature: float = 0.07
    text_embed_dim: int = 16
    text_vocab_size: int = 1503        # matches the shipped merges table
    text_seed: int = 424242
    head_hidden: int = 64

    video_stem_channels: int = 16
    video_stage_channels: tuple[int, ...] = (16, 24, 32)
    video_stem_stride: tuple[int, int, int] = (1, 2, 2)
    video_stage_strides: tuple[tuple[int, int, int], ...] = ((2, 2, 2), (2, 2, 2), (1, 2, 2))
    video_pool_grid: tuple[int, int, int] | None = None    # (T', H', W') after pooling

    doppler_stem_channels: int = 16
    doppler_stage_channels: tuple[int, ...] = (16, 24, 32)
    doppler_stem_stride: int = 4
    doppler_stage_strides: tuple[tuple[int, int], ...] = ((2, 2), (2, 2), (2, 2))
    doppler_pool_grid: tuple[int, int] | None = None       # (H'', W'') after pooling

    dtype: str = "float32"

    def validate(self) -> "ModelConfig":
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.video_stage_channels[-1] != self.channels:
            raise ValueError("last video stage must emit `channels` feature maps")
        if self.doppler_stage_channels[-1] != self.channels:
            raise ValueError("last doppler stage must emit `channels` feature maps")
        if len(self.video_stage_channels) != len(self.video_stage_strides):
            raise ValueError("video stage channels/strides length mismatch")
        if len(self.doppler_stage_channels) != len(self.doppler_stage_strides):
            raise ValueError("doppler stage channels/strides length mismatch")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["video_stage_channels"] = list(self.video_stage_channels)
        d["video_stem_stride"] = list(self.video_stem_stride)
        d["video_stage_strides"] = [list(s) for s in self.video_stage_strides]
        d["doppler_stage_channels"] = list(self.doppler_stage_channels)
        d["doppler_stage_strides"] = [list(s) for s in self.doppler_stage_strides]
        d["video_pool_grid"] = list(self.video_pool_grid) if self.video_pool_grid else None
        d["doppler_pool_grid"] = list(self.doppler_pool_grid) if self.doppler_pool_grid else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("video_stage_channels", "doppler_stage_channels", "video_stem_stride"):
            if key in d:
                d[key] = tuple(d[key])
        for key in ("video_stage_strides", "doppler_stage_strides"):
            if key in d:
                d[key] = tuple(tuple(s) for s in d[key])
        for key in ("video_pool_grid", "doppler_pool_grid"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


def full_scale_config() -> ModelConfig:
    """Full-scale settings for the reference shape contract: C=512 with
    feature grids pooled to 8x8x8 (video) and 12x16 (Doppler). Not intended
    for CPU training."""
    return ModelConfig(
        channels=512,
        embed_dim=512,
        text_embed_dim=64,
        head_hidden=512,
        video_stem_channels=64,
        video_stage_channels=(128, 256, 512),
        video_stage_strides=((2, 2, 2), (2, 2, 2), (2, 2, 2)),
        video_pool_grid=(8, 8, 8),
        doppler_stem_channels=64,
        doppler_stage_channels=(128, 256, 512),
        doppler_pool_grid=(12, 16),
    )
