"""Frame sampling, cropping, and train-time augmentation for echo videos.

All transforms are pure functions of (input, config, rng state). Eval mode
consumes no randomness. Pixel outputs live in [0, 1] float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np


@dataclass
class AugmentConfig:
    crop_size: int = 256
    crop_offset_ratio: float = 0.30
    hflip_prob: float = 0.5
    rotation_degrees: float = 10.0
    brightness: float = 0.2
    contrast: float = 0.2
    saturation: float = 0.0
    enabled: bool = True

    def validate(self) -> "AugmentConfig":
        if not (0.0 <= self.crop_offset_ratio <= 0.5):
            raise ValueError(f"crop_offset_ratio must be in [0, 0.5], got {self.crop_offset_ratio}")
        if not (0.0 <= self.hflip_prob <= 1.0):
            raise ValueError(f"hflip_prob must be in [0, 1], got {self.hflip_prob}")
        return self


def sample_frames(raw_video: np.ndarray, target_t: int) -> np.ndarray:
    """Equidistant frame selection to exactly target_t frames.

    Index i maps to floor(i * T / target_t) (round-half-down). Videos shorter
    than the budget are padded by repeating the last frame, preserving the
    final cardiac phase.
    """
    raw_video = np.asarray(raw_video)
    t = len(raw_video)
    if t == 0:
        raise ValueError("empty video")
    if target_t <= 0:
        raise ValueError(f"target_t must be positive, got {target_t}")
    if t >= target_t:
        idx = np.floor(np.arange(target_t) * t / target_t).astype(np.int64)
    else:
        idx = np.concatenate([np.arange(t), np.full(target_t - t, t - 1)])
    return raw_video[idx]


def _resize_short_side(frames: np.ndarray, target_short: int) -> np.ndarray:
    t, h, w = frames.shape[:3]
    if min(h, w) == target_short:
        return frames
    scale = target_short / min(h, w)
    nh, nw = int(round(h * scale)), int(round(w * scale))
    out = np.empty((t, nh, nw) + frames.shape[3:], dtype=frames.dtype)
    for i in range(t):
        out[i] = cv2.resize(frames[i], (nw, nh), interpolation=cv2.INTER_AREA if scale < 1 else cv2.INTER_LINEAR)
    return out


def resize_for_crop(frames: np.ndarray, config: AugmentConfig) -> np.ndarray:
    """The deterministic resize prefix of the augmentation: short side to
    crop_size / (1 - offset ratio). Cacheable across epochs."""
    config.validate()
    frames = np.asarray(frames)
    if frames.ndim != 4:
        raise ValueError(f"expected (T, H, W, C) frames, got shape {frames.shape}")
    crop = config.crop_size
    if min(frames.shape[1], frames.shape[2]) < crop:
        raise ValueError(
            f"crop {crop} larger than frame ({frames.shape[1]}, {frames.shape[2]})"
        )
    target_short = int(math.ceil(crop / (1.0 - config.crop_offset_ratio)))
    return _resize_short_side(frames, target_short)


def crop_and_augment_video(
    frames: np.ndarray,
    config: AugmentConfig,
    mode: str,
    rng: np.random.Generator | None = None,
    assume_resized: bool = False,
) -> np.ndarray:
    """Resize-then-crop with train-time augmentation.

    Frames are first proportionally resized so the short side equals
    crop_size / (1 - crop_offset_ratio), which keeps the full offset range
    feasible (pass assume_resized=True when resize_for_crop already ran).
    Train mode samples one transform (offset crop, flip, rotation, color
    jitter) shared by every frame; eval mode center-crops deterministically.
    Output is float32 in [0, 1].
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if not assume_resized:
        frames = resize_for_crop(frames, config)
    else:
        config.validate()
        frames = np.asarray(frames)
    crop = config.crop_size
    t, h, w = frames.shape[:3]
    if h < crop or w < crop:
        raise ValueError(f"crop {crop} larger than resized frame ({h}, {w})")

    center_top = (h - crop) // 2
    center_left = (w - crop) // 2
    if mode == "train" and config.enabled:
        if rng is None:
            raise ValueError("train mode requires an rng stream")
        max_off = int(round(crop * config.crop_offset_ratio))
        top = int(np.clip(center_top + rng.integers(-max_off, max_off + 1), 0, h - crop))
        left = int(np.clip(center_left + rng.integers(-max_off, max_off + 1), 0, w - crop))
        flip = rng.random() < config.hflip_prob
        angle = float(rng.uniform(-config.rotation_degrees, config.rotation_degrees)) if config.rotation_degrees > 0 else 0.0
        b_factor = float(rng.uniform(1 - config.brightness, 1 + config.brightness)) if config.brightness > 0 else 1.0
        c_factor = float(rng.uniform(1 - config.contrast, 1 + config.contrast)) if config.contrast > 0 else 1.0
    else:
        top, left = center_top, center_left
        flip, angle, b_factor, c_factor = False, 0.0, 1.0, 1.0

    out = frames[:, top:top + crop, left:left + crop]
    if flip:
        out = out[:, :, ::-1]
    if angle != 0.0:
        m = cv2.getRotationMatrix2D((crop / 2 - 0.5, crop / 2 - 0.5), angle, 1.0)
        rotated = np.empty_like(out)
        for i in range(t):
            rotated[i] = cv2.warpAffine(out[i], m, (crop, crop), flags=cv2.INTER_LINEAR,
                                        borderMode=cv2.BORDER_CONSTANT, borderValue=0)
        out = rotated

    out = np.ascontiguousarray(out, dtype=np.float32)
    if frames.dtype == np.uint8:
        out /= 255.0
    if b_factor != 1.0:
        out *= b_factor
    if c_factor != 1.0:
        mean = out.mean()
        out = (out - mean) * c_factor + mean
    np.clip(out, 0.0, 1.0, out=out)
    return out
