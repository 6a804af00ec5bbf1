"""Doppler image scaling: proportional fit into the target canvas, symmetric
black padding, [0, 1] normalization. Non-proportional warps would distort the
spectral calibration, so aspect is always preserved."""

from __future__ import annotations

import cv2
import numpy as np

DEFAULT_DOPPLER_SIZE = (800, 600)  # (W, H)


def scale_doppler(image: np.ndarray, target: tuple[int, int] = DEFAULT_DOPPLER_SIZE) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected RGB image (H, W, 3), got shape {image.shape}")
    if image.size == 0:
        raise ValueError("empty image")
    tw, th = target
    h, w = image.shape[:2]
    scale = min(tw / w, th / h)
    nw, nh = int(round(w * scale)), int(round(h * scale))
    if (nw, nh) != (w, h):
        interp = cv2.INTER_AREA if scale < 1 else cv2.INTER_LINEAR
        resized = cv2.resize(image, (nw, nh), interpolation=interp)
    else:
        resized = image
    out = np.zeros((th, tw, 3), dtype=np.float32)
    top = (th - nh) // 2
    left = (tw - nw) // 2
    patch = resized.astype(np.float32)
    if image.dtype == np.uint8:
        patch /= 255.0
    out[top:top + nh, left:left + nw] = patch
    return np.clip(out, 0.0, 1.0)
