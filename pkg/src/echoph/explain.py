"""Class-agnostic saliency over encoder activations.

The activation grid (C, *spatial) is unfolded to a channels-by-positions
matrix and projected onto its first right-singular vector (no class gradient
anywhere). The projection is sign-canonicalized so its maximum is positive,
rectified, normalized by its maximum, and upsampled to the input frame grid.

The unfolded matrix is pre-scaled by the power-of-two exponent of its largest
magnitude before the SVD; that division is exact in floating point, which
makes positive power-of-two rescalings of the activation map to bit-identical
saliency (the general positive-scaling invariance then holds to rounding).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from echoph.domain import CaseRecord, DopplerView, VideoView
from echoph.pipeline import BpeTokenizer
from echoph.training.data import PipelineConfig, case_tensors


@dataclass
class SaliencyMap:
    values: np.ndarray          # (T, H, W) or (H, W), each in [0, 1]
    layer: str
    normalization_max: float
    degenerate: bool = False


def eigencam_from_activation(activation: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Core projection: (C, *spatial) activation -> ([0,1] spatial map, max, flag)."""
    activation = np.asarray(activation, dtype=np.float64)
    if activation.ndim < 2:
        raise ValueError(f"expected (C, *spatial), got shape {activation.shape}")
    spatial_shape = activation.shape[1:]
    matrix = activation.reshape(activation.shape[0], -1)
    peak = np.abs(matrix).max()
    if peak == 0.0:
        return np.zeros(spatial_shape, dtype=np.float64), 0.0, True
    matrix = matrix / (2.0 ** math.floor(math.log2(peak)))
    _, s, vt = np.linalg.svd(matrix, full_matrices=False)
    projection = s[0] * vt[0]
    if projection.max() < -projection.min():
        projection = -projection
    projection = np.clip(projection, 0.0, None)
    peak_proj = projection.max()
    if peak_proj == 0.0:
        return np.zeros(spatial_shape, dtype=np.float64), 0.0, True
    return (projection / peak_proj).reshape(spatial_shape), float(peak_proj), False


def _upsample(values: np.ndarray, target_shape: tuple[int, ...]) -> np.ndarray:
    tensor = torch.from_numpy(values)[None, None]
    if values.ndim == 3:
        out = torch.nn.functional.interpolate(tensor, size=target_shape, mode="trilinear",
                                              align_corners=False)
    elif values.ndim == 2:
        out = torch.nn.functional.interpolate(tensor, size=target_shape, mode="bilinear",
                                              align_corners=False)
    else:
        raise ValueError(f"cannot upsample {values.ndim}-d map")
    return np.clip(out[0, 0].numpy(), 0.0, 1.0)


def default_layer(view: str) -> str:
    if view in {v.value for v in VideoView}:
        return "video_encoder.blocks"
    return "doppler_encoder.blocks"


def eigencam_for_case(
    model,
    record: CaseRecord,
    view: str,
    pcfg: PipelineConfig,
    layer: str | None = None,
    tokenizer: BpeTokenizer | None = None,
) -> SaliencyMap:
    """Saliency for one case/view from a loaded model (eval preprocessing)."""
    layer = layer or default_layer(view)
    modules = dict(model.named_modules())
    if layer not in modules:
        raise ValueError(f"unknown layer {layer!r}")
    tokenizer = tokenizer or BpeTokenizer.from_asset()
    videos, dopplers, _ = case_tensors(record, pcfg, tokenizer, "eval")

    captured: dict[str, torch.Tensor] = {}

    def hook(_module, _inputs, output):
        captured["activation"] = output.detach()

    handle = modules[layer].register_forward_hook(hook)
    try:
        with torch.no_grad():
            if view in {v.value for v in VideoView}:
                idx = [v.value for v in VideoView].index(view)
                model.video_encoder(videos[idx:idx + 1])
                target_shape = tuple(videos.shape[2:])      # (T, h, w)
            elif view in {v.value for v in DopplerView}:
                idx = [v.value for v in DopplerView].index(view)
                model.doppler_encoder(dopplers[idx:idx + 1])
                target_shape = tuple(dopplers.shape[2:])    # (H, W)
            else:
                raise ValueError(f"unknown view {view!r}")
    finally:
        handle.remove()

    activation = captured["activation"][0].numpy()
    values, peak, degenerate = eigencam_from_activation(activation)
    if not degenerate:
        values = _upsample(values, target_shape)
    else:
        values = np.zeros(target_shape, dtype=np.float64)
    return SaliencyMap(values=values.astype(np.float32), layer=layer,
                       normalization_max=peak, degenerate=degenerate)


_JET_LUT = None


def _jet(values: np.ndarray) -> np.ndarray:
    global _JET_LUT
    if _JET_LUT is None:
        from matplotlib import colormaps

        _JET_LUT = colormaps["jet"](np.linspace(0, 1, 256))[:, :3]
    idx = np.clip((values * 255.0).round().astype(int), 0, 255)
    return _JET_LUT[idx]


def overlay(heatmap: SaliencyMap | np.ndarray, frames: np.ndarray, alpha: float = 0.5) -> np.ndarray:
    """Alpha-blend the color-mapped heatmap over the frames; blending weight is
    alpha * heat, so zero-heat pixels pass through untouched. Returns uint8."""
    values = heatmap.values if isinstance(heatmap, SaliencyMap) else np.asarray(heatmap)
    frames = np.asarray(frames)
    single = frames.ndim == 3
    if single:
        frames = frames[None]
        values = values[None] if values.ndim == 2 else values
    if values.shape != frames.shape[:3]:
        raise ValueError(f"heatmap {values.shape} does not match frames {frames.shape[:3]}")
    base = frames.astype(np.float64)
    if frames.dtype == np.uint8:
        base /= 255.0
    color = _jet(values)
    weight = (alpha * values)[..., None]
    blended = (1.0 - weight) * base + weight * color
    out = (np.clip(blended, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    return out[0] if single else out


def write_saliency(
    saliency: SaliencyMap,
    frames: np.ndarray,
    out_dir: str | Path,
    alpha: float = 0.5,
) -> Path:
    """Export overlay frames as PNGs plus a JSON sidecar; returns the sidecar."""
    from PIL import Image

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = overlay(saliency, frames, alpha=alpha)
    if rendered.ndim == 3:
        rendered = rendered[None]
    for i, frame in enumerate(rendered):
        Image.fromarray(frame).save(out_dir / f"frame_{i:04d}.png")
    sidecar = out_dir / "saliency.json"
    sidecar.write_text(json.dumps({
        "layer": saliency.layer,
        "normalization_max": saliency.normalization_max,
        "degenerate": saliency.degenerate,
        "n_frames": int(rendered.shape[0]),
        "alpha": alpha,
    }, indent=2, sort_keys=True))
    return sidecar
