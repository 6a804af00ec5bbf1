"""Random view masking for training-time robustness to missing views."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def mask_views(
    views: Sequence[str],
    mask_prob: float,
    rng: np.random.Generator | None = None,
    mode: str = "train",
) -> dict[str, bool]:
    """Return per-view active flags. Train mode masks each view independently
    with mask_prob; if the draw masks everything, one uniformly chosen view is
    forced to survive (the terminating form of resampling, and the only
    consistent reading at mask_prob=1). Eval mode keeps all views active."""
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if not (0.0 <= mask_prob <= 1.0):
        raise ValueError(f"mask_prob must be in [0, 1], got {mask_prob}")
    views = list(views)
    if mode == "eval" or mask_prob == 0.0:
        return {v: True for v in views}
    if rng is None:
        raise ValueError("train mode requires an rng stream")
    active = rng.random(len(views)) >= mask_prob
    if not active.any():
        active[int(rng.integers(len(views)))] = True
    return {v: bool(a) for v, a in zip(views, active)}
