"""Cosine-to-zero learning-rate schedule."""

from __future__ import annotations

import math


def lr_schedule(step: int, total_steps: int, lr0: float) -> float:
    """lr0 * 0.5 * (1 + cos(pi * step / total_steps)); clamps to 0 past the end."""
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    if total_steps <= 0:
        raise ValueError(f"total_steps must be > 0, got {total_steps}")
    if step >= total_steps:
        return 0.0
    return lr0 * 0.5 * (1.0 + math.cos(math.pi * step / total_steps))
