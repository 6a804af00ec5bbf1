"""Versioned checkpoint container shared by the main model and the tabular
baseline. Everything needed to resume or serve lives in one torch.save file:
configs, parameter tensors (the frozen text table rides along as a buffer),
optimizer moments, and the training cursor."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any

import torch

FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, payload: dict[str, Any]) -> None:
    payload = dict(payload)
    payload["format_version"] = FORMAT_VERSION
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> dict[str, Any]:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format {version!r}")
    return payload


def checkpoint_digest(path: str | Path, length: int = 12) -> str:
    """Short content hash used as the served model version."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:length]
