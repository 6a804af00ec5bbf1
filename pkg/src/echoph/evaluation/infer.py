"""Checkpoint loading and batched eval-mode inference."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from echoph.domain import CaseRecord
from echoph.model import ModelConfig, MultiViewNet, build_model
from echoph.pipeline import BpeTokenizer
from echoph.training.checkpoint import load_checkpoint
from echoph.training.data import PipelineConfig, case_tensors


def load_model_bundle(checkpoint_path: str | Path):
    """Returns (model in eval mode, pipeline config, checkpoint payload)."""
    payload = load_checkpoint(checkpoint_path)
    if payload.get("kind") != "mvml":
        raise ValueError(f"not a model checkpoint: kind={payload.get('kind')!r}")
    config = ModelConfig.from_dict(payload["model_config"])
    model = build_model(config, payload.get("train_config", {}).get("init_seed", 0))
    model.load_state_dict(payload["model_state"])
    model.eval()
    pcfg = PipelineConfig.from_dict(payload["pipeline_config"])
    return model, pcfg, payload


@torch.no_grad()
def predict_records(
    model: MultiViewNet,
    records: list[CaseRecord],
    pcfg: PipelineConfig,
    tokenizer: BpeTokenizer | None = None,
    batch_size: int = 8,
) -> np.ndarray:
    """Eval-mode predictions, one (mpap_hat, pvr_hat) row per record."""
    tokenizer = tokenizer or BpeTokenizer.from_asset()
    out_rows = []
    for start in range(0, len(records), batch_size):
        chunk = records[start:start + batch_size]
        videos, dopplers, tokens = [], [], []
        for record in chunk:
            v, d, t = case_tensors(record, pcfg, tokenizer, "eval")
            videos.append(v)
            dopplers.append(d)
            tokens.append(t)
        out = model(torch.stack(videos), torch.stack(dopplers), tokens)
        out_rows.append(out.final.numpy())
    return np.concatenate(out_rows, axis=0)
