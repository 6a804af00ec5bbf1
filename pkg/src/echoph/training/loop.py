"""The training loop: Adam over all non-frozen parameters, cosine-decayed
learning rate, per-epoch validation MAEs, epoch-boundary checkpoints, and
best-model selection by sigma-normalized validation MAE."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import torch

from echoph import rngs
from echoph.model import ModelConfig, MultiViewNet, build_model
from echoph.pipeline import BpeTokenizer
from echoph.training.checkpoint import load_checkpoint, save_checkpoint
from echoph.training.data import DiskCohort, PipelineConfig, TensorCache, batch_tensors
from echoph.training.losses import alignment_loss, prediction_loss, total_loss
from echoph.training.schedule import lr_schedule


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 16
    epochs: int = 300
    lr0: float = 3e-4
    lam: float = 0.25              # mPAP weight inside the regression loss
    alignment_weight: float = 0.1
    mask_prob: float = 0.15
    seed: int = 0
    init_seed: int = 0
    checkpoint_every: int = 20     # epochs between retained checkpoints
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8

    def validate(self) -> "TrainConfig":
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.alignment_weight < 0:
            raise ValueError(f"alignment_weight must be >= 0, got {self.alignment_weight}")
        if self.lr0 <= 0:
            raise ValueError(f"lr0 must be > 0, got {self.lr0}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["adam_betas"] = list(self.adam_betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "adam_betas" in d:
            d["adam_betas"] = tuple(d["adam_betas"])
        return cls(**d)


def select_best(
    val_log: list[dict], sigma_mpap: float, sigma_pvr: float
) -> tuple[int, float]:
    """Pick the epoch minimizing mae_mpap/sigma_mpap + mae_pvr/sigma_pvr.
    Ties go to the earliest epoch. Returns (epoch, score)."""
    if not val_log:
        raise ValueError("empty validation log")
    if sigma_mpap <= 0 or sigma_pvr <= 0:
        raise ValueError("target standard deviations must be positive")
    best_epoch, best_score = None, math.inf
    for entry in sorted(val_log, key=lambda e: e["epoch"]):
        score = entry["mae_mpap"] / sigma_mpap + entry["mae_pvr"] / sigma_pvr
        if score < best_score:
            best_epoch, best_score = entry["epoch"], score
    return best_epoch, best_score


@torch.no_grad()
def validation_maes(
    model: MultiViewNet,
    cohort: DiskCohort,
    ids: list[str],
    pcfg: PipelineConfig,
    tokenizer: BpeTokenizer,
    batch_size: int,
    cache: TensorCache | None = None,
) -> tuple[float, float]:
    model.eval()
    errs = []
    for start in range(0, len(ids), batch_size):
        batch = batch_tensors(cohort, ids[start:start + batch_size], pcfg, tokenizer,
                              "eval", cache=cache)
        out = model(batch["videos"], batch["dopplers"], batch["tokens"])
        errs.append((out.final - batch["targets"]).abs().numpy())
    errs = np.concatenate(errs, axis=0)
    model.train()
    return float(errs[:, 0].mean()), float(errs[:, 1].mean())


def _checkpoint_payload(model, optimizer, model_config, train_config, pcfg, epoch, step, val_log):
    return {
        "kind": "mvml",
        "model_config": model_config.to_dict(),
        "train_config": train_config.to_dict(),
        "pipeline_config": pcfg.to_dict(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict(),
        "epoch": epoch,
        "step": step,
        "val_log": val_log,
    }


def _write_metrics(run_dir: Path, rows: list[dict]) -> None:
    with open(run_dir / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "step", "train_loss", "mae_mpap", "mae_pvr"])
        writer.writeheader()
        writer.writerows(rows)


def train(
    dataset_dir: str | Path,
    model_config: ModelConfig,
    train_config: TrainConfig,
    pcfg: PipelineConfig,
    out_dir: str | Path,
    resume_from: str | Path | None = None,
    epochs_override: int | None = None,
) -> Path:
    """Train on the dataset's train split with per-epoch validation. Writes the
    run directory (config snapshot, metrics.csv, checkpoints, best marker) and
    returns its path. Fully deterministic in the configs."""
    train_config.validate()
    pcfg.mask_prob = train_config.mask_prob
    cohort = DiskCohort(dataset_dir)
    train_ids = cohort.ids("train")
    val_ids = cohort.ids("val")
    if not train_ids or not val_ids:
        raise ValueError("dataset must provide train and val splits")
    tokenizer = BpeTokenizer.from_asset()

    out_dir = Path(out_dir)
    (out_dir / "checkpoints").mkdir(parents=True, exist_ok=True)

    epochs = epochs_override if epochs_override is not None else train_config.epochs
    steps_per_epoch = math.ceil(len(train_ids) / train_config.batch_size)
    total_steps = train_config.epochs * steps_per_epoch

    if resume_from is not None:
        payload = load_checkpoint(resume_from)
        model = build_model(ModelConfig.from_dict(payload["model_config"]), train_config.init_seed)
        model.load_state_dict(payload["model_state"])
        optimizer = torch.optim.Adam(model.trainable_parameters(), lr=train_config.lr0,
                                     betas=train_config.adam_betas, eps=train_config.adam_eps)
        optimizer.load_state_dict(payload["optimizer_state"])
        start_epoch = payload["epoch"] + 1
        step = payload["step"]
        val_log = list(payload["val_log"])
    else:
        model = build_model(model_config, train_config.init_seed)
        optimizer = torch.optim.Adam(model.trainable_parameters(), lr=train_config.lr0,
                                     betas=train_config.adam_betas, eps=train_config.adam_eps)
        start_epoch = 0
        step = 0
        val_log = []

    (out_dir / "config.json").write_text(json.dumps({
        "dataset_dir": str(dataset_dir),
        "model_config": model_config.to_dict(),
        "train_config": train_config.to_dict(),
        "pipeline_config": pcfg.to_dict(),
    }, indent=2, sort_keys=True))

    metrics_rows = [
        {"epoch": e["epoch"], "step": e["step"], "train_loss": e["train_loss"],
         "mae_mpap": e["mae_mpap"], "mae_pvr": e["mae_pvr"]}
        for e in val_log
    ]

    val_targets = np.array([
        (cohort.load(cid).rhc.mpap, cohort.load(cid).rhc.pvr) for cid in val_ids
    ])
    sigma_mpap = float(val_targets[:, 0].std())
    sigma_pvr = float(val_targets[:, 1].std())

    model.train()
    cache = TensorCache()
    step_rows: list[dict] = []
    for epoch in range(start_epoch, epochs):
        order = rngs.stream(train_config.seed, "order", epoch).permutation(len(train_ids))
        epoch_loss = 0.0
        for start in range(0, len(train_ids), train_config.batch_size):
            ids = [train_ids[i] for i in order[start:start + train_config.batch_size]]
            batch = batch_tensors(cohort, ids, pcfg, tokenizer, "train",
                                  seed=train_config.seed, epoch=epoch, cache=cache)
            lr = lr_schedule(step, total_steps, train_config.lr0)
            for group in optimizer.param_groups:
                group["lr"] = lr
            out = model(batch["videos"], batch["dopplers"], batch["tokens"],
                        batch.get("video_active"), batch.get("doppler_active"))
            align = alignment_loss(out.video_embed_norm, out.profile_embed_norm,
                                   model_config.temperature)
            mse = prediction_loss(out.final, out.branch_video, out.branch_profile,
                                  batch["targets"], train_config.lam)
            loss = total_loss(align, mse, train_config.alignment_weight)
            if not torch.isfinite(loss):
                save_checkpoint(out_dir / "checkpoints" / "diagnostic.pt",
                                _checkpoint_payload(model, optimizer, model_config,
                                                    train_config, pcfg, epoch, step, val_log))
                raise TrainingDiverged(f"non-finite loss at epoch {epoch} step {step}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            step_rows.append({"step": step, "loss": float(loss.detach())})
            step += 1

        mae_mpap, mae_pvr = validation_maes(model, cohort, val_ids, pcfg, tokenizer,
                                            train_config.batch_size, cache=cache)
        entry = {"epoch": epoch, "step": step, "train_loss": epoch_loss / steps_per_epoch,
                 "mae_mpap": mae_mpap, "mae_pvr": mae_pvr}
        val_log.append(entry)
        metrics_rows.append(entry)
        _write_metrics(out_dir, metrics_rows)
        with open(out_dir / "steps.csv", "a" if epoch > start_epoch else "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["step", "loss"])
            if epoch == start_epoch:
                writer.writeheader()
            writer.writerows(step_rows)
            step_rows = []

        payload = _checkpoint_payload(model, optimizer, model_config, train_config,
                                      pcfg, epoch, step, val_log)
        save_checkpoint(out_dir / "checkpoints" / "last.pt", payload)
        if (epoch + 1) % train_config.checkpoint_every == 0 or epoch == epochs - 1:
            save_checkpoint(out_dir / "checkpoints" / f"epoch_{epoch:04d}.pt", payload)
        best_epoch, best_score = select_best(val_log, sigma_mpap, sigma_pvr)
        if best_epoch == epoch:
            save_checkpoint(out_dir / "checkpoints" / "best.pt", payload)
            (out_dir / "best.json").write_text(json.dumps({
                "epoch": best_epoch,
                "score": best_score,
                "sigma_mpap": sigma_mpap,
                "sigma_pvr": sigma_pvr,
                "checkpoint": "best.pt",
            }, indent=2, sort_keys=True))

    return out_dir
