"""Parameter-based comparison model: an MLP over tabular echo + EHR features,
trained on the same splits and targets and scored by the same selection rule
as the main model."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from echoph import rngs
from echoph.domain import CaseRecord, Sex
from echoph.training.checkpoint import load_checkpoint, save_checkpoint
from echoph.training.data import DiskCohort
from echoph.training.losses import weighted_mse
from echoph.training.schedule import lr_schedule

FEATURE_ORDER = ("rvw", "tapse", "s_prime", "fac", "erap", "tvi", "trv", "sex", "age")
FEATURES_VERSION = 1


class MissingFeaturesError(ValueError):
    pass


def features_from_record(record: CaseRecord) -> list[float]:
    ep = record.echo_params
    meta = record.metadata
    raw = {
        "rvw": ep.rvw, "tapse": ep.tapse, "s_prime": ep.s_prime, "fac": ep.fac,
        "erap": ep.erap, "tvi": ep.tvi_rvot, "trv": ep.trv_max,
        "sex": 0.0 if meta.sex is Sex.FEMALE else 1.0,
        "age": float(meta.age),
    }
    missing = [k for k, v in raw.items() if v is None or not math.isfinite(float(v))]
    if missing:
        raise MissingFeaturesError(f"missing features: {missing}")
    return [float(raw[k]) for k in FEATURE_ORDER]


@dataclass
class MlpConfig:
    hidden: int = 256
    epochs: int = 400
    batch_size: int = 64
    lr0: float = 3e-4
    lam: float = 0.25
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MlpConfig":
        return cls(**d)


class TabularMlp(nn.Module):
    def __init__(self, hidden: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(len(FEATURE_ORDER), hidden),
            nn.ReLU(inplace=True),
            nn.Linear(hidden, hidden),
            nn.ReLU(inplace=True),
            nn.Linear(hidden, 2),
        )

    def forward(self, x):
        return self.net(x)


def fit_mlp(
    features: np.ndarray,
    targets: np.ndarray,
    val_features: np.ndarray,
    val_targets: np.ndarray,
    config: MlpConfig,
) -> dict:
    """Train and return a checkpoint payload (not yet written to disk).
    Standardization statistics come from the training split only."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std[std == 0] = 1.0
    fmin = features.min(axis=0)
    fmax = features.max(axis=0)

    x = torch.tensor((features - mean) / std, dtype=torch.float32)
    y = torch.tensor(targets, dtype=torch.float32)
    xv = torch.tensor((val_features - mean) / std, dtype=torch.float32)
    yv = torch.tensor(val_targets, dtype=torch.float32)

    torch.manual_seed(config.seed)
    model = TabularMlp(config.hidden)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr0)
    steps_per_epoch = math.ceil(len(x) / config.batch_size)
    total_steps = config.epochs * steps_per_epoch

    sigma = val_targets.std(axis=0)
    sigma[sigma == 0] = 1.0
    best = {"score": math.inf, "epoch": -1, "state": None, "mae_mpap": None, "mae_pvr": None}
    step = 0
    for epoch in range(config.epochs):
        order = rngs.stream(config.seed, "mlp-order", epoch).permutation(len(x))
        model.train()
        for start in range(0, len(x), config.batch_size):
            idx = torch.as_tensor(order[start:start + config.batch_size].copy())
            lr = lr_schedule(step, total_steps, config.lr0)
            for group in optimizer.param_groups:
                group["lr"] = lr
            loss = weighted_mse(model(x[idx]), y[idx], config.lam)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step += 1
        model.eval()
        with torch.no_grad():
            err = (model(xv) - yv).abs().numpy()
        mae_mpap, mae_pvr = float(err[:, 0].mean()), float(err[:, 1].mean())
        score = mae_mpap / sigma[0] + mae_pvr / sigma[1]
        if score < best["score"]:
            best = {
                "score": score, "epoch": epoch,
                "state": {k: v.clone() for k, v in model.state_dict().items()},
                "mae_mpap": mae_mpap, "mae_pvr": mae_pvr,
            }

    return {
        "kind": "mlp-tabular",
        "features_version": FEATURES_VERSION,
        "feature_order": list(FEATURE_ORDER),
        "mlp_config": config.to_dict(),
        "standardization": {"mean": mean.tolist(), "std": std.tolist(),
                            "min": fmin.tolist(), "max": fmax.tolist()},
        "model_state": best["state"],
        "best": {"epoch": best["epoch"], "score": best["score"],
                 "mae_mpap": best["mae_mpap"], "mae_pvr": best["mae_pvr"]},
    }


def train_mlp_baseline(dataset_dir: str | Path, config: MlpConfig, out_path: str | Path) -> Path:
    """Train from a generated dataset's train/val splits; cases with missing
    features are excluded (count recorded in the checkpoint)."""
    cohort = DiskCohort(dataset_dir)

    def split_arrays(split):
        feats, targs, skipped = [], [], 0
        for cid in cohort.ids(split):
            record = cohort.load(cid)
            try:
                feats.append(features_from_record(record))
            except MissingFeaturesError:
                skipped += 1
                continue
            targs.append((record.rhc.mpap, record.rhc.pvr))
        return np.array(feats), np.array(targs), skipped

    x, y, skipped_train = split_arrays("train")
    xv, yv, skipped_val = split_arrays("val")
    if len(x) == 0 or len(xv) == 0:
        raise ValueError("train and val splits must contain usable cases")
    payload = fit_mlp(x, y, xv, yv, config)
    payload["excluded_cases"] = {"train": skipped_train, "val": skipped_val}
    out_path = Path(out_path)
    save_checkpoint(out_path, payload)
    return out_path


def load_mlp(checkpoint_path: str | Path) -> tuple[TabularMlp, dict]:
    payload = load_checkpoint(checkpoint_path)
    if payload.get("kind") != "mlp-tabular":
        raise ValueError(f"not a tabular checkpoint: kind={payload.get('kind')!r}")
    model = TabularMlp(payload["mlp_config"]["hidden"])
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, payload


def predict_mlp(
    model: TabularMlp, payload: dict, features: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Standardize exactly as stored and predict. Returns (predictions (N,2),
    extrapolation flags (N,)) where a flag marks any feature outside the
    training range."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    stats = payload["standardization"]
    mean, std = np.array(stats["mean"]), np.array(stats["std"])
    fmin, fmax = np.array(stats["min"]), np.array(stats["max"])
    extrapolating = ((features < fmin) | (features > fmax)).any(axis=1)
    x = torch.tensor((features - mean) / std, dtype=torch.float32)
    with torch.no_grad():
        preds = model(x).numpy()
    return preds, extrapolating
