"""Regression metrics and agreement statistics containers."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np


@dataclass
class RegressionMetrics:
    mae: float
    r2: Optional[float]   # None when targets are constant (flagged undefined)
    rmse: float
    n: int
    r2_undefined: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BlandAltmanStats:
    mean_diff: float
    sd_diff: float
    loa_low: float
    loa_high: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AucResult:
    auc: float
    ci_low: float
    ci_high: float
    n_pos: int
    n_neg: int

    def to_dict(self) -> dict:
        return asdict(self)


def regression_metrics(predictions, targets) -> RegressionMetrics:
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise ValueError("predictions and targets must be equal-length 1-D arrays")
    n = len(predictions)
    if n == 0:
        raise ValueError("empty inputs")
    err = predictions - targets
    mae = float(np.abs(err).mean())
    rmse = float(np.sqrt((err**2).mean()))
    ss_tot = float(((targets - targets.mean()) ** 2).sum())
    if n < 2 or ss_tot == 0.0:
        return RegressionMetrics(mae=mae, r2=None, rmse=rmse, n=n, r2_undefined=True)
    r2 = 1.0 - float((err**2).sum()) / ss_tot
    return RegressionMetrics(mae=mae, r2=r2, rmse=rmse, n=n)


def bland_altman(predictions, targets) -> BlandAltmanStats:
    """Agreement stats on diffs = prediction - target: mean difference and the
    mean +/- 1.96 sample-SD limits of agreement."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or len(predictions) < 2:
        raise ValueError("need >= 2 paired values")
    diffs = predictions - targets
    mean = float(diffs.mean())
    sd = float(diffs.std(ddof=1))
    return BlandAltmanStats(
        mean_diff=mean,
        sd_diff=sd,
        loa_low=mean - 1.96 * sd,
        loa_high=mean + 1.96 * sd,
        n=len(diffs),
    )
