"""Training objectives.

The alignment loss is the symmetric contrastive objective over a batch of
(video, profile) embedding pairs: each direction is the mean over the batch of
the cross-entropy of the matched pair against all pairings, and the two
directions are summed. The regression loss is a weighted MSE with the mPAP
term scaled by lambda so the larger-magnitude target does not dominate, and
the total objective is 0.1 * alignment + regression.
"""

from __future__ import annotations

import torch


def alignment_loss(v: torch.Tensor, c: torch.Tensor, temperature: float) -> torch.Tensor:
    """Symmetric contrastive loss on unit-norm rows.

    v, c: (N, D) with unit rows. Similarities s_jk = v_j . c_k are scaled by
    1/temperature; per direction the loss is mean_j of -log softmax(s)_jj, and
    the two directions (video->profile, profile->video) are summed.
    """
    if v.ndim != 2 or v.shape != c.shape:
        raise ValueError(f"expected matching (N, D) batches, got {v.shape} and {c.shape}")
    if v.shape[0] < 1:
        raise ValueError("empty batch")
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    for name, x in (("v", v), ("c", c)):
        norms = x.detach().norm(dim=1)
        if not bool(torch.allclose(norms, torch.ones_like(norms), atol=1e-4)):
            raise ValueError(f"{name} rows must be unit-normalized")
    logits = (v @ c.T) / temperature
    labels = torch.arange(v.shape[0], device=v.device)
    loss_v2c = torch.nn.functional.cross_entropy(logits, labels)
    loss_c2v = torch.nn.functional.cross_entropy(logits.T, labels)
    return loss_v2c + loss_c2v


def weighted_mse(pred: torch.Tensor, target: torch.Tensor, lam: float) -> torch.Tensor:
    """(1/N) * (lam * sum((mpap_hat - mpap)^2) + sum((pvr_hat - pvr)^2)).

    pred/target: (N, 2) with columns (mpap, pvr).
    """
    if pred.shape != target.shape or pred.ndim != 2 or pred.shape[1] != 2:
        raise ValueError(f"expected (N, 2) predictions/targets, got {pred.shape}, {target.shape}")
    if pred.shape[0] == 0:
        raise ValueError("empty batch")
    err = pred - target
    n = pred.shape[0]
    return (lam * (err[:, 0] ** 2).sum() + (err[:, 1] ** 2).sum()) / n


def prediction_loss(
    final: torch.Tensor,
    branch_video: torch.Tensor,
    branch_profile: torch.Tensor,
    target: torch.Tensor,
    lam: float,
) -> torch.Tensor:
    """Supervision on the final output plus the mean of the branch terms."""
    branches = 0.5 * (
        weighted_mse(branch_video, target, lam) + weighted_mse(branch_profile, target, lam)
    )
    return weighted_mse(final, target, lam) + branches


def total_loss(align: torch.Tensor, mse: torch.Tensor, alignment_weight: float = 0.1) -> torch.Tensor:
    if not (torch.isfinite(align) and torch.isfinite(mse)):
        raise ValueError(f"non-finite loss inputs: align={align}, mse={mse}")
    return alignment_weight * align + mse
