"""Shared test oracles: central finite differences, permutation tooling."""

from __future__ import annotations

import itertools

import torch


def finite_diff_grad(f, x: torch.Tensor, eps: float = 1e-6) -> torch.Tensor:
    """Central finite-difference gradient of scalar f() w.r.t. tensor x,
    mutating x in place between evaluations. x must be float64."""
    assert x.dtype == torch.float64
    grad = torch.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.numel()):
        orig = flat[i].item()
        flat[i] = orig + eps
        fp = float(f())
        flat[i] = orig - eps
        fm = float(f())
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def rel_error(a: torch.Tensor, b: torch.Tensor) -> float:
    a, b = a.detach(), b.detach()
    denom = max(float(b.norm()), 1e-12)
    return float((a - b).norm()) / denom


def check_grad(loss_fn, params: list[torch.Tensor], tol: float = 1e-4) -> float:
    """Compare autograd gradients of loss_fn() against central finite
    differences for every tensor in params; returns the worst relative error."""
    for p in params:
        if p.grad is not None:
            p.grad = None
    loss = loss_fn()
    loss.backward()
    worst = 0.0
    for p in params:
        analytic = p.grad.detach().clone()
        with torch.no_grad():
            numeric = finite_diff_grad(lambda: loss_fn().detach(), p.data)
        err = rel_error(analytic, numeric)
        worst = max(worst, err)
        assert err < tol, f"gradient mismatch: rel err {err:.3e} >= {tol}"
    return worst


def derangements(n: int):
    for perm in itertools.permutations(range(n)):
        if all(perm[i] != i for i in range(n)):
            yield perm
