"""Shared test oracles: finite differences, straight-line attention, pairwise AUC."""
import numpy as np
import torch


def max_rel_grad_err(scalar_fn, params, n_coords=6, eps=1e-5, seed=0):
    """Worst relative error between autograd and central finite differences.

    Samples up to n_coords coordinates per parameter tensor. scalar_fn must
    rebuild the loss from the current parameter values on every call.
    """
    rng = np.random.default_rng(seed)
    loss = scalar_fn()
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    worst = 0.0
    for p, g in zip(params, grads):
        if g is None:
            continue
        flat = p.detach().reshape(-1)
        gflat = g.detach().reshape(-1)
        n = min(n_coords, flat.numel())
        idxs = rng.choice(flat.numel(), size=n, replace=False)
        for i in idxs:
            orig = flat[i].item()
            with torch.no_grad():
                flat[i] = orig + eps
                lp = scalar_fn().item()
                flat[i] = orig - eps
                lm = scalar_fn().item()
                flat[i] = orig
            fd = (lp - lm) / (2 * eps)
            a = gflat[i].item()
            if max(abs(a), abs(fd)) < 1e-7:
                continue
            worst = max(worst, abs(a - fd) / max(abs(a), abs(fd)))
    return worst


def attention_oracle(x: np.ndarray, mlp_params) -> np.ndarray:
    """Step-by-step channel attention: pool, MLP twice, add, sigmoid, gate.

    mlp_params is [(W1, b1), (W2, b2), (W3, b3)] with W of shape (out, in).
    """
    def mlp(v):
        (w1, b1), (w2, b2), (w3, b3) = mlp_params
        v = np.maximum(v @ w1.T + b1, 0.0)
        v = np.maximum(v @ w2.T + b2, 0.0)
        return v @ w3.T + b3

    avg = x.mean(axis=(2, 3))
    mx = x.max(axis=(2, 3))
    gate = 1.0 / (1.0 + np.exp(-(mlp(avg) + mlp(mx))))
    return gate[:, :, None, None] * x


def pairwise_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random outlier outscores a random inlier; ties count 1/2."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for s in pos:
        wins += (s > neg).sum() + 0.5 * (s == neg).sum()
    return wins / (len(pos) * len(neg))
