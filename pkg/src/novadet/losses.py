"""Training losses: adversarial, context, feature matching, latent entropy.

All functions are differentiable and dtype-generic (float32 training,
float64 in the gradient checks).
"""
import math
from dataclasses import dataclass

import torch

from .exceptions import ConfigurationError, ShapeError

PROB_EPS = 1e-7


@dataclass
class LossWeights:
    """Weights of the combined generator objective."""
    lambda_adv: float = 1.0
    lambda_con: float = 40.0
    lambda_fea: float = 1.0
    lambda_inf: float = 1.0

    def __post_init__(self):
        vals = (self.lambda_adv, self.lambda_con, self.lambda_fea, self.lambda_inf)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ConfigurationError(f"loss weights must be finite and non-negative: {vals}")
        if not any(v > 0 for v in vals):
            raise ConfigurationError("at least one loss weight must be positive")


@dataclass
class LossReport:
    """Per-batch component losses; total is the weighted generator objective."""
    adv: float
    con: float
    fea: float
    inf: float
    total: float


def adversarial_losses(prob_real: torch.Tensor, prob_fake: torch.Tensor):
    """Discriminator loss and non-saturating generator loss.

    Probabilities are clamped to [eps, 1-eps] so the logs stay finite.
    """
    pr = prob_real.clamp(PROB_EPS, 1.0 - PROB_EPS)
    pf = prob_fake.clamp(PROB_EPS, 1.0 - PROB_EPS)
    d_loss = -(torch.log(pr) + torch.log(1.0 - pf)).mean()
    g_loss = -torch.log(pf).mean()
    return d_loss, g_loss


def saturating_adversarial_value(prob_real: torch.Tensor, prob_fake: torch.Tensor) -> torch.Tensor:
    """The literal minimax objective value, for reporting only."""
    pr = prob_real.clamp(PROB_EPS, 1.0 - PROB_EPS)
    pf = prob_fake.clamp(PROB_EPS, 1.0 - PROB_EPS)
    return (torch.log(pr) + torch.log(1.0 - pf)).mean()


def context_loss(x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    """Mean absolute error between input and reconstruction."""
    if x.shape != x_hat.shape:
        raise ShapeError(f"shape mismatch: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return (x - x_hat).abs().mean()


def feature_loss(f_x: torch.Tensor, f_xhat: torch.Tensor) -> torch.Tensor:
    """Mean squared error between discriminator features of x and x_hat."""
    if f_x.shape != f_xhat.shape:
        raise ShapeError(f"shape mismatch: {tuple(f_x.shape)} vs {tuple(f_xhat.shape)}")
    return ((f_x - f_xhat) ** 2).mean()


def entropy_loss(h: torch.Tensor) -> torch.Tensor:
    """Mean Shannon entropy (nats) of the softmax-normalized latent codes."""
    p = torch.softmax(h, dim=1)
    # entr(p) = -p*log(p), with the 0*log(0) = 0 convention on underflow
    return torch.special.entr(p).sum(dim=1).mean()


def per_sample_context(x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    """Per-sample mean absolute error, shape (B,)."""
    if x.shape != x_hat.shape:
        raise ShapeError(f"shape mismatch: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return (x - x_hat).abs().flatten(1).mean(dim=1)


def per_sample_feature(f_x: torch.Tensor, f_xhat: torch.Tensor) -> torch.Tensor:
    """Per-sample mean squared feature distance, shape (B,)."""
    if f_x.shape != f_xhat.shape:
        raise ShapeError(f"shape mismatch: {tuple(f_x.shape)} vs {tuple(f_xhat.shape)}")
    return ((f_x - f_xhat) ** 2).mean(dim=1)


def total_generator_loss(adv, con, fea, inf, w: LossWeights):
    """Weighted sum of the four generator-side components."""
    return (w.lambda_adv * adv + w.lambda_con * con
            + w.lambda_fea * fea + w.lambda_inf * inf)
