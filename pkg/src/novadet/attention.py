"""Channel attention gate used after generator blocks.

Pooled channel descriptors (global average and global max) pass through a
shared three-layer MLP; the summed outputs go through a sigmoid to produce
one multiplicative weight per channel.
"""
import torch
import torch.nn as nn

from .exceptions import ConfigurationError, ShapeError


class ChannelAttention(nn.Module):
    """Per-channel multiplicative gating of a feature map.

    The shared MLP has widths C -> C/R -> C/R -> C with a rectifier between
    layers, so the output width always matches the input channel count.

    Args:
        channels: number of input/output channels C
        reduction: bottleneck ratio R; must divide `channels`
    """

    def __init__(self, channels: int, reduction: int = 16):
        super().__init__()
        if channels % reduction != 0:
            raise ConfigurationError(
                f"reduction ratio {reduction} does not divide channel count {channels}"
            )
        hidden = channels // reduction
        self.channels = channels
        self.reduction = reduction
        self.mlp = nn.Sequential(
            nn.Linear(channels, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, channels),
        )

    def gate(self, x: torch.Tensor) -> torch.Tensor:
        """Channel weights in (0, 1), shape (B, C)."""
        if x.dim() != 4 or x.shape[1] != self.channels:
            raise ShapeError(
                f"expected (B, {self.channels}, H, W) feature map, got {tuple(x.shape)}"
            )
        avg = x.mean(dim=(2, 3))
        mx = x.amax(dim=(2, 3))
        return torch.sigmoid(self.mlp(avg) + self.mlp(mx))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        w = self.gate(x)
        return w[:, :, None, None] * x
