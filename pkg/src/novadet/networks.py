"""Generator (denoising auto-encoder with channel attention) and discriminator.

Both networks are DCGAN-scale convolutional stacks for 32x32 inputs. The
encoder halves the spatial dims per block; the decoder mirrors it exactly.
The discriminator exposes its flattened penultimate activation as the
feature tap used by the feature-matching loss.
"""
from dataclasses import dataclass, field
from typing import Tuple

import torch
import torch.nn as nn

from .attention import ChannelAttention
from .exceptions import ConfigurationError, NumericError


@dataclass
class ModelConfig:
    in_channels: int = 1
    image_size: int = 32
    enc_channels: Tuple[int, ...] = (64, 128, 256, 256)
    latent_dim: int = 128
    reduction: int = 16
    disc_channels: Tuple[int, ...] = (64, 128, 256)
    use_attention: bool = True

    def __post_init__(self):
        self.enc_channels = tuple(self.enc_channels)
        self.disc_channels = tuple(self.disc_channels)
        if self.in_channels not in (1, 3):
            raise ConfigurationError(f"in_channels must be 1 or 3, got {self.in_channels}")
        if self.latent_dim < 2:
            raise ConfigurationError("latent_dim must be >= 2")
        for depth, name in ((len(self.enc_channels), "enc_channels"),
                            (len(self.disc_channels), "disc_channels")):
            if self.image_size % (2 ** depth) != 0 or self.image_size // (2 ** depth) < 1:
                raise ConfigurationError(
                    f"image_size {self.image_size} incompatible with {name} depth {depth}"
                )
        if self.use_attention:
            for c in self.enc_channels:
                if c % self.reduction != 0:
                    raise ConfigurationError(
                        f"reduction ratio {self.reduction} does not divide block width {c}"
                    )

    @property
    def bottleneck_size(self) -> int:
        return self.image_size // (2 ** len(self.enc_channels))


def _attention(channels: int, cfg: ModelConfig) -> nn.Module:
    return ChannelAttention(channels, cfg.reduction) if cfg.use_attention else nn.Identity()


def _check_finite(x: torch.Tensor, where: str):
    if not torch.isfinite(x).all():
        raise NumericError(f"non-finite activation in {where}")


class Generator(nn.Module):
    """Symmetric encoder/decoder with a latent bottleneck of width latent_dim.

    forward() returns both the reconstruction (tanh-bounded to [-1, 1]) and
    the raw latent code.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        chans = cfg.enc_channels
        enc = []
        prev = cfg.in_channels
        for c in chans:
            enc.append(nn.Sequential(
                nn.Conv2d(prev, c, 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(c, eps=1e-5, momentum=0.1),
                nn.LeakyReLU(0.2),
                _attention(c, cfg),
            ))
            prev = c
        self.encoder = nn.ModuleList(enc)
        k = cfg.bottleneck_size
        self.to_latent = nn.Conv2d(chans[-1], cfg.latent_dim, k, stride=1, padding=0)
        self.from_latent = nn.Sequential(
            nn.ConvTranspose2d(cfg.latent_dim, chans[-1], k, stride=1, padding=0, bias=False),
            nn.BatchNorm2d(chans[-1], eps=1e-5, momentum=0.1),
            nn.ReLU(),
            _attention(chans[-1], cfg),
        )
        dec = []
        rev = list(reversed(chans))
        for i in range(len(rev) - 1):
            dec.append(nn.Sequential(
                nn.ConvTranspose2d(rev[i], rev[i + 1], 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(rev[i + 1], eps=1e-5, momentum=0.1),
                nn.ReLU(),
                _attention(rev[i + 1], cfg),
            ))
        # final block: no batch-norm or attention on the tanh output layer
        dec.append(nn.Sequential(
            nn.ConvTranspose2d(rev[-1], cfg.in_channels, 4, stride=2, padding=1),
            nn.Tanh(),
        ))
        self.decoder = nn.ModuleList(dec)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        for i, block in enumerate(self.encoder):
            x = block(x)
            _check_finite(x, f"encoder block {i}")
        h = self.to_latent(x).flatten(1)
        _check_finite(h, "latent layer")
        return h

    def decode(self, h: torch.Tensor) -> torch.Tensor:
        x = self.from_latent(h[:, :, None, None])
        _check_finite(x, "decoder input block")
        for i, block in enumerate(self.decoder):
            x = block(x)
            _check_finite(x, f"decoder block {i}")
        return x

    def forward(self, x: torch.Tensor):
        h = self.encode(x)
        x_hat = self.decode(h)
        return x_hat, h


class Discriminator(nn.Module):
    """DCGAN-style encoder ending in a scalar probability.

    forward() returns (prob, feat) where feat is the flattened penultimate
    activation used for feature matching.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        chans = cfg.disc_channels
        blocks = []
        prev = cfg.in_channels
        for i, c in enumerate(chans):
            layers = [nn.Conv2d(prev, c, 4, stride=2, padding=1, bias=(i == 0))]
            if i > 0:
                layers.append(nn.BatchNorm2d(c, eps=1e-5, momentum=0.1))
            layers.append(nn.LeakyReLU(0.2))
            blocks.append(nn.Sequential(*layers))
            prev = c
        self.blocks = nn.ModuleList(blocks)
        k = cfg.image_size // (2 ** len(chans))
        self.classifier = nn.Conv2d(chans[-1], 1, k, stride=1, padding=0)

    def forward(self, x: torch.Tensor):
        for i, block in enumerate(self.blocks):
            x = block(x)
            _check_finite(x, f"discriminator block {i}")
        feat = x.flatten(1)
        prob = torch.sigmoid(self.classifier(x)).flatten()
        _check_finite(prob, "discriminator output")
        return prob, feat


def _dcgan_init(module: nn.Module):
    name = module.__class__.__name__
    if "Conv" in name:
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif "BatchNorm" in name:
        nn.init.normal_(module.weight, 1.0, 0.02)
        nn.init.zeros_(module.bias)
    elif isinstance(module, nn.Linear):
        nn.init.normal_(module.weight, 0.0, 0.02)
        nn.init.zeros_(module.bias)


def build_models(cfg: ModelConfig, seed: int) -> Tuple[Generator, Discriminator]:
    """Construct and initialize both networks, deterministically in seed."""
    torch.manual_seed(seed)
    gen = Generator(cfg)
    disc = Discriminator(cfg)
    gen.apply(_dcgan_init)
    disc.apply(_dcgan_init)
    return gen, disc
