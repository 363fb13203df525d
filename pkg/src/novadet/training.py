"""Alternating adversarial training of discriminator and generator."""
import copy
import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional
import warnings

import numpy as np
import torch
from torch.optim import Adam

from .exceptions import (CheckpointVersionError, ConfigurationError,
                         DataIntegrityError, NumericError)
from .losses import (LossReport, LossWeights, adversarial_losses, context_loss,
                     entropy_loss, feature_loss, total_generator_loss)
from .networks import ModelConfig, build_models
from .pipeline import OneClassSplit, inject_noise

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 15
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    weights: LossWeights = field(default_factory=LossWeights)
    noise_sigma: float = 0.1
    use_entropy: bool = True
    select_best: bool = True
    grad_clip: float = 0.0
    device: str = "cpu"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigurationError("batch_size and epochs must be >= 1")

    def effective_weights(self) -> LossWeights:
        w = self.weights
        if self.use_entropy:
            return w
        return LossWeights(w.lambda_adv, w.lambda_con, w.lambda_fea, 0.0)


def config_fingerprint(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _require_finite(value: torch.Tensor, step: int, component: str):
    if not torch.isfinite(value).all():
        raise NumericError(f"non-finite {component} loss at step {step}")


class Trainer:
    """Owns both networks and their optimizers; single writer of all state."""

    def __init__(self, model_cfg: ModelConfig, cfg: TrainConfig):
        self.model_cfg = model_cfg
        self.cfg = cfg
        self.gen, self.disc = build_models(model_cfg, cfg.seed)
        self.gen.to(cfg.device)
        self.disc.to(cfg.device)
        betas = (cfg.adam_beta1, cfg.adam_beta2)
        self.opt_g = Adam(self.gen.parameters(), lr=cfg.learning_rate,
                          betas=betas, eps=cfg.adam_eps)
        self.opt_d = Adam(self.disc.parameters(), lr=cfg.learning_rate,
                          betas=betas, eps=cfg.adam_eps)
        self.noise_rng = torch.Generator(device=cfg.device).manual_seed(cfg.seed + 1)
        self.step = 0

    def train_step(self, batch: torch.Tensor):
        """One discriminator update followed by one generator update.

        Returns (LossReport, d_loss) for the batch.
        """
        cfg = self.cfg
        x = batch.to(cfg.device)
        self.gen.train()
        self.disc.train()
        x_noisy = inject_noise(x, cfg.noise_sigma, self.noise_rng)
        x_hat, h = self.gen(x_noisy)

        prob_real, _ = self.disc(x)
        prob_fake, _ = self.disc(x_hat.detach())
        d_loss, _ = adversarial_losses(prob_real, prob_fake)
        _require_finite(d_loss, self.step, "discriminator")
        self.opt_d.zero_grad()
        d_loss.backward()
        if cfg.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(self.disc.parameters(), cfg.grad_clip)
        self.opt_d.step()

        prob_fake2, feat_fake = self.disc(x_hat)
        with torch.no_grad():
            _, feat_real = self.disc(x)
        _, adv = adversarial_losses(prob_real.detach(), prob_fake2)
        con = context_loss(x, x_hat)
        fea = feature_loss(feat_real, feat_fake)
        inf = entropy_loss(h)
        for name, value in (("adversarial", adv), ("context", con),
                            ("feature", fea), ("entropy", inf)):
            _require_finite(value, self.step, name)
        total = total_generator_loss(adv, con, fea, inf, cfg.effective_weights())
        self.opt_g.zero_grad()
        total.backward()
        if cfg.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(self.gen.parameters(), cfg.grad_clip)
        self.opt_g.step()
        self.step += 1

        report = LossReport(adv=adv.item(), con=con.item(), fea=fea.item(),
                            inf=inf.item(), total=total.item())
        return report, d_loss.item()

    @torch.no_grad()
    def validate(self, val_x: np.ndarray) -> float:
        """Mean combined generator loss over clean validation inliers."""
        if len(val_x) == 0:
            raise ConfigurationError("validation set is empty")
        cfg = self.cfg
        self.gen.eval()
        self.disc.eval()
        w = cfg.effective_weights()
        total, count = 0.0, 0
        for start in range(0, len(val_x), cfg.batch_size):
            x = torch.from_numpy(val_x[start:start + cfg.batch_size]).to(cfg.device)
            x_hat, h = self.gen(x)
            prob_fake, feat_fake = self.disc(x_hat)
            _, feat_real = self.disc(x)
            adv = -torch.log(prob_fake.clamp(1e-7, 1 - 1e-7)).mean()
            con = context_loss(x, x_hat)
            fea = feature_loss(feat_real, feat_fake)
            inf = entropy_loss(h)
            batch_total = total_generator_loss(adv, con, fea, inf, w).item()
            total += batch_total * len(x)
            count += len(x)
        return total / count


@dataclass
class Checkpoint:
    generator_state: dict
    discriminator_state: dict
    opt_g_state: dict
    opt_d_state: dict
    epoch: int
    model_cfg: dict
    config_fingerprint: str
    version: int = CHECKPOINT_VERSION


def fit(split: OneClassSplit, model_cfg: ModelConfig, cfg: TrainConfig,
        log_path: Optional[Path] = None, fingerprint: str = "") -> Checkpoint:
    """Train on the split's inliers and return the selected checkpoint.

    Retains the epoch with the lowest validation loss when select_best is
    on (and a validation set exists), else the final epoch. Per-epoch loss
    records go to log_path as JSON lines.
    """
    if len(split.train_x) == 0:
        raise ConfigurationError("training split is empty")
    if split.in_channels != model_cfg.in_channels:
        raise ConfigurationError(
            f"split has {split.in_channels} channels but model expects {model_cfg.in_channels}")
    trainer = Trainer(model_cfg, cfg)
    shuffle_rng = np.random.default_rng(cfg.seed + 2)
    has_val = len(split.val_x) > 0
    best_val = math.inf
    best_state = None
    best_epoch = 0
    log_file = open(log_path, "a") if log_path is not None else None
    try:
        for epoch in range(1, cfg.epochs + 1):
            order = shuffle_rng.permutation(len(split.train_x))
            sums = np.zeros(5)
            batches = 0
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                batch = torch.from_numpy(split.train_x[idx])
                report, _ = trainer.train_step(batch)
                sums += [report.adv, report.con, report.fea, report.inf, report.total]
                batches += 1
            means = sums / batches
            val = trainer.validate(split.val_x) if has_val else float(means[4])
            if log_file is not None:
                record = {"epoch": epoch, "adv": means[0], "con": means[1],
                          "fea": means[2], "inf": means[3], "total": means[4],
                          "val": val}
                log_file.write(json.dumps(record) + "\n")
                log_file.flush()
            if not cfg.select_best or val < best_val:
                best_val = val
                best_epoch = epoch
                best_state = (copy.deepcopy(trainer.gen.state_dict()),
                              copy.deepcopy(trainer.disc.state_dict()))
    finally:
        if log_file is not None:
            log_file.close()
    gen_state, disc_state = best_state
    return Checkpoint(
        generator_state=gen_state,
        discriminator_state=disc_state,
        opt_g_state=trainer.opt_g.state_dict(),
        opt_d_state=trainer.opt_d.state_dict(),
        epoch=best_epoch,
        model_cfg=asdict(model_cfg),
        config_fingerprint=fingerprint,
    )


def save_checkpoint(ckpt: Checkpoint, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(asdict(ckpt), path)


def load_checkpoint(path, expected_fingerprint: Optional[str] = None) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise DataIntegrityError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise DataIntegrityError(f"checkpoint {path} has no version field")
    if payload["version"] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint version {payload['version']} unsupported "
            f"(expected {CHECKPOINT_VERSION})")
    ckpt = Checkpoint(**payload)
    if expected_fingerprint and ckpt.config_fingerprint and \
            ckpt.config_fingerprint != expected_fingerprint:
        warnings.warn("checkpoint config fingerprint does not match the supplied config")
    return ckpt


def models_from_checkpoint(ckpt: Checkpoint):
    """Rebuild generator and discriminator with the checkpoint's weights."""
    model_cfg = ModelConfig(**ckpt.model_cfg)
    gen, disc = build_models(model_cfg, seed=0)
    gen.load_state_dict(ckpt.generator_state)
    disc.load_state_dict(ckpt.discriminator_state)
    gen.eval()
    disc.eval()
    return gen, disc, model_cfg
