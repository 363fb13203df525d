"""Experiment configuration: defaults, flat key=value files, flag overrides."""
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from .exceptions import UsageError
from .losses import LossWeights
from .networks import ModelConfig
from .training import TrainConfig, config_fingerprint

DATASET_BATCH_SIZE = {"mnist": 64, "cifar10": 64, "coil100": 15}
DATASET_EPOCHS = {"mnist": 15, "cifar10": 25, "coil100": 15}


@dataclass
class ExperimentConfig:
    """Every knob of a run; 0 / empty-string fields mean per-dataset default."""
    dataset: str = "mnist"
    inlier_class: int = 1
    data_root: str = "data"
    out_dir: str = "runs/exp"
    seed: int = 0
    seeds: str = ""                 # comma-separated list; empty -> [seed]
    epochs: int = 0                 # 0 -> 15 (mnist/coil100) or 25 (cifar10)
    batch_size: int = 0             # 0 -> 64 (mnist/cifar10) or 15 (coil100)
    learning_rate: float = 1e-3
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    latent_dim: int = 128
    reduction: int = 16
    enc_channels: str = "64,128,256,256"
    disc_channels: str = "64,128,256"
    noise_sigma: float = 0.1
    lambda_adv: float = 1.0
    lambda_con: float = 40.0
    lambda_fea: float = 1.0
    lambda_inf: float = 1.0
    score_lambda: float = 0.9
    use_attention: bool = True
    use_entropy: bool = True
    select_best: bool = True
    grad_clip: float = 0.0
    limit_train: int = 0            # 0 -> use the full training split
    coil_repeats: int = 20
    coil_retrain: bool = True
    checkpoint: str = ""
    device: str = "cpu"

    def resolved_batch_size(self) -> int:
        return self.batch_size or DATASET_BATCH_SIZE.get(self.dataset, 64)

    def resolved_epochs(self) -> int:
        return self.epochs or DATASET_EPOCHS.get(self.dataset, 15)

    def seed_list(self) -> List[int]:
        if not self.seeds.strip():
            return [self.seed]
        return [int(s) for s in self.seeds.split(",") if s.strip()]

    def loss_weights(self) -> LossWeights:
        return LossWeights(self.lambda_adv, self.lambda_con,
                           self.lambda_fea, self.lambda_inf)

    def model_config(self, in_channels: int) -> ModelConfig:
        return ModelConfig(
            in_channels=in_channels,
            enc_channels=tuple(int(c) for c in self.enc_channels.split(",")),
            disc_channels=tuple(int(c) for c in self.disc_channels.split(",")),
            latent_dim=self.latent_dim,
            reduction=self.reduction,
            use_attention=self.use_attention,
        )

    def train_config(self, seed: Optional[int] = None) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.resolved_batch_size(),
            epochs=self.resolved_epochs(),
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
            seed=self.seed if seed is None else seed,
            weights=self.loss_weights(),
            noise_sigma=self.noise_sigma,
            use_entropy=self.use_entropy,
            select_best=self.select_best,
            grad_clip=self.grad_clip,
            device=self.device,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # Fields that locate files or only affect evaluation; they do not shape
    # the trained model and are left out of the checkpoint fingerprint.
    _NON_TRAINING_FIELDS = ("data_root", "out_dir", "checkpoint",
                            "score_lambda", "coil_repeats", "coil_retrain")

    def fingerprint(self) -> str:
        d = {k: v for k, v in self.to_dict().items()
             if k not in self._NON_TRAINING_FIELDS}
        return config_fingerprint(d)

    def echo(self, path):
        """Write the fully-resolved config for provenance."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"{k}={v}" for k, v in sorted(self.to_dict().items())]
        path.write_text("\n".join(lines) + "\n")


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, value: str):
    ftype = _FIELDS[key].type
    value = value.strip()
    if ftype == "bool" or ftype is bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise UsageError(f"config key {key!r}: expected a boolean, got {value!r}")
    try:
        if ftype == "int" or ftype is int:
            return int(value)
        if ftype == "float" or ftype is float:
            return float(value)
    except ValueError:
        raise UsageError(f"config key {key!r}: expected {ftype}, got {value!r}")
    return value


def parse_config(path=None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build a config from an optional flat key=value file plus overrides.

    Overrides (from command-line flags) win over file values. Unknown keys
    in either source are a usage error naming the key.
    """
    values = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _FIELDS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise UsageError(f"unknown config key {key!r}")
        values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return ExperimentConfig(**values)
