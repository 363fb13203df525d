"""One-class novelty detection with an adversarial denoising auto-encoder,
channel attention and latent entropy minimization."""

from .attention import ChannelAttention
from .config import ExperimentConfig, parse_config
from .datasets import load_dataset
from .estimator import NoveltyDetector
from .losses import (LossReport, LossWeights, adversarial_losses, context_loss,
                     entropy_loss, feature_loss, total_generator_loss)
from .networks import Discriminator, Generator, ModelConfig, build_models
from .pipeline import (OneClassSplit, inject_noise, make_coil_split,
                       make_one_class_split, make_split, preprocess)
from .scoring import (EvalReport, ablation_suite, compute_auc, evaluate,
                      evaluate_coil, normalize_scores, novelty_score, roc_points)
from .training import (Checkpoint, TrainConfig, Trainer, fit, load_checkpoint,
                       models_from_checkpoint, save_checkpoint)

__version__ = "0.1.0"
