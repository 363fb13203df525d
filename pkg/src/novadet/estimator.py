"""Scikit-learn style wrapper around the full training and scoring pipeline."""
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigurationError
from .losses import LossWeights
from .networks import ModelConfig
from .pipeline import OneClassSplit
from .scoring import novelty_score
from .training import Checkpoint, TrainConfig, fit, models_from_checkpoint


def _as_image_batch(X) -> np.ndarray:
    X = check_array(X, allow_nd=True, dtype=np.float32)
    if X.ndim == 3:
        X = X[:, None, :, :]
    if X.ndim != 4 or X.shape[1] not in (1, 3):
        raise ConfigurationError(
            f"expected (N, H, W) or (N, C, H, W) with C in {{1, 3}}, got {X.shape}")
    if X.min() < -1 - 1e-6 or X.max() > 1 + 1e-6:
        raise ConfigurationError("pixel values must be scaled to [-1, 1]")
    return X


class NoveltyDetector(OutlierMixin, BaseEstimator):
    """One-class novelty detector following the sklearn outlier API.

    fit() trains the adversarial denoising auto-encoder on inlier images
    only. score_samples() follows the sklearn convention (higher = more
    normal); novelty_scores() returns the raw score where higher = more
    novel. predict() returns +1 for inliers and -1 for outliers using a
    threshold at the `contamination` quantile of the training scores.

    Images must be (N, H, W) or (N, C, H, W) arrays scaled to [-1, 1] with
    H = W divisible by 2**len(enc_channels).
    """

    def __init__(self, latent_dim=128, reduction=16,
                 enc_channels=(64, 128, 256, 256), disc_channels=(64, 128, 256),
                 use_attention=True, use_entropy=True,
                 lambda_adv=1.0, lambda_con=40.0, lambda_fea=1.0, lambda_inf=1.0,
                 score_lambda=0.9, learning_rate=1e-3, batch_size=64, epochs=15,
                 noise_sigma=0.1, contamination=0.1, select_best=True,
                 random_state=0):
        self.latent_dim = latent_dim
        self.reduction = reduction
        self.enc_channels = enc_channels
        self.disc_channels = disc_channels
        self.use_attention = use_attention
        self.use_entropy = use_entropy
        self.lambda_adv = lambda_adv
        self.lambda_con = lambda_con
        self.lambda_fea = lambda_fea
        self.lambda_inf = lambda_inf
        self.score_lambda = score_lambda
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.noise_sigma = noise_sigma
        self.contamination = contamination
        self.select_best = select_best
        self.random_state = random_state

    def fit(self, X, y=None):
        """Train on inlier images; y is ignored and exists for API compatibility."""
        X = _as_image_batch(X)
        n, c, h, w = X.shape
        if h != w:
            raise ConfigurationError(f"images must be square, got {h}x{w}")
        model_cfg = ModelConfig(
            in_channels=c, image_size=h,
            enc_channels=tuple(self.enc_channels),
            disc_channels=tuple(self.disc_channels),
            latent_dim=self.latent_dim, reduction=self.reduction,
            use_attention=self.use_attention)
        train_cfg = TrainConfig(
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            epochs=self.epochs, seed=self.random_state,
            weights=LossWeights(self.lambda_adv, self.lambda_con,
                                self.lambda_fea, self.lambda_inf),
            noise_sigma=self.noise_sigma, use_entropy=self.use_entropy,
            select_best=self.select_best)
        rng = np.random.default_rng(self.random_state)
        perm = rng.permutation(n)
        n_val = int(0.15 * n)
        split = OneClassSplit(
            inlier_class=0,
            train_x=X[perm[n_val:]], val_x=X[perm[:n_val]],
            test_x=np.empty((0, c, h, w), dtype=np.float32),
            test_y=np.empty(0, dtype=np.int64),
            train_idx=perm[n_val:], val_idx=perm[:n_val],
            test_idx=np.empty(0, dtype=np.int64))
        self.checkpoint_: Checkpoint = fit(split, model_cfg, train_cfg)
        self.generator_, self.discriminator_, self.model_config_ = \
            models_from_checkpoint(self.checkpoint_)
        train_scores = self.novelty_scores(X)
        self.offset_ = float(np.quantile(-train_scores, self.contamination))
        return self

    def novelty_scores(self, X) -> np.ndarray:
        """Raw novelty score per sample; higher means more novel."""
        check_is_fitted(self, "generator_")
        X = _as_image_batch(X)
        return novelty_score(X, self.generator_, self.discriminator_,
                             self.score_lambda)

    def score_samples(self, X) -> np.ndarray:
        return -self.novelty_scores(X)

    def decision_function(self, X) -> np.ndarray:
        return self.score_samples(X) - self.offset_

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) < 0, -1, 1)
