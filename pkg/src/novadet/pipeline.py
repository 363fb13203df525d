"""Preprocessing, noise injection and one-class train/val/test splits."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from .datasets import RawDataset
from .exceptions import ConfigurationError

IMAGE_SIZE = 32


def preprocess(images: np.ndarray, size: int = IMAGE_SIZE) -> np.ndarray:
    """Raw 8-bit NHWC images -> float32 NCHW in [-1, 1] at the target size.

    Bilinear resize where the source resolution differs (MNIST 28->32,
    COIL-100 128->32). Already-processed float input passes through
    unchanged, so the map is idempotent.
    """
    images = np.asarray(images)
    if images.dtype == np.uint8:
        x = torch.from_numpy(images.astype(np.float32)).permute(0, 3, 1, 2)
        x = x / 127.5 - 1.0
    else:
        x = torch.as_tensor(images, dtype=torch.float32)
    if x.shape[-1] != size or x.shape[-2] != size:
        x = F.interpolate(x, size=(size, size), mode="bilinear", align_corners=False)
    return x.numpy()


def inject_noise(x: torch.Tensor, sigma: float, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """Add zero-mean Gaussian pixel noise and clip back to [-1, 1]."""
    if sigma < 0:
        raise ConfigurationError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return x
    noise = torch.empty_like(x).normal_(0.0, sigma, generator=generator)
    return (x + noise).clamp(-1.0, 1.0)


@dataclass
class OneClassSplit:
    """Inlier-only train/val sets plus a labeled test set (y=1 marks outliers).

    Index arrays refer back to the source dataset and exist so leakage and
    purity can be checked.
    """
    inlier_class: int
    train_x: np.ndarray
    val_x: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    in_channels: int = field(init=False)

    def __post_init__(self):
        self.in_channels = int(self.train_x.shape[1])


VAL_FRACTION = 0.15
COIL_TEST_FRACTION = 0.20


def _carve_validation(indices: np.ndarray, rng: np.random.Generator):
    """Split inlier indices into (train, val); val is a random 15% (floor)."""
    perm = rng.permutation(indices)
    n_val = int(VAL_FRACTION * len(perm))
    return perm[n_val:], perm[:n_val]


def make_one_class_split(raw: RawDataset, inlier_class: int, seed: int) -> OneClassSplit:
    """Official-split protocol (MNIST / CIFAR-10).

    Train on the official training samples of the inlier class (minus the
    validation carve-out); test on the entire official test split.
    """
    if raw.test_images is None:
        raise ConfigurationError(f"dataset {raw.name} has no official test split; "
                                 "use make_coil_split")
    if not 0 <= inlier_class < raw.num_classes:
        raise ConfigurationError(f"inlier class {inlier_class} out of range for {raw.name}")
    rng = np.random.default_rng(seed)
    inlier_idx = np.flatnonzero(raw.train_labels == inlier_class)
    train_idx, val_idx = _carve_validation(inlier_idx, rng)
    test_idx = np.arange(len(raw.test_labels))
    test_y = (raw.test_labels != inlier_class).astype(np.int64)
    return OneClassSplit(
        inlier_class=inlier_class,
        train_x=preprocess(raw.train_images[train_idx]),
        val_x=preprocess(raw.train_images[val_idx]),
        test_x=preprocess(raw.test_images),
        test_y=test_y,
        train_idx=train_idx, val_idx=val_idx, test_idx=test_idx,
    )


def make_coil_split(raw: RawDataset, inlier_class: int, seed: int) -> OneClassSplit:
    """COIL-100 protocol: 80/20 inlier split, outliers fill half the test set.

    20% of the inlier views (rounded up) go to the test set as inliers; an
    equal number of outlier images is drawn uniformly from the other
    classes. Fully determined by seed.
    """
    if not 0 <= inlier_class < raw.num_classes:
        raise ConfigurationError(f"inlier class {inlier_class} out of range for {raw.name}")
    rng = np.random.default_rng(seed)
    inlier_idx = np.flatnonzero(raw.train_labels == inlier_class)
    perm = rng.permutation(inlier_idx)
    n_test_in = int(np.ceil(COIL_TEST_FRACTION * len(perm)))
    test_in = perm[:n_test_in]
    train_pool = perm[n_test_in:]
    n_val = int(VAL_FRACTION * len(train_pool))
    val_idx, train_idx = train_pool[:n_val], train_pool[n_val:]
    outlier_pool = np.flatnonzero(raw.train_labels != inlier_class)
    test_out = rng.choice(outlier_pool, size=n_test_in, replace=False)
    test_idx = np.concatenate([test_in, test_out])
    test_y = np.concatenate([np.zeros(len(test_in), dtype=np.int64),
                             np.ones(len(test_out), dtype=np.int64)])
    return OneClassSplit(
        inlier_class=inlier_class,
        train_x=preprocess(raw.train_images[train_idx]),
        val_x=preprocess(raw.train_images[val_idx]),
        test_x=preprocess(raw.train_images[test_idx]),
        test_y=test_y,
        train_idx=train_idx, val_idx=val_idx, test_idx=test_idx,
    )


def make_split(raw: RawDataset, inlier_class: int, seed: int) -> OneClassSplit:
    if raw.name == "coil100":
        return make_coil_split(raw, inlier_class, seed)
    return make_one_class_split(raw, inlier_class, seed)
