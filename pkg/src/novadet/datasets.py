"""Readers for the native dataset file formats.

MNIST ships as big-endian IDX files, CIFAR-10 as 3073-byte binary records
(1 label byte + 3072 channel-planar RGB bytes), COIL-100 as a directory of
obj{K}__{angle}.png images. Nothing here touches the network; paths come
from config.
"""
import gzip
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .exceptions import DataIntegrityError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

DATASET_CHANNELS = {"mnist": 1, "cifar10": 3, "coil100": 3}
DATASET_CLASSES = {"mnist": 10, "cifar10": 10, "coil100": 100}


@dataclass
class RawDataset:
    """8-bit images with class labels, NHWC layout.

    MNIST/CIFAR-10 carry the official train/test split; COIL-100 has no
    official split (test_images is None) and is split per experiment.
    """
    name: str
    train_images: np.ndarray
    train_labels: np.ndarray
    test_images: Optional[np.ndarray]
    test_labels: Optional[np.ndarray]
    num_classes: int


def _open_maybe_gzip(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _find_file(root: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        p = root / name
        if p.exists():
            return p
    raise FileNotFoundError(f"missing dataset file: {root / stem}[.gz]")


def read_idx_images(path: Path) -> np.ndarray:
    with _open_maybe_gzip(path) as f:
        header = f.read(16)
        if len(header) < 16:
            raise DataIntegrityError(f"truncated IDX header in {path}")
        magic, count, rows, cols = struct.unpack(">iiii", header)
        if magic != IDX_IMAGE_MAGIC:
            raise DataIntegrityError(f"bad IDX image magic {magic:#010x} in {path}")
        data = f.read(count * rows * cols)
        if len(data) != count * rows * cols:
            raise DataIntegrityError(f"truncated IDX image data in {path}")
        return np.frombuffer(data, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: Path) -> np.ndarray:
    with _open_maybe_gzip(path) as f:
        header = f.read(8)
        if len(header) < 8:
            raise DataIntegrityError(f"truncated IDX header in {path}")
        magic, count = struct.unpack(">ii", header)
        if magic != IDX_LABEL_MAGIC:
            raise DataIntegrityError(f"bad IDX label magic {magic:#010x} in {path}")
        data = f.read(count)
        if len(data) != count:
            raise DataIntegrityError(f"truncated IDX label data in {path}")
        return np.frombuffer(data, dtype=np.uint8)


def load_mnist(root) -> RawDataset:
    root = Path(root)
    train_x = read_idx_images(_find_file(root, "train-images-idx3-ubyte"))
    train_y = read_idx_labels(_find_file(root, "train-labels-idx1-ubyte"))
    test_x = read_idx_images(_find_file(root, "t10k-images-idx3-ubyte"))
    test_y = read_idx_labels(_find_file(root, "t10k-labels-idx1-ubyte"))
    if len(train_x) != len(train_y) or len(test_x) != len(test_y):
        raise DataIntegrityError("MNIST image/label counts disagree")
    return RawDataset("mnist", train_x[..., None], train_y.astype(np.int64),
                      test_x[..., None], test_y.astype(np.int64), 10)


def _read_cifar_batch(path: Path):
    raw = path.read_bytes()
    if len(raw) % 3073 != 0:
        raise DataIntegrityError(f"CIFAR-10 batch {path} is not a multiple of 3073 bytes")
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3073)
    labels = records[:, 0].astype(np.int64)
    # channel-planar RGB -> NHWC
    images = records[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1)
    return images, labels


def load_cifar10(root) -> RawDataset:
    root = Path(root)
    if (root / "cifar-10-batches-bin").is_dir():
        root = root / "cifar-10-batches-bin"
    train_parts = []
    for i in range(1, 6):
        p = root / f"data_batch_{i}.bin"
        if not p.exists():
            raise FileNotFoundError(f"missing dataset file: {p}")
        train_parts.append(_read_cifar_batch(p))
    test_path = root / "test_batch.bin"
    if not test_path.exists():
        raise FileNotFoundError(f"missing dataset file: {test_path}")
    test_x, test_y = _read_cifar_batch(test_path)
    train_x = np.concatenate([x for x, _ in train_parts])
    train_y = np.concatenate([y for _, y in train_parts])
    return RawDataset("cifar10", train_x, train_y, test_x, test_y, 10)


_COIL_NAME = re.compile(r"obj(\d+)__(\d+)\.(png|ppm)$")


def load_coil100(root) -> RawDataset:
    root = Path(root)
    if (root / "coil-100").is_dir():
        root = root / "coil-100"
    images, labels = [], []
    for path in sorted(root.iterdir()):
        m = _COIL_NAME.match(path.name)
        if not m:
            continue
        obj = int(m.group(1))
        with Image.open(path) as im:
            images.append(np.asarray(im.convert("RGB"), dtype=np.uint8))
        labels.append(obj - 1)  # obj numbering is 1-based
    if not images:
        raise FileNotFoundError(f"no COIL-100 images (obj*__*.png) found under {root}")
    x = np.stack(images)
    y = np.asarray(labels, dtype=np.int64)
    return RawDataset("coil100", x, y, None, None, int(y.max()) + 1)


_LOADERS = {"mnist": load_mnist, "cifar10": load_cifar10, "coil100": load_coil100}


def load_dataset(name: str, root) -> RawDataset:
    if name not in _LOADERS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {sorted(_LOADERS)}")
    return _LOADERS[name](root)
