"""Synthetic stand-in datasets written in the native file formats.

Each class gets a distinct oriented grating plus a class-positioned blob,
so the images are learnable by a small auto-encoder while still exercising
the exact on-disk formats (IDX, CIFAR-10 binary batches, COIL-100 PNG
directory). Used by tests and demos when the real datasets are not on
disk.
"""
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .datasets import IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC


def _class_image(h: int, w: int, cls: int, num_classes: int, rng: np.random.Generator,
                 angle_offset: float = 0.0) -> np.ndarray:
    yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    theta = np.pi * cls / num_classes + angle_offset
    freq = 3.0 + (cls % 5)
    phase = rng.uniform(0, 2 * np.pi)
    grating = np.sin(2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta)) + phase)
    cy = 0.2 + 0.6 * ((cls * 7) % num_classes) / num_classes
    cx = 0.2 + 0.6 * ((cls * 3) % num_classes) / num_classes
    blob = np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / 0.02))
    img = 0.5 + 0.25 * grating + 0.4 * blob + rng.normal(0, 0.05, size=(h, w))
    return (np.clip(img, 0, 1) * 255).astype(np.uint8)


def _make_class_set(h, w, per_class, num_classes, rng, channels=1):
    images, labels = [], []
    for cls in range(num_classes):
        for _ in range(per_class):
            if channels == 1:
                images.append(_class_image(h, w, cls, num_classes, rng))
            else:
                # per-channel phase shifts give each class a color signature
                chans = [_class_image(h, w, cls, num_classes, rng, angle_offset=0.1 * c)
                         for c in range(channels)]
                images.append(np.stack(chans, axis=-1))
            labels.append(cls)
    order = rng.permutation(len(images))
    x = np.stack(images)[order]
    y = np.asarray(labels, dtype=np.uint8)[order]
    return x, y


def _write_idx_images(path: Path, images: np.ndarray):
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, n, h, w))
        f.write(images.tobytes())


def _write_idx_labels(path: Path, labels: np.ndarray):
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", IDX_LABEL_MAGIC, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def write_synthetic_mnist(root, per_class_train=60, per_class_test=20, seed=0):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    train_x, train_y = _make_class_set(28, 28, per_class_train, 10, rng)
    test_x, test_y = _make_class_set(28, 28, per_class_test, 10, rng)
    _write_idx_images(root / "train-images-idx3-ubyte", train_x)
    _write_idx_labels(root / "train-labels-idx1-ubyte", train_y)
    _write_idx_images(root / "t10k-images-idx3-ubyte", test_x)
    _write_idx_labels(root / "t10k-labels-idx1-ubyte", test_y)
    return root


def write_synthetic_cifar10(root, per_class_train=50, per_class_test=10, seed=0):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    train_x, train_y = _make_class_set(32, 32, per_class_train, 10, rng, channels=3)
    test_x, test_y = _make_class_set(32, 32, per_class_test, 10, rng, channels=3)

    def write_batch(path, x, y):
        # 3073-byte records: label byte + channel-planar RGB
        planar = x.transpose(0, 3, 1, 2).reshape(len(x), -1)
        records = np.concatenate([y[:, None], planar], axis=1).astype(np.uint8)
        path.write_bytes(records.tobytes())

    chunks = np.array_split(np.arange(len(train_x)), 5)
    for i, idx in enumerate(chunks, start=1):
        write_batch(root / f"data_batch_{i}.bin", train_x[idx], train_y[idx])
    write_batch(root / "test_batch.bin", test_x, test_y)
    return root


def write_synthetic_coil100(root, num_classes=100, views=12, seed=0, image_size=128):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for cls in range(num_classes):
        for v in range(views):
            angle = v * (360 // views)
            chans = [_class_image(image_size, image_size, cls, num_classes, rng,
                                  angle_offset=0.1 * c + np.deg2rad(angle) / 20)
                     for c in range(3)]
            img = np.stack(chans, axis=-1)
            Image.fromarray(img).save(root / f"obj{cls + 1}__{angle}.png")
    return root
