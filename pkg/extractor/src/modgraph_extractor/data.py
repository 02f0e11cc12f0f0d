"""Local image dataset handling.

A dataset directory holds two arrays: ``images.npy`` with float32 samples
shaped (N, C, H, W) and ``labels.npy`` with int64 class ids. The toy
synthesizer below produces a learnable classification problem (per-class
spatial templates plus noise) for tests and demos.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class DatasetError(RuntimeError):
    pass


def load_dataset(data_dir) -> tuple[np.ndarray, np.ndarray]:
    data_dir = Path(data_dir)
    images_path, labels_path = data_dir / "images.npy", data_dir / "labels.npy"
    for path in (images_path, labels_path):
        if not path.exists():
            raise DatasetError(f"dataset file missing: {path}")
    images = np.load(images_path)
    labels = np.load(labels_path)
    if images.ndim != 4:
        raise DatasetError(f"images must be (N, C, H, W), got shape {images.shape}")
    if labels.ndim != 1 or labels.shape[0] != images.shape[0]:
        raise DatasetError(
            f"labels shape {labels.shape} does not match {images.shape[0]} images"
        )
    if labels.min() < 0:
        raise DatasetError("labels contain negative class ids")
    return images.astype(np.float32, copy=False), labels.astype(np.int64, copy=False)


def make_toy_dataset(
    out_dir,
    n_samples: int = 600,
    n_classes: int = 3,
    image_size: int = 16,
    channels: int = 3,
    noise: float = 0.6,
    seed: int = 0,
) -> Path:
    """Synthesize class-template images and write a dataset directory."""
    rng = np.random.default_rng(seed)
    templates = rng.standard_normal((n_classes, channels, image_size, image_size))
    labels = rng.integers(0, n_classes, size=n_samples)
    images = templates[labels] + rng.standard_normal(
        (n_samples, channels, image_size, image_size)
    ) * noise
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / "images.npy", images.astype(np.float32))
    np.save(out_dir / "labels.npy", labels.astype(np.int64))
    return out_dir
