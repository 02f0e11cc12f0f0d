"""Capture per-layer activations of a frozen classifier into a run directory.

One forward pass over a fixed-seed shuffled batch, forward hooks at each
layer-granularity unit's output, then plain ``np.save`` tensor files, a
label file, and the manifest JSON the analysis pipeline consumes. All
activations are validated in memory before anything is written, so a
failed extraction never leaves a partial run behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import DatasetError, load_dataset
from .models import MODELS, build_model


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    model: str
    data_dir: Path
    n_samples: int
    seed: int
    out_dir: Path
    weights: Path | None = None


def select_batch(images: np.ndarray, labels: np.ndarray, n: int, seed: int):
    """First n samples of the dataset shuffled with a fixed seed."""
    if n < 2:
        raise ExtractionError(f"need at least 2 samples, got n={n}")
    if n > images.shape[0]:
        raise ExtractionError(
            f"requested n={n} samples but the dataset holds only {images.shape[0]}"
        )
    order = np.random.default_rng(seed).permutation(images.shape[0])[:n]
    return images[order], labels[order]


def capture_activations(model: torch.nn.Module, batch: torch.Tensor) -> dict[str, np.ndarray]:
    """One frozen forward pass; returns unit name -> (N, C, H, W) activations."""
    model.eval()
    for param in model.parameters():
        param.requires_grad_(False)
    captured: dict[str, np.ndarray] = {}
    handles = []
    try:
        for unit in model.feature_units():
            def hook(_module, _inputs, output, name=unit.name):
                captured[name] = output.detach().cpu().numpy().astype(np.float32)

            handles.append(unit.module.register_forward_hook(hook))
        with torch.no_grad():
            model(batch)
    finally:
        for handle in handles:
            handle.remove()
    return captured


def extract_run(config: ExtractionConfig) -> Path:
    """Run the extraction and write the run directory; returns the manifest path."""
    images, labels = load_dataset(config.data_dir)
    batch_images, batch_labels = select_batch(images, labels, config.n_samples, config.seed)
    n_classes = int(labels.max()) + 1

    model = build_model(config.model, n_classes=n_classes, in_channels=images.shape[1])
    if config.weights is not None:
        state = torch.load(config.weights, map_location="cpu", weights_only=True)
        model.load_state_dict(state)

    units = model.feature_units()
    captured = capture_activations(model, torch.from_numpy(batch_images))

    # validate the full set before any file is written
    for unit in units:
        if unit.name not in captured:
            raise ExtractionError(f"unit {unit.name!r} produced no activation")
        arr = captured[unit.name]
        if arr.ndim < 2 or arr.shape[0] != config.n_samples:
            raise ExtractionError(
                f"unit {unit.name!r} activation has shape {arr.shape}, "
                f"expected leading dimension {config.n_samples}"
            )
        if not np.isfinite(arr).all():
            raise ExtractionError(f"unit {unit.name!r} activation contains non-finite values")

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / "labels.npy", batch_labels.astype(np.int64))
    for unit in units:
        np.save(out_dir / f"{unit.name}.npy", captured[unit.name])
    manifest = {
        "model": config.model,
        "dataset": str(config.data_dir),
        "num_classes": n_classes,
        "labels_file": "labels.npy",
        "layers": [
            {
                "name": unit.name,
                "file": f"{unit.name}.npy",
                "repeatable": unit.repeatable,
                "stage": unit.stage,
            }
            for unit in units
        ],
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Dump per-layer activations of a frozen classifier as a run directory",
    )
    parser.add_argument("--model", required=True, choices=sorted(MODELS))
    parser.add_argument("--data", required=True, help="dataset directory (images.npy + labels.npy)")
    parser.add_argument("--n", type=int, default=64, help="batch size to extract")
    parser.add_argument("--seed", type=int, default=0, help="sample-selection seed")
    parser.add_argument("--out", required=True, help="run directory to write")
    parser.add_argument("--weights", default=None, help="state-dict file of the trained model")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        manifest_path = extract_run(
            ExtractionConfig(
                model=args.model,
                data_dir=Path(args.data),
                n_samples=args.n,
                seed=args.seed,
                out_dir=Path(args.out),
                weights=Path(args.weights) if args.weights else None,
            )
        )
    except (ExtractionError, DatasetError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
