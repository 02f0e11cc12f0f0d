"""Synthetic per-layer features with a controllable class-separation schedule.

The generative model is Gaussian blobs around class centers drawn once per
run on the unit sphere: layer i holds ``center[label] * schedule[i] +
N(0, sigma^2)``. Under a cosine k-NN graph the ground-truth community
structure strengthens monotonically with the schedule, which makes these
runs a desk-scale oracle for rising / flat / plateaued modularity curves
and a fixture source for end-to-end tests.

All randomness flows from a single PCG64 stream seeded by the spec, so a
given spec reproduces byte-identical runs anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .tensor_io import FeatureMatrix, LabelVector, LayerEntry, LayerFeatureSet, RunManifest

# Layers inside a plateau behave like near-identity blocks: they reuse the
# previous layer's features plus jitter at this fraction of noise_sigma.
PLATEAU_JITTER_FRACTION = 0.01


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int = 500
    n_classes: int = 10
    n_features: int = 256
    n_layers: int = 10
    separation_schedule: tuple[float, ...] = ()
    noise_sigma: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ParameterError(f"need at least 2 classes, got {self.n_classes}")
        if self.n_samples < self.n_classes:
            raise ParameterError(
                f"need n_samples >= n_classes, got {self.n_samples} < {self.n_classes}"
            )
        if self.n_features < 1:
            raise ParameterError("need at least 1 feature dimension")
        if self.n_layers < 1:
            raise ParameterError("need at least 1 layer")
        if len(self.separation_schedule) != self.n_layers:
            raise ParameterError(
                f"schedule length {len(self.separation_schedule)} != n_layers {self.n_layers}"
            )
        if any(s < 0 for s in self.separation_schedule):
            raise ParameterError("separation schedule entries must be non-negative")
        if not self.noise_sigma > 0:
            raise ParameterError(f"noise_sigma must be positive, got {self.noise_sigma}")


def linear_schedule(lo: float, hi: float, n_layers: int) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, n_layers))


def _assemble(spec: SynthSpec, layers, labels, repeatable) -> LayerFeatureSet:
    names = [f"layer_{i:02d}" for i in range(spec.n_layers)]
    manifest = RunManifest(
        model="synth",
        dataset=f"synth-k{spec.n_classes}",
        num_classes=spec.n_classes,
        labels_file="labels.npy",
        layers=tuple(
            LayerEntry(name=name, file=f"{name}.npy", repeatable=rep)
            for name, rep in zip(names, repeatable)
        ),
    )
    return LayerFeatureSet(
        manifest=manifest,
        features=tuple(FeatureMatrix(data=f) for f in layers),
        labels=LabelVector(labels=labels, n_classes=spec.n_classes),
    )


def generate(spec: SynthSpec) -> LayerFeatureSet:
    """Fresh Gaussian blob features at every layer, labels balanced round-robin."""
    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    centers = rng.standard_normal((spec.n_classes, spec.n_features))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    labels = np.arange(spec.n_samples, dtype=np.int64) % spec.n_classes
    layers = [
        centers[labels] * s + rng.standard_normal((spec.n_samples, spec.n_features)) * spec.noise_sigma
        for s in spec.separation_schedule
    ]
    return _assemble(spec, layers, labels, repeatable=[False] * spec.n_layers)


def plateau_schedule(spec: SynthSpec, plateau_range: tuple[int, int] | None) -> tuple[float, ...]:
    """Schedule constant across the plateau, strictly increasing elsewhere.

    The spec's own schedule only contributes its endpoints: separation is
    spread linearly over the steps that remain once plateau layers (after
    the first) stop advancing.
    """
    length = spec.n_layers
    if plateau_range is not None:
        start, end = plateau_range
        if not (0 <= start <= end <= length - 1):
            raise ParameterError(
                f"plateau range ({start}, {end}) outside layers [0, {length - 1}]"
            )
    lo, hi = spec.separation_schedule[0], spec.separation_schedule[-1]
    ranks = np.zeros(length, dtype=np.int64)
    for i in range(1, length):
        in_plateau = plateau_range is not None and plateau_range[0] < i <= plateau_range[1]
        ranks[i] = ranks[i - 1] if in_plateau else ranks[i - 1] + 1
    if ranks[-1] == 0:
        return tuple(np.full(length, lo))
    if not hi > lo:
        raise ParameterError("plateau fixture needs schedule[-1] > schedule[0]")
    return tuple(lo + (hi - lo) * ranks / ranks[-1])


def generate_plateau_fixture(
    spec: SynthSpec, plateau_range: tuple[int, int] | None
) -> LayerFeatureSet:
    """Run whose curve is flat exactly on ``plateau_range`` and rising elsewhere.

    Plateau layers after the first are modeled as near-identity blocks
    (previous features plus small jitter) rather than fresh draws at the
    same separation: a redundant layer passes its representation through
    almost unchanged, and fresh draws would add layer-to-layer sampling
    noise larger than any practical flatness threshold. Plateau layers are
    flagged repeatable in the manifest, mirroring how redundancy shows up
    in repeated block structures.
    """
    schedule = plateau_schedule(spec, plateau_range)
    spec = replace(spec, separation_schedule=schedule)
    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    centers = rng.standard_normal((spec.n_classes, spec.n_features))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    labels = np.arange(spec.n_samples, dtype=np.int64) % spec.n_classes

    layers: list[np.ndarray] = []
    repeatable = [False] * spec.n_layers
    for i, s in enumerate(schedule):
        inside = plateau_range is not None and plateau_range[0] < i <= plateau_range[1]
        if inside:
            jitter = rng.standard_normal((spec.n_samples, spec.n_features))
            layers.append(layers[-1] + jitter * (PLATEAU_JITTER_FRACTION * spec.noise_sigma))
        else:
            noise = rng.standard_normal((spec.n_samples, spec.n_features))
            layers.append(centers[labels] * s + noise * spec.noise_sigma)
        if plateau_range is not None and plateau_range[0] <= i <= plateau_range[1]:
            repeatable[i] = True
    return _assemble(spec, layers, labels, repeatable=repeatable)
