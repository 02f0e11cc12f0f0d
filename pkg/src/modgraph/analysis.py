"""Downstream curve analysis: difference matrices, plateau/descent detection,
prune plans, and cross-run comparison.

A consecutive delta d = Q[i+1] - Q[i] is classified as a descent step when
d <= -eps, flat when |d| < eps, and a rise otherwise; the three classes are
disjoint and exhaustive. Maximal runs of descent steps become descent
intervals; maximal runs of flat steps of at least ``min_run`` deltas become
plateaus. Flat layers make no contribution and descending layers a negative
one, so every layer inside such an interval except the interval's first is
a prune candidate; eligibility additionally requires the layer's manifest
entry to be flagged repeatable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .modularity import ModularityCurve
from .tensor_io import RunManifest

DEFAULT_EPSILON = 0.005
DEFAULT_MIN_RUN = 2  # consecutive flat deltas needed to call a plateau


@dataclass(frozen=True)
class DifferenceMatrix:
    """values[i][j] == |Q_i - Q_j|, symmetric with a zero diagonal."""

    values: np.ndarray
    layer_names: tuple[str, ...]


@dataclass(frozen=True)
class CurveSegments:
    """Detected (start, end) layer intervals, start < end, non-overlapping."""

    plateaus: tuple[tuple[int, int], ...]
    descents: tuple[tuple[int, int], ...]
    epsilon: float
    min_run: int = DEFAULT_MIN_RUN

    @classmethod
    def empty(cls, epsilon: float = DEFAULT_EPSILON) -> "CurveSegments":
        return cls(plateaus=(), descents=(), epsilon=epsilon)


@dataclass(frozen=True)
class PruneCandidate:
    layer_index: int
    name: str
    reason: str  # "plateau" | "descent"
    eligible: bool


@dataclass(frozen=True)
class PrunePlan:
    candidates: tuple[PruneCandidate, ...]
    epsilon: float


def difference_matrix(curve: ModularityCurve) -> DifferenceMatrix:
    if curve.n_layers < 1:
        raise ShapeError("cannot build a difference matrix from an empty curve")
    v = curve.values
    return DifferenceMatrix(values=np.abs(v[:, None] - v[None, :]), layer_names=curve.layer_names)


def _maximal_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end] index runs of True, end inclusive."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def detect_segments(
    curve: ModularityCurve,
    epsilon: float = DEFAULT_EPSILON,
    min_run: int = DEFAULT_MIN_RUN,
) -> CurveSegments:
    """Scan consecutive deltas for descent and plateau intervals."""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if min_run < 1:
        raise ParameterError(f"min_run must be >= 1, got {min_run}")
    if curve.n_layers < 2:
        raise ParameterError("segment detection needs at least 2 layers")
    deltas = np.diff(curve.values)
    descending = deltas <= -epsilon
    flat = np.abs(deltas) < epsilon
    descents = tuple((s, e + 1) for s, e in _maximal_runs(descending))
    plateaus = tuple((s, e + 1) for s, e in _maximal_runs(flat) if e - s + 1 >= min_run)
    return CurveSegments(plateaus=plateaus, descents=descents, epsilon=epsilon, min_run=min_run)


def prune_plan(curve: ModularityCurve, segments: CurveSegments, manifest: RunManifest) -> PrunePlan:
    """Candidates: interval interiors; eligibility: manifest repeatable flag."""
    if len(manifest.layers) != curve.n_layers:
        raise ShapeError(
            f"manifest has {len(manifest.layers)} layers, curve has {curve.n_layers}"
        )
    reasons: dict[int, str] = {}
    for start, end in segments.plateaus:
        for layer in range(start + 1, end + 1):
            reasons[layer] = "plateau"
    for start, end in segments.descents:
        for layer in range(start + 1, end + 1):
            reasons[layer] = "descent"  # a drop is stronger evidence than flatness
    candidates = tuple(
        PruneCandidate(
            layer_index=layer,
            name=manifest.layers[layer].name,
            reason=reasons[layer],
            eligible=manifest.layers[layer].repeatable,
        )
        for layer in sorted(reasons)
    )
    return PrunePlan(candidates=candidates, epsilon=segments.epsilon)


def compare_runs(curves: list[ModularityCurve], tolerance: float = 0.02) -> dict:
    """Peak alignment report across model variants.

    Curves of different depths are aligned by shared layer names; the
    report states per-curve peaks and whether they agree within the
    tolerance, asserting nothing.
    """
    if len(curves) < 2:
        raise ParameterError(f"need at least 2 curves to compare, got {len(curves)}")
    peaks = []
    for curve in curves:
        idx = int(np.argmax(curve.values))
        peaks.append(
            {"layer": idx, "name": curve.layer_names[idx], "value": float(curve.values[idx])}
        )
    peak_values = [p["value"] for p in peaks]
    max_gap = float(max(peak_values) - min(peak_values))
    shared = [
        name
        for name in curves[0].layer_names
        if all(name in c.layer_names for c in curves[1:])
    ]
    aligned = []
    for name in shared:
        vals = [float(c.values[c.layer_names.index(name)]) for c in curves]
        aligned.append({"name": name, "values": vals, "max_gap": float(max(vals) - min(vals))})
    return {
        "n_curves": len(curves),
        "lengths": [c.n_layers for c in curves],
        "peaks": peaks,
        "max_peak_gap": max_gap,
        "peaks_agree": max_gap <= tolerance,
        "tolerance": tolerance,
        "aligned_layers": aligned,
    }


def build_report(
    curve: ModularityCurve,
    segments: CurveSegments,
    plan: PrunePlan,
    clamped_edges_per_layer: list[int],
    k: int,
    n: int,
    metric: str,
) -> dict:
    """Analysis report in the documented JSON layout."""
    return {
        "curve": [float(v) for v in curve.values],
        "layers": list(curve.layer_names),
        "epsilon": segments.epsilon,
        "plateaus": [[s, e] for s, e in segments.plateaus],
        "descents": [[s, e] for s, e in segments.descents],
        "prune_candidates": [
            {
                "layer": c.layer_index,
                "name": c.name,
                "reason": c.reason,
                "eligible": c.eligible,
            }
            for c in plan.candidates
        ],
        "clamped_edges_per_layer": list(clamped_edges_per_layer),
        "params": {"k": k, "n": n, "metric": metric},
    }
