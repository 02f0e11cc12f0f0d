"""Pairwise sample-similarity kernels: cosine and Pearson correlation.

Both kernels produce an exactly symmetric N x N matrix: the Gram product
is computed once, the strict upper triangle is mirrored, and the diagonal
is set to 1 (its analytic value for non-degenerate rows). Accumulation is
always float64 regardless of the input width, since feature dimensions
can exceed 1e5 and float32 dot products drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVectorError, ParameterError
from .tensor_io import FeatureMatrix

METRICS = ("cosine", "pearson")

# Rows with l2-norm (cosine) or variance (pearson) below this are an
# upstream extraction bug, not a case to silently zero out.
_DEGENERATE_EPS = 1e-30


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray
    metric: str

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ParameterError("similarity matrix must be square")
        if self.metric not in METRICS:
            raise ParameterError(f"unknown metric {self.metric!r}, expected one of {METRICS}")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def _mirrored_unit_gram(rows: np.ndarray) -> np.ndarray:
    """Gram matrix of unit rows, upper triangle mirrored, diagonal pinned to 1."""
    gram = rows @ rows.T
    upper = np.triu(gram, 1)
    sym = upper + upper.T
    np.fill_diagonal(sym, 1.0)
    return sym


def cosine_similarity(features: FeatureMatrix) -> SimilarityMatrix:
    """S_ij = <x_i, x_j> / (|x_i| |x_j|) over all sample pairs."""
    x = np.asarray(features.data, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    bad = np.flatnonzero(norms < _DEGENERATE_EPS)
    if bad.size:
        raise DegenerateVectorError(f"sample {int(bad[0])} has near-zero norm, cosine undefined")
    return SimilarityMatrix(values=_mirrored_unit_gram(x / norms[:, None]), metric="cosine")


def pearson_similarity(features: FeatureMatrix) -> SimilarityMatrix:
    """Correlation of mean-centered rows; equals cosine similarity after centering."""
    x = np.asarray(features.data, dtype=np.float64)
    centered = x - x.mean(axis=1, keepdims=True)
    variances = np.einsum("ij,ij->i", centered, centered) / x.shape[1]
    bad = np.flatnonzero(variances < _DEGENERATE_EPS)
    if bad.size:
        raise DegenerateVectorError(
            f"sample {int(bad[0])} has near-zero variance, correlation undefined"
        )
    norms = np.sqrt(variances * x.shape[1])
    return SimilarityMatrix(values=_mirrored_unit_gram(centered / norms[:, None]), metric="pearson")


def similarity(features: FeatureMatrix, metric: str) -> SimilarityMatrix:
    if metric == "cosine":
        return cosine_similarity(features)
    if metric == "pearson":
        return pearson_similarity(features)
    raise ParameterError(f"unknown metric {metric!r}, expected one of {METRICS}")
