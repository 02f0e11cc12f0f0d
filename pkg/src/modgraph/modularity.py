"""Weighted partition modularity of snapshot graphs under ground-truth classes.

Q = (1/2W) * sum_ij (a_ij - s_i s_j / 2W) delta(c_i, c_j), with 2W the sum
of the symmetric adjacency over all ordered pairs and s_i the node
strengths. The production path aggregates per community in O(E + N); a
literal double-loop reference implementation is kept as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraphError, ModgraphError, ParameterError, ShapeError
from .graph_builder import DynamicGraph, SnapshotGraph
from .tensor_io import LabelVector

_BRUTE_FORCE_MAX_N = 512


@dataclass(frozen=True)
class Partition:
    """Node -> community assignment; communities are the ground-truth classes."""

    community_of: np.ndarray
    n_communities: int

    def __post_init__(self):
        if self.community_of.ndim != 1:
            raise ShapeError("community assignment must be 1-D")
        if self.community_of.size and self.community_of.min() < 0:
            raise ShapeError("community ids must be non-negative")
        if self.community_of.size and self.community_of.max() >= self.n_communities:
            raise ShapeError("community id out of range")

    def __len__(self) -> int:
        return int(self.community_of.size)


def partition_from_labels(labels: LabelVector) -> Partition:
    return Partition(
        community_of=labels.labels.astype(np.int64, copy=False),
        n_communities=labels.n_classes,
    )


@dataclass(frozen=True)
class ModularityValue:
    """Q plus the per-community terms it decomposes into.

    q == sum_c (internal_c / 2W - (strength_c / 2W)^2); internal sums run
    over ordered pairs, so each undirected intra-community edge counts
    twice, matching the 2W normalization.
    """

    q: float
    total_weight_2w: float
    per_community_internal: np.ndarray
    per_community_strength: np.ndarray


def _community_sums(graph: SnapshotGraph, partition: Partition) -> tuple[float, np.ndarray, np.ndarray]:
    communities = partition.community_of
    kc = partition.n_communities
    strengths = graph.strengths()
    total = float(strengths.sum())
    strength_c = np.bincount(communities, weights=strengths, minlength=kc)
    internal_c = np.zeros(kc, dtype=np.float64)
    if graph.is_sparse:
        coo = graph.adjacency.tocoo()
        same = communities[coo.row] == communities[coo.col]
        internal_c += np.bincount(
            communities[coo.row[same]], weights=coo.data[same], minlength=kc
        )
    else:
        adj = graph.adjacency
        for c in np.unique(communities):
            members = communities == c
            internal_c[c] = adj[np.ix_(members, members)].sum()
    return total, internal_c, strength_c


def modularity(graph: SnapshotGraph, partition: Partition) -> ModularityValue:
    """Community-aggregated Q; O(E + N)."""
    if len(partition) != graph.n_nodes:
        raise ShapeError(
            f"partition covers {len(partition)} nodes, graph has {graph.n_nodes}"
        )
    total, internal_c, strength_c = _community_sums(graph, partition)
    if not total > 0:
        raise EmptyGraphError("graph has no positive-weight edge")
    q = float(np.sum(internal_c / total - (strength_c / total) ** 2))
    return ModularityValue(
        q=q,
        total_weight_2w=total,
        per_community_internal=internal_c,
        per_community_strength=strength_c,
    )


def modularity_bruteforce(graph: SnapshotGraph, partition: Partition) -> ModularityValue:
    """Literal double loop over ordered node pairs; reference oracle.

    Kept independent of the fast path: plain Python floats, no shared
    aggregation code. Guarded to N <= 512.
    """
    n = graph.n_nodes
    if n > _BRUTE_FORCE_MAX_N:
        raise ParameterError(f"brute-force modularity is capped at N={_BRUTE_FORCE_MAX_N}, got {n}")
    if len(partition) != n:
        raise ShapeError(f"partition covers {len(partition)} nodes, graph has {n}")
    a = graph.dense().tolist()
    c = partition.community_of.tolist()
    s = [sum(row) for row in a]
    total = sum(s)
    if not total > 0:
        raise EmptyGraphError("graph has no positive-weight edge")
    q = 0.0
    internal = [0.0] * partition.n_communities
    strength = [0.0] * partition.n_communities
    for i in range(n):
        strength[c[i]] += s[i]
        for j in range(n):
            if c[i] == c[j]:
                q += a[i][j] - s[i] * s[j] / total
                internal[c[i]] += a[i][j]
    return ModularityValue(
        q=q / total,
        total_weight_2w=total,
        per_community_internal=np.array(internal),
        per_community_strength=np.array(strength),
    )


def modularity_curve(dynamic_graph: DynamicGraph) -> "ModularityCurve":
    """Per-layer Q under the ground-truth partition, in manifest order."""
    partition = partition_from_labels(dynamic_graph.labels)
    values = []
    for name, snapshot in zip(dynamic_graph.layer_names, dynamic_graph.snapshots):
        try:
            values.append(modularity(snapshot, partition).q)
        except ModgraphError as e:
            raise type(e)(f"layer '{name}': {e}") from e
    return ModularityCurve(values=np.array(values), layer_names=dynamic_graph.layer_names)


@dataclass(frozen=True)
class ModularityCurve:
    values: np.ndarray
    layer_names: tuple[str, ...]

    def __post_init__(self):
        if self.values.ndim != 1 or self.values.size != len(self.layer_names):
            raise ShapeError("curve values and layer names must have equal length")

    @property
    def n_layers(self) -> int:
        return int(self.values.size)
