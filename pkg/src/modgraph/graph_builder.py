"""k-NN snapshot graphs per layer, assembled into the cross-layer dynamic graph.

Each node keeps its k most similar distinct nodes (ties broken toward the
smaller sample index, for determinism); the directed selection is then
symmetrized as (A + A^T)/2. IEEE addition is commutative, so the result is
exactly symmetric without a mirroring pass. Negative-similarity edges can
survive symmetrization; they are clamped to zero and counted, keeping all
weights non-negative for the downstream partition-quality score.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import IoError, ModgraphError, ParameterError
from .similarity import SimilarityMatrix, similarity
from .tensor_io import LabelVector, LayerFeatureSet

# Above this node count the snapshot adjacency is stored sparse.
DENSE_NODE_LIMIT = 2000


@dataclass(frozen=True)
class SnapshotGraph:
    """Weighted symmetric adjacency of one layer's k-NN graph."""

    adjacency: np.ndarray | sparse.csr_array
    layer_index: int
    k: int
    clamped_edges: int = 0

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.adjacency)

    def strengths(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.adjacency.sum(axis=1)).ravel()
        return self.adjacency.sum(axis=1)

    def total_weight(self) -> float:
        """Sum over all ordered pairs (each undirected edge counted twice)."""
        return float(self.adjacency.sum())

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray() if self.is_sparse else self.adjacency


@dataclass(frozen=True)
class DynamicGraph:
    """Ordered snapshots, one per layer, over a fixed node set."""

    snapshots: tuple[SnapshotGraph, ...]
    labels: LabelVector
    layer_names: tuple[str, ...]

    def __post_init__(self):
        n = len(self.labels)
        if any(s.n_nodes != n for s in self.snapshots):
            raise ParameterError("all snapshots must share the run's node set")
        if len(self.layer_names) != len(self.snapshots):
            raise ParameterError("one layer name per snapshot required")

    @property
    def n_layers(self) -> int:
        return len(self.snapshots)


def top_k_indices(similarity_matrix: SimilarityMatrix, k: int) -> np.ndarray:
    """Per row, indices of the k most similar *other* nodes, best first.

    Stable sort on the negated row breaks value ties toward the smaller
    column index.
    """
    values = similarity_matrix.values
    n = values.shape[0]
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= N-1 (N={n}), got {k}")
    masked = np.array(values, dtype=np.float64, copy=True)
    np.fill_diagonal(masked, -np.inf)
    return np.argsort(-masked, axis=1, kind="stable")[:, :k]


def directed_knn(similarity_matrix: SimilarityMatrix, k: int) -> np.ndarray:
    """Dense directed adjacency: row i holds exactly k selected out-edges."""
    cols = top_k_indices(similarity_matrix, k)
    n = similarity_matrix.values.shape[0]
    rows = np.repeat(np.arange(n), k)
    a = np.zeros((n, n), dtype=np.float64)
    a[rows, cols.ravel()] = similarity_matrix.values[rows, cols.ravel()]
    return a


def build_knn(
    similarity_matrix: SimilarityMatrix,
    k: int,
    layer_index: int = 0,
    dense_limit: int = DENSE_NODE_LIMIT,
) -> SnapshotGraph:
    """Symmetrized k-NN snapshot with negative weights clamped to zero."""
    cols = top_k_indices(similarity_matrix, k)
    values = similarity_matrix.values
    n = values.shape[0]
    rows = np.repeat(np.arange(n), k)
    weights = values[rows, cols.ravel()]

    if n <= dense_limit:
        a = np.zeros((n, n), dtype=np.float64)
        a[rows, cols.ravel()] = weights
        adj = (a + a.T) / 2.0
        clamped = int(np.count_nonzero(adj < 0)) // 2
        adj[adj < 0] = 0.0
    else:
        a = sparse.csr_array((weights, (rows, cols.ravel())), shape=(n, n))
        adj = (a + a.T) * 0.5
        clamped = int(np.count_nonzero(adj.data < 0)) // 2
        adj.data[adj.data < 0] = 0.0
        adj.eliminate_zeros()

    return SnapshotGraph(adjacency=adj, layer_index=layer_index, k=k, clamped_edges=clamped)


def build_dynamic_graph(
    run: LayerFeatureSet,
    metric: str = "cosine",
    k: int = 3,
    threads: int = 1,
    dense_limit: int = DENSE_NODE_LIMIT,
) -> DynamicGraph:
    """One snapshot per layer in manifest order, identical metric and k throughout."""

    def build_one(index: int) -> SnapshotGraph:
        name = run.layer_names[index]
        try:
            sim = similarity(run.features[index], metric)
            return build_knn(sim, k, layer_index=index, dense_limit=dense_limit)
        except ModgraphError as e:
            raise type(e)(f"layer '{name}': {e}") from e

    indices = range(run.n_layers)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            snapshots = tuple(pool.map(build_one, indices))
    else:
        snapshots = tuple(build_one(i) for i in indices)
    return DynamicGraph(snapshots=snapshots, labels=run.labels, layer_names=run.layer_names)


def export_edge_list(graph: SnapshotGraph, path) -> None:
    """CSV `src,dst,weight` over unordered positive-weight edges, src < dst."""
    if graph.is_sparse:
        coo = graph.adjacency.tocoo()
        mask = coo.row < coo.col
        edges = sorted(zip(coo.row[mask].tolist(), coo.col[mask].tolist(), coo.data[mask].tolist()))
    else:
        r, c = np.nonzero(np.triu(graph.adjacency, 1))
        edges = list(zip(r.tolist(), c.tolist(), graph.adjacency[r, c].tolist()))
    lines = ["src,dst,weight"]
    lines += [f"{src},{dst},{w!r}" for src, dst, w in edges]
    try:
        with open(path, "w") as fp:
            fp.write("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(f"cannot write '{path}': {e}") from e
