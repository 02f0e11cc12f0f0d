"""Layer-wise k-NN graph modularity analysis of neural feature representations.

The pipeline: per-layer feature matrices -> pairwise similarity -> one
symmetric k-NN snapshot per layer -> a modularity value per snapshot under
the ground-truth class partition -> curve analysis (difference matrices,
plateau/descent detection, prune plans).
"""

from .analysis import (
    CurveSegments,
    DifferenceMatrix,
    PruneCandidate,
    PrunePlan,
    compare_runs,
    detect_segments,
    difference_matrix,
    prune_plan,
)
from .errors import (
    DataError,
    DegenerateVectorError,
    EmptyGraphError,
    FormatError,
    IoError,
    ModgraphError,
    ParameterError,
    ShapeError,
)
from .graph_builder import (
    DynamicGraph,
    SnapshotGraph,
    build_dynamic_graph,
    build_knn,
    directed_knn,
    export_edge_list,
    top_k_indices,
)
from .modularity import (
    ModularityCurve,
    ModularityValue,
    Partition,
    modularity,
    modularity_bruteforce,
    modularity_curve,
    partition_from_labels,
)
from .similarity import SimilarityMatrix, cosine_similarity, pearson_similarity, similarity
from .synth import SynthSpec, generate, generate_plateau_fixture, linear_schedule
from .tensor_io import (
    FeatureMatrix,
    LabelVector,
    LayerEntry,
    LayerFeatureSet,
    RunManifest,
    load_manifest,
    load_run,
    read_feature_matrix,
    read_labels,
    write_feature_matrix,
    write_labels,
    write_run,
)

__version__ = "0.1.0"
