"""Cumulative Spectral Gradient complexity measure for KG tail prediction."""

from .correlate import (
    CorrelationPoint,
    CorrelationReport,
    correlate_with_metrics,
    load_metrics,
    pearson,
)
from .embeddings import (
    ClassVectors,
    EmbeddingStore,
    compose,
    hash_embed,
    load_embeddings,
    materialize_class_vectors,
    normalize_store,
    save_embeddings,
)
from .errors import ConfigError, DataError, KgcsgError, NumericError
from .pipeline import (
    RunConfig,
    SweepCell,
    SweepGrid,
    derive_cell_seed,
    run_csg,
    run_sweep,
)
from .reports import emit_report, load_csg_report, report_text
from .similarity import (
    SampledPool,
    SimilarityMatrix,
    build_similarity,
    knn_exact,
    l2_distance_sq,
    sample_pool,
)
from .spectral import (
    CsgReport,
    Laplacian,
    Spectrum,
    csg,
    degree_matrix,
    eigenvalues_general,
    eigenvalues_symmetric,
    normalized_laplacian,
    symmetrize,
)
from .triples import (
    ClassIndex,
    DatasetStats,
    TailClass,
    Triple,
    TripleSet,
    dataset_stats,
    decode_token,
    encode_token,
    filter_classes,
    group_by_tail,
    parse_triple_files,
    parse_triples,
)

__version__ = "0.1.0"
