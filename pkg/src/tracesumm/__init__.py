"""Summarize multi-attribute event-log traces and analyse them under edit distance.

Traces are mapped symbol by symbol into a smaller alphabet (attribute
projection, learned topics or a random partition).  Edit distance on the
shorter summaries then prefilters similarity search and speeds up
clustering.
"""

from .bench import BenchReport, benchmark_allpairs
from .clustering import (
    ClusterQuality,
    Clustering,
    DistanceMatrix,
    distance_matrix,
    hierarchical_cluster,
    weighted_cluster_quality,
)
from .decomposition import nmf, randomized_svd
from .edit_distance import (
    ContractiveVerdict,
    ExactCheck,
    Verdict,
    bounds,
    classify_contractive,
    edit_distance,
    edit_distance_bounded,
    pairwise_distances,
    verify_contractive,
)
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    EmptyInputError,
    MappingDomainError,
    ParameterError,
    RowError,
    SchemaError,
    TraceSummError,
    UnknownTraceError,
    XESParseError,
)
from .schemes import build_mapping
from .search import SearchMetrics, SearchResult, evaluate_pairs, threshold_search
from .summarization import (
    MappingFunction,
    SummarySequence,
    apply_mapping,
    apply_reduced_mapping,
    build_attribute_mapping,
    build_random_mapping,
    check_sequence_preserving,
    identity_mapping,
    summarize,
    summary_symbols,
)
from .synthetic import generate_synthetic_log
from .topic_model import TopicModel, build_topic_mapping, fit_topic_model, label_topics, vectorize
from .trace_model import (
    AttributeSchema,
    Trace,
    TraceSet,
    dump_jsonl,
    load_jsonl,
    parse_csv_log,
    parse_xes_log,
    project_symbols,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
