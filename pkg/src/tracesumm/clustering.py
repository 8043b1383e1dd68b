"""Agglomerative clustering of traces under edit distance and agreement metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import squareform
from sklearn.metrics import adjusted_rand_score, silhouette_score

from ._agglomerative import LINKAGES, agglomerate, cut
from .edit_distance import pairwise_distances
from .errors import ParameterError
from .summarization import MappingFunction, summary_symbols
from .trace_model import TraceSet

__all__ = [
    "DistanceMatrix",
    "Clustering",
    "ClusterQuality",
    "distance_matrix",
    "hierarchical_cluster",
    "weighted_cluster_quality",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    ids: tuple[str, ...]
    condensed: np.ndarray
    space: str = "original"

    @property
    def n(self) -> int:
        return len(self.ids)

    def square(self) -> np.ndarray:
        return squareform(self.condensed)


@dataclass(frozen=True, eq=False)
class Clustering:
    ids: tuple[str, ...]
    labels: np.ndarray
    n_clusters: int
    merges: list = field(default_factory=list)

    @property
    def assignments(self) -> dict[str, int]:
        return dict(zip(self.ids, self.labels.tolist()))


@dataclass(frozen=True)
class ClusterQuality:
    n_clusters: int
    space: str
    silhouette: float | None
    weighted_intra: float
    ari: float | None = None

    def to_json(self) -> dict:
        return {
            "N": self.n_clusters,
            "space": self.space,
            "silhouette": self.silhouette,
            "weighted_intra": self.weighted_intra,
            "ari": self.ari,
        }


def distance_matrix(
    corpus: TraceSet,
    f: MappingFunction | None = None,
    *,
    reduced: bool = True,
    domain=None,
    threads: int | None = None,
) -> DistanceMatrix:
    """All unordered pair distances in original space (``f`` absent) or summary space.

    Without ``f`` traces are projected onto ``domain`` (default: all schema
    attributes).
    """
    if len(corpus) < 2:
        raise ParameterError("need at least two traces for a distance matrix")
    seqs = summary_symbols(corpus, f, reduced, domain)
    if f is None:
        space = "original"
    else:
        space = f"summary({f.kind},k={f.k},{'reduced' if reduced else 'non-reduced'})"
    return DistanceMatrix(tuple(corpus.ids), pairwise_distances(seqs, threads=threads), space)


def hierarchical_cluster(matrix: DistanceMatrix, n_clusters: int, linkage: str = "average") -> Clustering:
    """Merge the closest clusters until ``n_clusters`` remain.

    Ties go to the pair with the smallest cluster ids.  Cluster ids are
    numbered by each cluster's first trace.
    """
    n = matrix.n
    if not 1 <= n_clusters <= n:
        raise ParameterError(f"number of clusters {n_clusters} must lie in [1, {n}]")
    if linkage not in LINKAGES:
        raise ParameterError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    merges = agglomerate(matrix.square(), maximize=False, linkage=linkage)
    return Clustering(matrix.ids, cut(n, merges, n_clusters), n_clusters, merges)


def weighted_cluster_quality(
    clustering: Clustering, original: DistanceMatrix, reference: Clustering | np.ndarray | None = None
) -> ClusterQuality:
    """Silhouette and size-weighted intra-cluster distance on original distances, plus ARI.

    The silhouette is ``None`` (with a warning) when it is undefined, i.e.
    unless there are between 2 and n - 1 clusters.
    """
    if tuple(clustering.ids) != tuple(original.ids):
        raise ParameterError("clustering and distance matrix cover different traces")
    labels = clustering.labels
    D = original.square().astype(np.float64)
    n_labels = len(np.unique(labels))
    if 2 <= n_labels <= len(labels) - 1:
        sil = float(silhouette_score(D, labels, metric="precomputed"))
    else:
        log.warning("silhouette undefined for %d clusters over %d traces", n_labels, len(labels))
        sil = None
    intra = 0.0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size > 1:
            sub = D[np.ix_(members, members)]
            intra += members.size * sub[np.triu_indices(members.size, 1)].mean()
    intra /= len(labels)
    ari = None
    if reference is not None:
        ref = reference.labels if isinstance(reference, Clustering) else np.asarray(reference)
        ari = float(adjusted_rand_score(ref, labels))
    return ClusterQuality(clustering.n_clusters, original.space, sil, float(intra), ari)
