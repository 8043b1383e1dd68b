"""k-topic mappings: vectorize traces, reduce dimensions, group dimensions into topics.

The pipeline is :func:`vectorize` -> :func:`reduce_dimensions` ->
:func:`dimension_similarity` and :func:`adjacency_counts` ->
:func:`build_topic_mapping` -> optional :func:`label_topics`;
:func:`fit_topic_model` runs all of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ._agglomerative import agglomerate, cut
from .decomposition import nmf, randomized_svd
from .errors import EmptyInputError, ParameterError
from .summarization import MappingFunction
from .trace_model import TraceSet

__all__ = [
    "TopicVectorization",
    "TopicModel",
    "vectorize",
    "reduce_dimensions",
    "dimension_similarity",
    "adjacency_counts",
    "normalize_adjacency",
    "pair_scores",
    "topic_objective",
    "build_topic_mapping",
    "label_topics",
    "fit_topic_model",
    "default_base_attribute",
]


@dataclass(frozen=True, eq=False)
class TopicVectorization:
    base_attribute: str
    tf: np.ndarray  # traces x dimensions, raw counts
    df: np.ndarray  # traces containing each dimension
    matrix: np.ndarray  # traces x dimensions, tf-idf weights


@dataclass(frozen=True, eq=False)
class TopicModel:
    W: np.ndarray | None
    theta: np.ndarray
    omega: np.ndarray
    lam: float
    k: int
    dendrogram: list
    mapping: MappingFunction
    method: str | None = None
    dimension_names: tuple[str, ...] = field(default=())
    active: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "lambda": self.lam,
            "method": self.method,
            "dendrogram": [[i, j, s] for i, j, s, _ in self.dendrogram],
            "mapping": self.mapping.to_json(),
        }


def default_base_attribute(schema) -> str:
    """The attribute with the most distinct values (first one on ties)."""
    cards = [len(v) for v in schema.values]
    return schema.attributes[int(np.argmax(cards))]


def _base_column(trace_set, base_attribute):
    if len(trace_set) == 0:
        raise EmptyInputError("trace set is empty")
    k = trace_set.schema.index(base_attribute)
    return [t.events[:, k].astype(np.int64) for t in trace_set], len(trace_set.schema.values[k])


def vectorize(trace_set: TraceSet, base_attribute: str) -> TopicVectorization:
    """tf-idf matrix with ``(1 + ln tf) * ln(|S| / df)`` for present dimensions, 0 elsewhere."""
    cols, n_dim = _base_column(trace_set, base_attribute)
    n = len(cols)
    tf = np.zeros((n, n_dim), dtype=np.int64)
    for r, c in enumerate(cols):
        tf[r] = np.bincount(c, minlength=n_dim)
    present = tf > 0
    df = present.sum(axis=0)
    idf = np.log(n / np.maximum(df, 1))
    with np.errstate(divide="ignore"):
        weight = np.where(present, 1.0 + np.log(np.where(present, tf, 1)), 0.0)
    return TopicVectorization(base_attribute, tf, df, weight * idf)


def reduce_dimensions(M, k: int, method: str = "svd", seed=0):
    """Factor ``M ~= M_prime @ W.T`` with ``k`` latent dimensions.

    ``'svd'`` returns ``M_prime = U * s`` and ``W = V``; ``'nmf'`` returns
    the two non-negative factors.
    """
    if method == "svd":
        U, s, Vt = randomized_svd(M, k, seed=seed)
        return U * s, Vt.T
    if method == "nmf":
        res = nmf(M, k, seed=seed)
        return res.H, res.W
    raise ParameterError(f"unknown reduction method {method!r}")


def dimension_similarity(W) -> np.ndarray:
    """Cosine similarity of the rows of ``W`` clipped at 0; the diagonal is 1."""
    W = np.asarray(W, dtype=np.float64)
    norms = np.linalg.norm(W, axis=1)
    unit = np.divide(W, norms[:, None], out=np.zeros_like(W), where=norms[:, None] > 0)
    theta = np.clip(unit @ unit.T, 0.0, 1.0)
    np.fill_diagonal(theta, 1.0)
    return theta


def adjacency_counts(trace_set: TraceSet, base_attribute: str) -> np.ndarray:
    """Symmetric counts of consecutive events with distinct base values."""
    cols, n_dim = _base_column(trace_set, base_attribute)
    omega = np.zeros((n_dim, n_dim), dtype=np.int64)
    for c in cols:
        a, b = c[:-1], c[1:]
        d = a != b
        np.add.at(omega, (a[d], b[d]), 1)
        np.add.at(omega, (b[d], a[d]), 1)
    return omega


def normalize_adjacency(omega, active=None) -> np.ndarray:
    """Min-max scale the off-diagonal entries among active dimensions to [0, 1]."""
    omega = np.asarray(omega, dtype=np.float64)
    n = omega.shape[0]
    active = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    sel = active[:, None] & active[None, :] & ~np.eye(n, dtype=bool)
    if not sel.any():
        return np.zeros_like(omega)
    lo, hi = omega[sel].min(), omega[sel].max()
    if hi == lo:
        return np.zeros_like(omega)
    return np.clip((omega - lo) / (hi - lo), 0.0, 1.0)


def pair_scores(theta, omega, lam, active=None) -> np.ndarray:
    """Pairwise merge affinity ``lam * theta + (1 - lam) * omega_hat * theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    return theta * (lam + (1.0 - lam) * normalize_adjacency(omega, active))


def topic_objective(labels, theta, omega, lam, *, same_topic_adjacency=True, active=None) -> float:
    """Objective value of a dimension -> topic assignment.

    Sums the pair affinity over unordered pairs in the same topic.  With
    ``same_topic_adjacency=False`` the adjacency term runs over all pairs
    instead, which makes it a constant offset.
    """
    labels = np.asarray(labels)
    theta = np.asarray(theta, dtype=np.float64)
    n = labels.size
    iu = np.triu_indices(n, 1)
    act = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    valid = act[iu[0]] & act[iu[1]]
    same = (labels[iu[0]] == labels[iu[1]]) & valid
    adj = normalize_adjacency(omega, act)[iu] * theta[iu]
    first = theta[iu][same].sum()
    second = adj[same].sum() if same_topic_adjacency else adj[valid].sum()
    return float(lam * first + (1.0 - lam) * second)


def build_topic_mapping(theta, omega, lam: float, k: int, *, active=None) -> TopicModel:
    """Group dimensions into at most ``k`` topics by greedy average-linkage merging.

    The full merge hierarchy is recorded; the mapping comes from cutting it
    after the fewest merges that leave ``k`` or fewer clusters.  Inactive
    dimensions (never observed) share one extra topic that does not count
    against ``k``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    omega = np.asarray(omega)
    n = theta.shape[0]
    if n == 0:
        raise EmptyInputError("no dimensions to group")
    if theta.shape != (n, n) or omega.shape != (n, n):
        raise ParameterError("theta and omega must be square and of equal size")
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda={lam} must lie in [0, 1]")
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} must lie in [1, {n}]")
    act = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if not act.any():
        raise EmptyInputError("no active dimensions")
    scores = pair_scores(theta, omega, lam, act)
    merges = agglomerate(scores, maximize=True, active=act)
    topic = cut(n, merges, k, act)
    n_topics = int(topic.max()) + 1
    if (~act).any():
        topic[~act] = n_topics
    names = tuple(f"topic_{i}" for i in range(n_topics)) + (("unused",) if (~act).any() else ())
    mapping = MappingFunction("topic", topic, names, spare=bool((~act).any()))
    return TopicModel(None, theta, omega, float(lam), int(k), merges, mapping, active=act)


def label_topics(model: TopicModel, labels: Sequence[str] = (), dimension_names: Sequence[str] = ()) -> TopicModel:
    """Attach names to topics.

    With no ``labels`` each topic is named after its medoid: the member with
    the largest summed similarity to the rest of its topic.
    """
    mapping = model.mapping
    n = mapping.domain_size
    act = np.ones(n, dtype=bool) if model.active is None else model.active
    n_topics = int(mapping.table[act].max()) + 1
    names = tuple(dimension_names) or model.dimension_names or tuple(str(i) for i in range(n))
    if labels:
        if len(labels) != n_topics:
            raise ParameterError(f"{len(labels)} labels for {n_topics} topics")
        new = tuple(labels)
    else:
        new = []
        for t in range(n_topics):
            members = np.flatnonzero(mapping.table == t)
            sub = model.theta[np.ix_(members, members)]
            new.append(names[members[int(np.argmax(sub.sum(axis=1)))]])
        new = tuple(new)
    if (~act).any():
        new = new + ("unused",)
    return replace(model, mapping=mapping.relabel(new), dimension_names=names)


def fit_topic_model(
    trace_set: TraceSet,
    k: int,
    *,
    base_attribute: str | None = None,
    lam: float = 0.5,
    method: str = "nmf",
    seed=0,
    labels: Sequence[str] = (),
) -> TopicModel:
    """Run the whole topic pipeline on a corpus and return a labelled model."""
    base = base_attribute or default_base_attribute(trace_set.schema)
    vec = vectorize(trace_set, base)
    active = vec.df > 0
    n_active = int(active.sum())
    if k < 1:
        raise ParameterError(f"k={k} must be at least 1")
    rank = min(k, *vec.matrix.shape)
    _, W = reduce_dimensions(vec.matrix, rank, method, seed=seed)
    # columns of M that are identically zero carry no signal; NMF leaves tiny noise there
    W = np.where(np.any(vec.matrix, axis=0)[:, None], W, 0.0)
    theta = dimension_similarity(W)
    omega = adjacency_counts(trace_set, base)
    model = build_topic_mapping(theta, omega, lam, min(k, n_active), active=active)
    names = trace_set.schema.values[trace_set.schema.index(base)]
    model = replace(
        model,
        W=W,
        method=method,
        mapping=MappingFunction("topic", model.mapping.table, model.mapping.labels, (base,), model.mapping.spare),
    )
    return label_topics(model, labels, names)
