"""Threshold similarity search in summary space and its evaluation metrics."""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .edit_distance import distances_to, pairwise_distances
from .summarization import MappingFunction, reduced_symbols, summary_symbols
from .trace_model import Trace, TraceSet, encode_trace

__all__ = [
    "SearchResult",
    "SearchMetrics",
    "SummaryCache",
    "summary_cache",
    "threshold_search",
    "evaluate_pairs",
    "pair_metrics",
    "original_distances",
]


class SummaryCache:
    """Bounded LRU of per-trace summaries keyed by corpus and mapping digests."""

    def __init__(self, maxsize: int = 64):
        self.maxsize = maxsize
        self._store: OrderedDict = OrderedDict()

    def _get(self, key, build):
        try:
            self._store.move_to_end(key)
            return self._store[key]
        except KeyError:
            value = build()
            self._store[key] = value
            if len(self._store) > self.maxsize:
                self._store.popitem(last=False)
            return value

    def summaries(self, corpus: TraceSet, f: MappingFunction | None, reduced: bool, domain=None):
        domain = tuple(domain) if domain else None
        key = ("summary", corpus.digest, f.digest if f is not None else None, bool(reduced), domain)
        return self._get(key, lambda: summary_symbols(corpus, f, reduced, domain))

    def distances(self, corpus: TraceSet, f: MappingFunction | None, reduced: bool, domain=None, threads=None):
        domain = tuple(domain) if domain else None
        key = ("pairs", corpus.digest, f.digest if f is not None else None, bool(reduced), domain)
        return self._get(
            key, lambda: pairwise_distances(self.summaries(corpus, f, reduced, domain), threads=threads)
        )

    def clear(self):
        self._store.clear()


#: Process-wide cache used when no explicit cache is passed.
summary_cache = SummaryCache()


@dataclass
class SearchResult:
    candidate_ids: list[str]
    verified_ids: list[str] | None
    summary_distances: dict[str, int]
    original_distances: dict[str, int] = field(default_factory=dict)
    prefilter_ms: float = 0.0
    verify_ms: float = 0.0


@dataclass
class SearchMetrics:
    chi: int
    false_positive_rate: float
    recall: float
    violation_count: int
    violation_fraction: float
    n_pairs: int
    n_candidates: int
    n_true: int

    def to_json(self) -> dict:
        return {
            "chi": self.chi,
            "fp_rate": self.false_positive_rate,
            "recall": self.recall,
            "violation_count": self.violation_count,
            "violation_fraction": self.violation_fraction,
            "n_pairs": self.n_pairs,
            "n_candidates": self.n_candidates,
            "n_true": self.n_true,
        }


def _query_symbols(query, corpus, f):
    if isinstance(query, str):
        return summary_cache.summaries(corpus, None, False, f.domain)[corpus.position(query)]
    if isinstance(query, Trace):
        return encode_trace(query, corpus, f.domain)
    return np.asarray(query, dtype=np.int64)


def threshold_search(
    query,
    corpus: TraceSet,
    f: MappingFunction,
    chi: int,
    *,
    reduced: bool = True,
    verify: bool = False,
    threads: int | None = None,
    cache: SummaryCache | None = None,
) -> SearchResult:
    """All corpus traces whose summary lies within ``chi`` edits of the query's summary.

    ``query`` is a trace id from ``corpus``, an external :class:`Trace` in
    the corpus schema, or a symbol sequence over ``f``'s domain.  A query
    taken from the corpus matches itself.  With ``verify`` every candidate
    is re-checked against ``chi`` in original space.
    """
    if chi < 0:
        raise ValueError("chi must be non-negative")
    cache = cache or summary_cache
    q_orig = _query_symbols(query, corpus, f)
    q_summary = reduced_symbols(q_orig, f) if reduced else f(q_orig)
    t0 = time.perf_counter()
    summaries = cache.summaries(corpus, f, reduced)
    d_summary = distances_to(q_summary, summaries, chi, threads=threads)
    hit = np.flatnonzero(d_summary >= 0)
    prefilter_ms = (time.perf_counter() - t0) * 1e3
    ids = corpus.ids
    result = SearchResult(
        [ids[i] for i in hit], None, {ids[i]: int(d_summary[i]) for i in hit}, prefilter_ms=prefilter_ms
    )
    if verify:
        t1 = time.perf_counter()
        originals = cache.summaries(corpus, None, False, f.domain)
        d_orig = distances_to(q_orig, [originals[i] for i in hit], chi, threads=threads)
        result.verified_ids = [ids[i] for i, d in zip(hit, d_orig) if d >= 0]
        result.original_distances = {ids[i]: int(d) for i, d in zip(hit, d_orig) if d >= 0}
        result.verify_ms = (time.perf_counter() - t1) * 1e3
    return result


def pair_metrics(original: np.ndarray, summary: np.ndarray, chi: int) -> SearchMetrics:
    """Search metrics from aligned condensed distance vectors.

    The false-positive rate is 0 when nothing passes the summary filter and
    recall is 1 when no pair is truly within ``chi``.
    """
    original = np.asarray(original)
    summary = np.asarray(summary)
    cand = summary <= chi
    true = original <= chi
    n_cand, n_true = int(cand.sum()), int(true.sum())
    tp = int((cand & true).sum())
    viol = int((summary > original).sum())
    n = original.size
    return SearchMetrics(
        chi=int(chi),
        false_positive_rate=(n_cand - tp) / n_cand if n_cand else 0.0,
        recall=tp / n_true if n_true else 1.0,
        violation_count=viol,
        violation_fraction=viol / n if n else 0.0,
        n_pairs=n,
        n_candidates=n_cand,
        n_true=n_true,
    )


def original_distances(corpus: TraceSet, domain: Sequence[str], threads=None, cache=None) -> np.ndarray:
    """Condensed all-pairs distances of the corpus projected onto ``domain``."""
    return (cache or summary_cache).distances(corpus, None, False, domain, threads=threads)


def evaluate_pairs(
    corpus: TraceSet,
    f: MappingFunction,
    chi,
    *,
    reduced: bool = True,
    threads: int | None = None,
    cache: SummaryCache | None = None,
):
    """False-positive rate, recall and contractive violations over all unordered pairs.

    ``chi`` may be a single threshold or a sequence; a sequence yields one
    :class:`SearchMetrics` per threshold from a single pass of distance
    computations.
    """
    if len(corpus) < 2:
        raise ValueError("need at least two traces to form pairs")
    cache = cache or summary_cache
    d_orig = original_distances(corpus, f.domain, threads, cache)
    d_summ = cache.distances(corpus, f, reduced, threads=threads)
    if np.ndim(chi) == 0:
        return pair_metrics(d_orig, d_summ, int(chi))
    return [pair_metrics(d_orig, d_summ, int(c)) for c in chi]
