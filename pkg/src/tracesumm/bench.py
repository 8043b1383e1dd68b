"""Timing of all-pairs edit distance in original and summary space."""

from __future__ import annotations

import platform
import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .edit_distance import pairwise_distances, set_threads
from .errors import ParameterError
from .schemes import build_mapping
from .summarization import MappingFunction, summary_symbols
from .topic_model import default_base_attribute
from .trace_model import TraceSet

__all__ = ["BenchRow", "BenchReport", "time_allpairs", "benchmark_allpairs"]


@dataclass(frozen=True)
class BenchRow:
    scheme: str
    k: int | None
    mean_length: float
    seconds: float
    pairs: int
    runs: tuple[float, ...] = ()

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "k": self.k,
            "mean_length": self.mean_length,
            "seconds": self.seconds,
            "pairs": self.pairs,
        }


@dataclass
class BenchReport:
    rows: list[BenchRow]
    threads: int
    n_traces: int
    environment: dict = field(default_factory=dict)

    def row(self, scheme: str, k: int | None = None) -> BenchRow:
        for r in self.rows:
            if r.scheme == scheme and r.k == k:
                return r
        raise KeyError((scheme, k))

    def to_json(self) -> dict:
        return {
            "threads": self.threads,
            "n_traces": self.n_traces,
            "environment": self.environment,
            "rows": [r.to_json() for r in self.rows],
        }


def time_allpairs(seqs: Sequence[np.ndarray], *, repeats: int = 3, threads: int | None = None) -> list[float]:
    """Wall-clock seconds of ``repeats`` all-pairs runs after one warm-up run."""
    pairwise_distances(seqs[:2], threads=threads)  # compile and spin up the pool
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        pairwise_distances(seqs, threads=threads)
        runs.append(time.perf_counter() - t0)
    return runs


def benchmark_allpairs(
    corpus: TraceSet,
    schemes: Sequence[tuple[str, int | None]],
    *,
    threads: int | None = None,
    repeats: int = 3,
    reduced: bool = True,
    base_attribute: str | None = None,
    mappings: dict | None = None,
    **scheme_params,
) -> BenchReport:
    """Median all-pairs time per ``(scheme, k)``, preceded by an original-space row.

    ``mappings`` may supply prebuilt :class:`MappingFunction` objects keyed by
    ``(scheme, k)``; other schemes are built with ``scheme_params``.
    """
    n = len(corpus)
    if n < 2:
        raise ParameterError("benchmark needs at least two traces")
    if repeats < 1:
        raise ParameterError("repeats must be at least 1")
    threads = set_threads(threads)
    base = base_attribute or default_base_attribute(corpus.schema)
    pairs = n * (n - 1) // 2
    mappings = mappings or {}
    entries = [("original", None, summary_symbols(corpus, None, domain=(base,)))]
    for scheme, k in schemes:
        f: MappingFunction = mappings.get((scheme, k)) or build_mapping(
            corpus, scheme, k=k, base_attribute=base, **scheme_params
        )
        entries.append((scheme, k, summary_symbols(corpus, f, reduced)))
    pairwise_distances(entries[0][2][:2], threads=threads)  # compile and spin up the pool
    # Repetitions are interleaved across rows so that a stretch of host
    # contention slows one run of many rows rather than every run of one row.
    runs: list[list[float]] = [[] for _ in entries]
    for _ in range(repeats):
        for slot, (_, _, seqs) in enumerate(entries):
            t0 = time.perf_counter()
            pairwise_distances(seqs, threads=threads)
            runs[slot].append(time.perf_counter() - t0)
    rows = [
        BenchRow(name, k, float(np.mean([len(s) for s in seqs])), statistics.median(r), pairs, tuple(r))
        for (name, k, seqs), r in zip(entries, runs)
    ]
    env = {"python": platform.python_version(), "machine": platform.machine()}
    return BenchReport(rows, threads, n, env)
