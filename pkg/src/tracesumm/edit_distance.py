"""Unit-cost edit distance, length bounds and the contractive error model.

The dynamic programs are compiled with numba; sequences are integer arrays.
Inputs that are not integer arrays (strings, lists of labels) are interned
jointly so that equal items get equal codes.
"""

from __future__ import annotations

import enum
import logging
import os
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import llvmlite.binding as llvm
import numba
import numpy as np
from numba import njit, prange

__all__ = [
    "edit_distance",
    "edit_distance_bounded",
    "bounds",
    "DistanceBounds",
    "Verdict",
    "ExactCheck",
    "ContractiveVerdict",
    "classify_contractive",
    "verify_contractive",
    "pairwise_distances",
    "distances_to",
    "rule_counters",
]

log = logging.getLogger(__name__)

# the bundled TBB is often too old and numba warns about it on first use
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
# Keep the DP's min() as cmov.  LLVM otherwise rewrites it into branches whose
# misprediction rate depends on how often symbols match, which makes the cost
# per cell depend on the alphabet size instead of on sequence lengths.
llvm.set_option("", "-x86-cmov-converter=false")

#: How often each rule of :func:`classify_contractive` fired in this process.
rule_counters: Counter = Counter()


@njit(cache=True, nogil=True)
def _levenshtein_buf(a, b, prev, cur):
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    n = b.shape[0]
    if n == 0:
        return a.shape[0]
    for j in range(n + 1):
        prev[j] = j
    for i in range(1, a.shape[0] + 1):
        cur[0] = i
        ai = a[i - 1]
        left = np.int64(i)
        for j in range(1, n + 1):
            v = min(prev[j - 1] + np.int64(ai != b[j - 1]), min(prev[j], left) + 1)
            cur[j] = v
            left = v
        prev, cur = cur, prev
    return prev[n]


@njit(cache=True, nogil=True)
def _levenshtein(a, b):
    n = min(a.shape[0], b.shape[0]) + 1
    return _levenshtein_buf(a, b, np.empty(n, np.int64), np.empty(n, np.int64))


@njit(cache=True, nogil=True)
def _banded(a, b, chi):
    """Exact distance if it is <= chi, else -1.  Only |i - j| <= chi is filled."""
    m, n = a.shape[0], b.shape[0]
    if abs(m - n) > chi:
        return -1
    if m < n:
        a, b = b, a
        m, n = n, m
    big = chi + 1
    prev = np.full(n + 1, big, dtype=np.int64)
    cur = np.full(n + 1, big, dtype=np.int64)
    for j in range(min(n, chi) + 1):
        prev[j] = j
    for i in range(1, m + 1):
        lo = max(1, i - chi)
        hi = min(n, i + chi)
        cur[lo - 1] = i if lo == 1 and i <= chi else big
        row_min = cur[lo - 1]
        ai = a[i - 1]
        for j in range(lo, hi + 1):
            v = min(prev[j - 1] + np.int64(ai != b[j - 1]), min(prev[j], cur[j - 1]) + 1, big)
            cur[j] = v
            row_min = min(row_min, v)
        if hi + 1 <= n:
            cur[hi + 1] = big
        if row_min > chi:
            return -1
        prev, cur = cur, prev
    return prev[n] if prev[n] <= chi else -1


@njit(cache=True, parallel=True)
def _pairwise(flat, offsets, out):
    n = offsets.shape[0] - 1
    width = 1
    for i in range(n):
        width = max(width, offsets[i + 1] - offsets[i] + 1)
    for i in prange(n):
        prev = np.empty(width, np.int64)
        cur = np.empty(width, np.int64)
        base = n * i - (i * (i + 1)) // 2 - i - 1
        a = flat[offsets[i] : offsets[i + 1]]
        for j in range(i + 1, n):
            out[base + j] = _levenshtein_buf(a, flat[offsets[j] : offsets[j + 1]], prev, cur)


@njit(cache=True, parallel=True)
def _one_to_many(query, flat, offsets, chi, out):
    n = offsets.shape[0] - 1
    for j in prange(n):
        b = flat[offsets[j] : offsets[j + 1]]
        if chi < 0:
            out[j] = _levenshtein(query, b)
        else:
            out[j] = _banded(query, b, chi)


def _as_int_pair(a, b):
    """Both sequences as int64 arrays, interning non-integer items jointly."""
    arrays = []
    for s in (a, b):
        if isinstance(s, np.ndarray) and np.issubdtype(s.dtype, np.integer):
            arrays.append(s.astype(np.int64, copy=False))
        else:
            arrays.append(None)
    if all(x is not None for x in arrays):
        return arrays[0], arrays[1]
    table: dict = {}
    enc = [np.array([table.setdefault(x, len(table)) for x in s], dtype=np.int64) for s in (a, b)]
    return enc[0], enc[1]


def _pack(seqs: Sequence[np.ndarray]):
    lengths = np.fromiter((len(s) for s in seqs), dtype=np.int64, count=len(seqs))
    offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.concatenate([np.asarray(s, dtype=np.int64) for s in seqs]) if seqs else np.zeros(0, np.int64)
    return flat, offsets


def set_threads(threads: int | None):
    """Size numba's worker pool; ``None`` reads ``TRACESUMM_THREADS``."""
    if threads is None:
        env = os.environ.get("TRACESUMM_THREADS")
        threads = int(env) if env else None
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def edit_distance(a, b) -> int:
    """Minimum number of unit-cost insertions, deletions and substitutions.

    >>> edit_distance("kitten", "sitting")
    3
    """
    x, y = _as_int_pair(a, b)
    return int(_levenshtein(x, y))


def edit_distance_bounded(a, b, chi: int) -> int | None:
    """Edit distance if it is at most ``chi``, otherwise ``None``.

    Only the diagonal band of width ``2 * chi + 1`` is evaluated and the
    scan stops as soon as a whole band row exceeds ``chi``.
    """
    if chi < 0:
        raise ValueError("chi must be non-negative")
    x, y = _as_int_pair(a, b)
    d = int(_banded(x, y, int(chi)))
    return None if d < 0 else d


@dataclass(frozen=True)
class DistanceBounds:
    gamma: int
    lambda_bound: int


def bounds(a, b) -> DistanceBounds:
    """Length-difference lower bound and max-length upper bound on the distance."""
    la, lb = len(a), len(b)
    return DistanceBounds(abs(la - lb), max(la, lb))


class Verdict(enum.Enum):
    HOLDS = "Holds"
    VIOLATES_BY_RULE = "ViolatesByRule"
    UNDETERMINED = "Undetermined"


class ExactCheck(enum.Enum):
    CONFIRMED = "Confirmed"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class ContractiveVerdict:
    verdict: Verdict
    exact_check: ExactCheck | None = None


def classify_contractive(p, q, sp, sq) -> ContractiveVerdict:
    """Decide contractiveness of one pair from lengths alone.

    ``HOLDS`` when the originals' length gap is at least the longer summary;
    ``VIOLATES_BY_RULE`` when the summaries' length gap exceeds the longer
    original; ``UNDETERMINED`` otherwise.  No distance is computed.
    """
    orig, summ = bounds(p, q), bounds(sp, sq)
    if orig.gamma >= summ.lambda_bound:
        rule_counters["holds"] += 1
        return ContractiveVerdict(Verdict.HOLDS)
    if summ.gamma > orig.lambda_bound:
        rule_counters["violates_by_rule"] += 1
        log.warning("length rule for a guaranteed violation fired (|p|=%d, |q|=%d)", len(p), len(q))
        return ContractiveVerdict(Verdict.VIOLATES_BY_RULE)
    rule_counters["undetermined"] += 1
    return ContractiveVerdict(Verdict.UNDETERMINED)


def _symbols(s):
    return s.symbols if hasattr(s, "symbols") else s


def verify_contractive(p, q, sp, sq) -> ExactCheck:
    """Compare both distances exactly: ``CONFIRMED`` iff ed(p, q) >= ed(sp, sq)."""
    d = edit_distance(p, q)
    d_summary = edit_distance(_symbols(sp), _symbols(sq))
    return ExactCheck.CONFIRMED if d >= d_summary else ExactCheck.VIOLATED


def pairwise_distances(seqs: Sequence[np.ndarray], threads: int | None = None) -> np.ndarray:
    """Condensed all-pairs distance vector (row-major upper triangle, like scipy)."""
    n = len(seqs)
    out = np.zeros(n * (n - 1) // 2, dtype=np.int64)
    if n < 2:
        return out
    set_threads(threads)
    flat, offsets = _pack(seqs)
    _pairwise(flat, offsets, out)
    return out


def distances_to(query, seqs: Sequence[np.ndarray], chi: int | None = None, threads=None) -> np.ndarray:
    """Distance from ``query`` to every sequence; ``-1`` marks distances above ``chi``."""
    out = np.zeros(len(seqs), dtype=np.int64)
    if not seqs:
        return out
    set_threads(threads)
    flat, offsets = _pack(seqs)
    _one_to_many(np.asarray(query, dtype=np.int64), flat, offsets, -1 if chi is None else int(chi), out)
    return out
