"""Many-to-one symbol mappings and (reduced) summarization of traces."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, MappingDomainError, ParameterError, SchemaError
from .trace_model import TraceSet, composite_alphabet, project_symbols

__all__ = [
    "MappingFunction",
    "SummarySequence",
    "apply_mapping",
    "apply_reduced_mapping",
    "build_attribute_mapping",
    "build_random_mapping",
    "identity_mapping",
    "check_sequence_preserving",
    "summarize",
]

KINDS = ("attribute", "topic", "random", "identity")


@dataclass(frozen=True, eq=False)
class MappingFunction:
    """Total map from original symbol codes to summary codes.

    ``table[c]`` is the summary code of original code ``c``.  ``domain`` names
    the attributes whose composite symbols form the original alphabet, so a
    mapping knows how to project a :class:`~tracesumm.trace_model.TraceSet`
    before it is applied.  With ``spare`` set, the highest summary code
    collects symbols that never occur in the data it was fitted on and is
    not counted by :attr:`k`.
    """

    kind: str
    table: np.ndarray
    labels: tuple[str, ...] = ()
    domain: tuple[str, ...] | None = None
    spare: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown mapping kind {self.kind!r}")
        table = np.array(self.table, dtype=np.int64, copy=True).ravel()
        if table.size and table.min() < 0:
            raise ParameterError("summary codes must be non-negative")
        size = int(table.max()) + 1 if table.size else 0
        if np.unique(table).size != size:
            raise ParameterError("every summary code in [0, size) must be used")
        labels = tuple(self.labels) or tuple(str(i) for i in range(size))
        if len(labels) != size:
            raise ParameterError(f"{len(labels)} labels for {size} summary symbols")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "labels", labels)
        if self.domain is not None:
            object.__setattr__(self, "domain", tuple(self.domain))

    @property
    def domain_size(self) -> int:
        return self.table.size

    @property
    def summary_alphabet_size(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        """Number of summary classes, excluding a spare class."""
        return self.summary_alphabet_size - int(self.spare)

    def __call__(self, symbols) -> np.ndarray:
        arr = np.asarray(symbols, dtype=np.int64)
        if arr.size:
            bad = (arr < 0) | (arr >= self.table.size)
            if bad.any():
                raise MappingDomainError(int(arr[bad][0]), self.table.size)
        return self.table[arr]

    def __eq__(self, other):
        if not isinstance(other, MappingFunction):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.table, other.table)
            and self.labels == other.labels
            and self.domain == other.domain
            and self.spare == other.spare
        )

    __hash__ = None

    def relabel(self, labels: Sequence[str]) -> "MappingFunction":
        return MappingFunction(self.kind, self.table, tuple(labels), self.domain, self.spare)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "k": self.k, "table": self.table.tolist(), "labels": list(self.labels)}
        if self.domain is not None:
            out["domain"] = list(self.domain)
        if self.spare:
            out["spare"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MappingFunction":
        f = cls(obj["kind"], obj["table"], tuple(obj.get("labels", ())), obj.get("domain"), bool(obj.get("spare")))
        if "k" in obj and obj["k"] != f.k:
            raise ParameterError(f"declared k={obj['k']} but table uses {f.k} codes")
        return f

    @cached_property
    def digest(self) -> str:
        return hashlib.sha1(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class SummarySequence:
    """A summary with provenance.

    ``origin_index[i]`` lists the 1-based original positions covered by
    summary item ``i``.
    """

    symbols: np.ndarray
    origin_index: tuple[tuple[int, ...], ...]
    reduced: bool = False

    def __post_init__(self):
        sym = np.array(self.symbols, dtype=np.int64, copy=True).ravel()
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)
        origin = tuple(tuple(int(i) for i in run) for run in self.origin_index)
        object.__setattr__(self, "origin_index", origin)
        if len(origin) != sym.size:
            raise ConsistencyError(f"{sym.size} symbols but {len(origin)} provenance entries")

    def __len__(self):
        return self.symbols.size

    def __eq__(self, other):
        if not isinstance(other, SummarySequence):
            return NotImplemented
        return (
            np.array_equal(self.symbols, other.symbols)
            and self.origin_index == other.origin_index
            and self.reduced == other.reduced
        )

    __hash__ = None

    @property
    def original_length(self) -> int:
        return sum(len(r) for r in self.origin_index)


def apply_mapping(trace_symbols, f: MappingFunction) -> SummarySequence:
    """Substitute every symbol by its image under ``f``, keeping positions."""
    mapped = f(trace_symbols)
    return SummarySequence(mapped, tuple((i,) for i in range(1, mapped.size + 1)), reduced=False)


def _runs(mapped: np.ndarray) -> np.ndarray:
    if mapped.size == 0:
        return np.zeros(1, dtype=np.int64)
    starts = np.flatnonzero(np.diff(mapped) != 0) + 1
    return np.concatenate(([0], starts, [mapped.size]))


def apply_reduced_mapping(trace_symbols, f: MappingFunction) -> SummarySequence:
    """Map, then collapse maximal runs of equal summary symbols into one item.

    Runs are detected on mapped values, so two different original symbols
    with the same image collapse together.
    """
    mapped = f(trace_symbols)
    bounds = _runs(mapped)
    origin = tuple(tuple(range(lo + 1, hi + 1)) for lo, hi in zip(bounds[:-1], bounds[1:]))
    return SummarySequence(mapped[bounds[:-1]] if mapped.size else mapped, origin, reduced=True)


def reduced_symbols(trace_symbols, f: MappingFunction) -> np.ndarray:
    """Symbols of :func:`apply_reduced_mapping` without building provenance."""
    mapped = f(trace_symbols)
    if mapped.size == 0:
        return mapped
    keep = np.empty(mapped.size, dtype=bool)
    keep[0] = True
    np.not_equal(mapped[1:], mapped[:-1], out=keep[1:])
    return mapped[keep]


def identity_mapping(size: int, labels: Sequence[str] = (), domain=None) -> MappingFunction:
    return MappingFunction("identity", np.arange(size), tuple(labels), domain)


def build_attribute_mapping(trace_set: TraceSet, attrs: Sequence[str]) -> MappingFunction:
    """Attribute-compatible mapping over the full composite alphabet.

    Two composite symbols share a summary code exactly when they agree on
    every attribute in ``attrs``.
    """
    attrs = list(attrs)
    if not attrs:
        raise SchemaError("attribute subset must be non-empty")
    schema = trace_set.schema
    sel = [schema.index(a) for a in attrs]
    full = list(schema.attributes)
    alphabet = composite_alphabet(trace_set, full)
    keys: dict[tuple, int] = {}
    table = np.empty(len(alphabet), dtype=np.int64)
    for code, sym in enumerate(alphabet):
        key = tuple(sym[k] for k in sel)
        table[code] = keys.setdefault(key, len(keys))
    labels = tuple("/".join(schema.values[k][c] for k, c in zip(sel, key)) for key in keys)
    return MappingFunction("attribute", table, labels, tuple(full))


def build_random_mapping(alphabet_size: int, k: int, seed=None, domain=None) -> MappingFunction:
    """Assign each original code to one of ``k`` summary codes uniformly at random.

    Empty classes are filled afterwards, lowest empty code first, by moving
    the highest original code out of the currently largest class.
    """
    if alphabet_size < 1 or not 1 <= k <= alphabet_size:
        raise ParameterError(f"k={k} must lie in [1, {alphabet_size}]")
    rng = np.random.default_rng(seed)
    table = rng.integers(0, k, size=alphabet_size)
    counts = np.bincount(table, minlength=k)
    for empty in range(k):
        if counts[empty]:
            continue
        donor = int(np.argmax(counts))  # first max = lowest code among ties
        member = int(np.flatnonzero(table == donor)[-1])
        table[member] = empty
        counts[donor] -= 1
        counts[empty] += 1
    return MappingFunction("random", table, (), domain)


def check_sequence_preserving(original, summary: SummarySequence, f: MappingFunction) -> bool:
    """True iff original order never maps to decreasing summary positions.

    Raises :class:`ConsistencyError` when the provenance does not cover each
    original position exactly once or when a covered symbol disagrees with
    its image under ``f``.
    """
    original = np.asarray(original, dtype=np.int64)
    m = original.size
    pos = np.full(m, -1, dtype=np.int64)
    for s_pos, run in enumerate(summary.origin_index):
        for i in run:
            if not 1 <= i <= m or pos[i - 1] != -1:
                raise ConsistencyError(f"original position {i} covered twice or out of range")
            pos[i - 1] = s_pos
    if (pos < 0).any():
        raise ConsistencyError(f"original position {int(np.argmin(pos)) + 1} not covered")
    if m and not np.array_equal(f(original), summary.symbols[pos]):
        raise ConsistencyError("summary symbols disagree with the mapped original")
    return bool(np.all(np.diff(pos) >= 0))


def summarize(trace_set: TraceSet, f: MappingFunction, reduced: bool = True) -> list[SummarySequence]:
    """Summarize every trace of a corpus under ``f``."""
    if f.domain is None:
        raise SchemaError("mapping has no attribute domain; project the traces explicitly")
    apply = apply_reduced_mapping if reduced else apply_mapping
    return [apply(s, f) for s in project_symbols(trace_set, f.domain)]


def summary_symbols(
    trace_set: TraceSet, f: MappingFunction | None, reduced: bool = True, domain: Sequence[str] | None = None
) -> list[np.ndarray]:
    """Bare summary symbol arrays per trace, without provenance.

    With ``f=None`` the traces are returned in original space, projected
    onto ``domain`` (all schema attributes by default).
    """
    if f is None:
        return project_symbols(trace_set, domain or trace_set.schema.attributes)
    if f.domain is None:
        raise SchemaError("mapping has no attribute domain; project the traces explicitly")
    seqs = project_symbols(trace_set, f.domain)
    if reduced:
        return [reduced_symbols(s, f) for s in seqs]
    return [f(s) for s in seqs]
