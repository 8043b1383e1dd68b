"""Build a mapping function from a scheme name and its parameters."""

from __future__ import annotations

from typing import Sequence

from .errors import ParameterError
from .summarization import MappingFunction, build_attribute_mapping, build_random_mapping, identity_mapping
from .topic_model import default_base_attribute, fit_topic_model
from .trace_model import TraceSet, composite_alphabet

SCHEMES = ("attribute", "topic", "random", "identity")

__all__ = ["SCHEMES", "build_mapping", "validate_scheme"]


def validate_scheme(scheme: str, *, k=None, attrs=(), lam=0.5, method="nmf"):
    """Reject bad scheme parameters before any data is touched."""
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme in ("topic", "random"):
        if k is None:
            raise ParameterError(f"scheme {scheme!r} needs k")
        if int(k) < 1:
            raise ParameterError(f"k={k} must be at least 1")
    if scheme == "attribute" and not attrs:
        raise ParameterError("scheme 'attribute' needs a non-empty attribute list")
    if scheme == "topic":
        if not 0.0 <= float(lam) <= 1.0:
            raise ParameterError(f"lambda={lam} must lie in [0, 1]")
        if method not in ("svd", "nmf"):
            raise ParameterError(f"unknown reduction method {method!r}")


def build_mapping(
    corpus: TraceSet,
    scheme: str,
    *,
    k: int | None = None,
    attrs: Sequence[str] = (),
    lam: float = 0.5,
    method: str = "nmf",
    seed=0,
    base_attribute: str | None = None,
) -> MappingFunction:
    """Mapping for ``scheme`` fitted to ``corpus``.

    ``topic``, ``random`` and ``identity`` act on ``base_attribute`` (the
    attribute with most distinct values by default); ``attribute`` acts on
    the composite of all attributes and keeps only ``attrs``.
    """
    validate_scheme(scheme, k=k, attrs=attrs, lam=lam, method=method)
    base = base_attribute or default_base_attribute(corpus.schema)
    size = len(composite_alphabet(corpus, (base,)))
    if scheme == "attribute":
        return build_attribute_mapping(corpus, attrs)
    if scheme == "identity":
        return identity_mapping(size, corpus.schema.values[corpus.schema.index(base)], (base,))
    if scheme == "random":
        if k > size:
            raise ParameterError(f"k={k} exceeds the {size} symbols of {base!r}")
        return build_random_mapping(size, int(k), seed=seed, domain=(base,))
    return fit_topic_model(corpus, int(k), base_attribute=base, lam=lam, method=method, seed=seed).mapping
