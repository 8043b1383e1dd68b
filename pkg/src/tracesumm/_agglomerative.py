"""Deterministic agglomerative merging shared by topic assignment and trace clustering."""

from __future__ import annotations

import numpy as np

LINKAGES = ("average", "complete")


def agglomerate(scores, *, maximize: bool, linkage: str = "average", active=None):
    """Merge clusters pairwise until one cluster per connected run remains.

    ``scores`` is a symmetric ``(n, n)`` matrix of pairwise similarities
    (``maximize=True``) or distances (``maximize=False``).  Each cluster
    lives in the slot of its smallest member; the best pair is chosen with
    ties going to the lexicographically smallest ``(i, j)``.  Only slots
    flagged in ``active`` take part.

    Returns a list of ``(i, j, score, size)`` merges where cluster ``j`` is
    folded into cluster ``i < j``.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}")
    S = np.array(scores, dtype=np.float64, copy=True)
    n = S.shape[0]
    if not maximize:
        S = -S
    alive = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool).copy()
    size = np.ones(n, dtype=np.int64)
    mask = ~(alive[:, None] & alive[None, :])
    np.fill_diagonal(mask, True)
    S[mask] = -np.inf
    merges = []
    for _ in range(int(alive.sum()) - 1):
        flat = int(np.argmax(S))  # row-major first hit = smallest (i, j) with i < j
        i, j = divmod(flat, n)
        best = S[i, j]
        if linkage == "average":
            row = (size[i] * S[i] + size[j] * S[j]) / (size[i] + size[j])
        else:
            row = np.minimum(S[i], S[j])  # negated distances: min == farthest
        S[i, :] = row
        S[:, i] = row
        S[i, i] = -np.inf
        S[j, :] = -np.inf
        S[:, j] = -np.inf
        size[i] += size[j]
        alive[j] = False
        merges.append((i, j, float(best if maximize else -best), int(size[i])))
    return merges


def cut(n, merges, n_clusters, active=None):
    """Labels after the first ``len(active) - n_clusters`` merges.

    Cluster ids are dense and ordered by each cluster's smallest member;
    inactive slots get ``-1``.
    """
    parent = np.arange(n)
    alive = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    n_merges = max(0, int(alive.sum()) - n_clusters)
    for i, j, _, _ in merges[:n_merges]:
        parent[parent == j] = i
    labels = np.full(n, -1, dtype=np.int64)
    roots = {}
    for x in np.flatnonzero(alive):
        r = parent[x]
        labels[x] = roots.setdefault(r, len(roots))
    return labels
