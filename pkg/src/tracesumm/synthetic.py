"""Seeded synthetic event logs with planted variant structure.

Activities are laid out in a random topological order and split into
consecutive blocks.  Each variant (planted cluster) walks a random path
through that order: it visits a subset of the blocks and, inside each
visited block, an ordered subset of its activities, occasionally repeating
an activity.  Traces copy their variant's path and then receive
insertion/substitution noise.  Two auxiliary attributes, ``sector`` (the
block) and ``responsible`` (a team per pair of blocks, with some activities
handed to a neighbouring team), make attribute-based summaries meaningful.
"""

from __future__ import annotations

import numpy as np

from .trace_model import AttributeSchema, Trace, TraceSet

__all__ = ["generate_synthetic_log", "sub_models"]


def _layout(rng, n_activities, n_blocks):
    order = rng.permutation(n_activities)
    blocks = np.array_split(order, n_blocks)
    block_of = np.empty(n_activities, dtype=np.int64)
    for b, members in enumerate(blocks):
        block_of[members] = b
    return blocks, block_of


def sub_models(rng, blocks, n_variants, *, p_block=0.6, p_activity=0.6):
    """Per-variant visit probabilities for blocks and activities.

    A variant keeps a random subset of blocks and, inside each kept block, a
    random subset of activities.  Kept items are visited with high but not
    certain probability so traces of one variant still differ from each
    other.
    """
    n_act = sum(b.size for b in blocks)
    models = []
    for _ in range(n_variants):
        keep_block = rng.random(len(blocks)) < p_block
        if not keep_block.any():
            keep_block[rng.integers(len(blocks))] = True
        p_visit = np.where(keep_block, rng.uniform(0.75, 1.0, len(blocks)), 0.0)
        p_act = np.zeros(n_act)
        for members in blocks:
            take = rng.random(members.size) < p_activity
            if not take.any():
                take[rng.integers(members.size)] = True
            p_act[members[take]] = rng.uniform(0.6, 1.0, int(take.sum()))
        models.append((p_visit, p_act))
    return models


def _walk(rng, blocks, model, p_repeat):
    p_visit, p_act = model
    path = []
    for b, members in enumerate(blocks):
        if rng.random() >= p_visit[b]:
            continue
        for a in members[rng.random(members.size) < p_act[members]]:
            path.append(int(a))
            while rng.random() < p_repeat:
                path.append(int(a))
    return path


def _perturb(rng, path, noise, n_activities):
    out = []
    for a in path:
        r = rng.random()
        if r < noise / 2:
            out.append(int(rng.integers(n_activities)))  # substitution
            continue
        out.append(a)
        if r < noise:
            out.append(int(rng.integers(n_activities)))  # insertion
    return out


def generate_synthetic_log(
    n_traces: int = 2000,
    n_activities: int = 113,
    *,
    n_variants: int = 4,
    noise: float = 0.03,
    p_repeat: float = 0.05,
    n_blocks: int | None = None,
    seed=0,
    return_truth: bool = False,
):
    """Generate a corpus with ``n_variants`` planted clusters.

    Parameters
    ----------
    n_traces, n_activities : int
        Corpus size and activity alphabet size.  Every activity appears in
        the schema, used or not.
    n_variants : int
        Number of distinct variant paths (planted clusters).
    noise : float
        Per-event probability of a perturbation; half of it is spent on
        substitutions, half on insertions of a uniformly drawn activity.
    n_blocks : int, optional
        Number of activity blocks; defaults to ``round(sqrt(n_activities))``.
    seed : int
        Everything is derived from this seed.
    return_truth : bool
        Also return the variant index of every trace.
    """
    if n_traces < 1:
        raise ValueError("n_traces must be at least 1")
    if n_activities < 2:
        raise ValueError("n_activities must be at least 2")
    rng = np.random.default_rng(seed)
    n_blocks = n_blocks or max(2, int(round(np.sqrt(n_activities))))
    n_blocks = min(n_blocks, n_activities)
    blocks, block_of = _layout(rng, n_activities, n_blocks)
    team_of_block = np.arange(n_blocks) // 2
    n_teams = int(team_of_block.max()) + 1
    team = team_of_block[block_of].copy()
    moved = rng.random(n_activities) < 0.15
    team[moved] = (team[moved] + 1) % n_teams

    models = sub_models(rng, blocks, n_variants)
    labels = rng.integers(n_variants, size=n_traces)
    width = len(str(n_traces - 1))
    traces = []
    for i, v in enumerate(labels):
        path = _walk(rng, blocks, models[v], p_repeat)
        if not path:
            path = [int(blocks[0][0])]
        acts = np.array(_perturb(rng, path, noise, n_activities), dtype=np.int64)
        events = np.stack([acts, block_of[acts], team[acts]], axis=1)
        traces.append(Trace(f"t{i:0{width}d}", events))
    schema = AttributeSchema(
        ("activity", "sector", "responsible"),
        (
            tuple(f"act_{a:03d}" for a in range(n_activities)),
            tuple(f"sector_{b:02d}" for b in range(n_blocks)),
            tuple(f"team_{t:02d}" for t in range(n_teams)),
        ),
    )
    log = TraceSet(schema, tuple(traces))
    return (log, labels) if return_truth else log
