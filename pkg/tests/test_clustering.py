import logging
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.cluster.hierarchy import fcluster, linkage as scipy_linkage
from scipy.spatial.distance import squareform
from sklearn.metrics import adjusted_rand_score

from conftest import levenshtein_reference
from tracesumm.clustering import (
    Clustering,
    DistanceMatrix,
    distance_matrix,
    hierarchical_cluster,
    weighted_cluster_quality,
)
from tracesumm.errors import MappingDomainError, ParameterError
from tracesumm.summarization import MappingFunction, identity_mapping
from tracesumm.trace_model import AttributeSchema, Trace, TraceSet, project_symbols


def corpus_of(*seqs, alphabet="abcdefgh"):
    schema = AttributeSchema(("act",), (tuple(alphabet),))
    idx = {c: i for i, c in enumerate(alphabet)}
    return TraceSet(schema, tuple(Trace(f"c{i}", [[idx[c]] for c in s]) for i, s in enumerate(seqs)))


def planted(n_per=4, seed=0):
    """Groups of near-duplicates around far-apart centres."""
    rng = np.random.default_rng(seed)
    centres = ["a" * 20, "bc" * 10, "de" * 10, "fg" * 10]
    seqs, truth = [], []
    for g, c in enumerate(centres):
        for _ in range(n_per):
            s = list(c)
            s[rng.integers(len(s))] = "h"
            seqs.append("".join(s))
            truth.append(g)
    return corpus_of(*seqs), np.array(truth)


def test_two_identical_traces_give_zero():
    m = distance_matrix(corpus_of("abc", "abc"))
    assert m.condensed.tolist() == [0]


def test_identity_mapping_matches_original_space():
    corpus = corpus_of("abca", "bb", "cabd")
    plain = distance_matrix(corpus)
    mapped = distance_matrix(corpus, identity_mapping(8, domain=("act",)), reduced=False)
    assert np.array_equal(plain.condensed, mapped.condensed)
    assert plain.space == "original"
    assert mapped.space.startswith("summary(identity")


def test_matrix_matches_serial_reference(small_log):
    log, _ = small_log
    sub = log.subset(range(25))
    m = distance_matrix(sub, domain=("activity",))
    seqs = project_symbols(sub, ("activity",))
    D = m.square()
    for i in range(len(seqs)):
        assert D[i, i] == 0
        for j in range(i + 1, len(seqs)):
            assert D[i, j] == D[j, i] == levenshtein_reference(seqs[i], seqs[j])


def test_matrix_needs_two_traces():
    with pytest.raises(ParameterError):
        distance_matrix(corpus_of("ab"))


def test_mapping_domain_error_propagates():
    corpus = corpus_of("ab", "ha")
    small = MappingFunction("random", [0, 1, 0], domain=("act",))
    with pytest.raises(MappingDomainError):
        distance_matrix(corpus, small)


def _best_two_partition(D):
    n = D.shape[0]
    best, arg = np.inf, None
    for lab in product((0, 1), repeat=n):
        if lab[0] != 0 or len(set(lab)) < 2:
            continue
        lab = np.array(lab)
        cost = sum(D[i, j] for i in range(n) for j in range(i + 1, n) if lab[i] == lab[j])
        if cost < best:
            best, arg = cost, lab
    return arg


def test_two_separated_groups_match_brute_force():
    corpus = corpus_of("abcd", "abcd", "abce", "ghgh", "ghgh", "ghhh", "abcd")
    m = distance_matrix(corpus)
    for link in ("average", "complete"):
        c = hierarchical_cluster(m, 2, link)
        assert adjusted_rand_score(_best_two_partition(m.square()), c.labels) == 1.0
        assert c.labels.tolist() == [0, 0, 0, 1, 1, 1, 0]


def test_n_equals_n_gives_singletons_and_one_gives_single_cluster():
    m = distance_matrix(corpus_of("ab", "ba", "cc", "abc"))
    assert hierarchical_cluster(m, 4).labels.tolist() == [0, 1, 2, 3]
    assert hierarchical_cluster(m, 1).labels.tolist() == [0, 0, 0, 0]


@pytest.mark.parametrize("bad", [0, 5, -1])
def test_cluster_count_out_of_range(bad):
    m = distance_matrix(corpus_of("ab", "ba", "cc", "abc"))
    with pytest.raises(ParameterError):
        hierarchical_cluster(m, bad)


def test_unknown_linkage_rejected():
    m = distance_matrix(corpus_of("ab", "ba"))
    with pytest.raises(ParameterError):
        hierarchical_cluster(m, 1, "single")


@given(st.lists(st.text("abc", min_size=1, max_size=7), min_size=2, max_size=10), st.data())
def test_labels_dense_and_total(seqs, data):
    m = distance_matrix(corpus_of(*seqs))
    k = data.draw(st.integers(1, len(seqs)))
    c = hierarchical_cluster(m, k)
    assert sorted(set(c.labels.tolist())) == list(range(k))
    assert len(c.assignments) == len(seqs)


@given(st.lists(st.text("abcd", min_size=1, max_size=8), min_size=2, max_size=12))
def test_average_heights_non_decreasing(seqs):
    c = hierarchical_cluster(distance_matrix(corpus_of(*seqs)), 1)
    heights = [h for _, _, h, _ in c.merges]
    assert all(b >= a - 1e-9 for a, b in zip(heights, heights[1:]))


@pytest.mark.parametrize("method", ["average", "complete"])
def test_heights_match_scipy(method):
    # tie-free distances; under ties complete-linkage heights depend on merge order
    condensed = np.random.default_rng(11).random(30 * 29 // 2)
    m = DistanceMatrix(tuple(f"x{i}" for i in range(30)), condensed)
    ours = sorted(h for _, _, h, _ in hierarchical_cluster(m, 1, method).merges)
    ref = sorted(scipy_linkage(m.condensed.astype(float), method)[:, 2])
    assert np.allclose(ours, ref)


def test_partition_agrees_with_scipy_without_ties():
    rng = np.random.default_rng(3)
    condensed = rng.random(45)
    m = DistanceMatrix(tuple(f"x{i}" for i in range(10)), condensed)
    for n_clusters in range(1, 11):
        ours = hierarchical_cluster(m, n_clusters).labels
        ref = fcluster(scipy_linkage(condensed, "average"), n_clusters, "maxclust")
        assert adjusted_rand_score(ref, ours) == 1.0


def test_deterministic(small_log):
    log, _ = small_log
    m = distance_matrix(log, domain=("activity",))
    a = hierarchical_cluster(m, 4)
    b = hierarchical_cluster(distance_matrix(log, domain=("activity",)), 4)
    assert np.array_equal(a.labels, b.labels)
    assert a.merges == b.merges


def test_planted_clusters_have_high_silhouette():
    corpus, truth = planted()
    m = distance_matrix(corpus)
    c = hierarchical_cluster(m, 4)
    q = weighted_cluster_quality(c, m, truth)
    assert q.ari == 1.0
    assert q.silhouette >= 0.9
    assert q.to_json()["N"] == 4


def test_random_assignment_has_near_zero_ari():
    corpus, truth = planted(n_per=10)
    m = distance_matrix(corpus)
    aris = []
    for seed in range(20):
        labels = np.random.default_rng(seed).integers(0, 4, len(truth))
        aris.append(weighted_cluster_quality(Clustering(m.ids, labels, 4), m, truth).ari)
    assert abs(np.mean(aris)) < 0.1


def test_identical_clusterings_have_ari_one(small_log):
    log, _ = small_log
    m = distance_matrix(log, domain=("activity",))
    c = hierarchical_cluster(m, 3)
    assert weighted_cluster_quality(c, m, c).ari == 1.0


def test_singletons_give_null_silhouette_with_warning(caplog):
    m = distance_matrix(corpus_of("ab", "ba", "cc"))
    with caplog.at_level(logging.WARNING, logger="tracesumm.clustering"):
        q = weighted_cluster_quality(hierarchical_cluster(m, 3), m)
    assert q.silhouette is None
    assert q.weighted_intra == 0.0
    assert "silhouette undefined" in caplog.text


def test_weighted_intra_by_hand():
    # clusters {0,1} (d=2) and {2,3,4} (d=1,3,2 -> mean 2)
    D = np.array(
        [
            [0, 2, 9, 9, 9],
            [2, 0, 9, 9, 9],
            [9, 9, 0, 1, 3],
            [9, 9, 1, 0, 2],
            [9, 9, 3, 2, 0],
        ]
    )
    m = DistanceMatrix(tuple("abcde"), squareform(D))
    q = weighted_cluster_quality(Clustering(m.ids, np.array([0, 0, 1, 1, 1]), 2), m)
    assert q.weighted_intra == pytest.approx((2 * 2 + 3 * 2) / 5)


def test_quality_rejects_mismatched_ids():
    m = distance_matrix(corpus_of("ab", "ba", "cc"))
    other = Clustering(("x", "y", "z"), np.array([0, 0, 1]), 2)
    with pytest.raises(ParameterError):
        weighted_cluster_quality(other, m)
