import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import levenshtein_reference
from tracesumm.errors import MappingDomainError, UnknownTraceError
from tracesumm.schemes import build_mapping
from tracesumm.search import SummaryCache, evaluate_pairs, pair_metrics, threshold_search
from tracesumm.summarization import MappingFunction, build_random_mapping, identity_mapping
from tracesumm.trace_model import AttributeSchema, Trace, TraceSet, project_symbols


def corpus_of(*seqs, alphabet="abcd"):
    schema = AttributeSchema(("act",), (tuple(alphabet),))
    idx = {c: i for i, c in enumerate(alphabet)}
    return TraceSet(schema, tuple(Trace(f"q{i}", [[idx[c]] for c in s]) for i, s in enumerate(seqs)))


def brute_force_matches(corpus, query_id, chi, domain=("act",)):
    seqs = project_symbols(corpus, domain)
    q = seqs[corpus.position(query_id)]
    return {tid for tid, s in zip(corpus.ids, seqs) if levenshtein_reference(q, s) <= chi}


@pytest.fixture
def dup_corpus():
    return corpus_of("abca", "abca", "abcb", "dd", "abca")


def test_chi_zero_identity_returns_exact_duplicates(dup_corpus):
    f = identity_mapping(4, domain=("act",))
    res = threshold_search("q0", dup_corpus, f, 0, reduced=False, cache=SummaryCache())
    assert set(res.candidate_ids) == {"q0", "q1", "q4"}
    assert all(d == 0 for d in res.summary_distances.values())


def test_all_to_one_reduced_makes_everything_a_candidate(dup_corpus):
    f = MappingFunction("random", np.zeros(4, dtype=int), domain=("act",))
    for chi in (1, 2, 5):
        res = threshold_search("q3", dup_corpus, f, chi, reduced=True, cache=SummaryCache())
        assert res.candidate_ids == dup_corpus.ids


def test_verified_equals_brute_force_and_candidates_cover_it(small_log):
    log, _ = small_log
    cache = SummaryCache()
    for seed in range(3):
        f = build_random_mapping(len(log.schema.values[0]), 5, seed=seed, domain=("activity",))
        for qid in log.ids[:6]:
            truth = brute_force_matches(log, qid, 6, ("activity",))
            res = threshold_search(qid, log, f, 6, reduced=False, verify=True, cache=cache)
            assert set(res.verified_ids) == truth
            assert truth <= set(res.candidate_ids)
            assert set(res.verified_ids) <= set(res.candidate_ids)


def test_verified_ids_are_true_matches_under_reduced_mapping(small_log):
    log, _ = small_log
    f = build_mapping(log, "topic", k=5, base_attribute="activity")
    seqs = project_symbols(log, ("activity",))
    for qid in log.ids[:5]:
        res = threshold_search(qid, log, f, 8, reduced=True, verify=True, cache=SummaryCache())
        q = seqs[log.position(qid)]
        for tid in res.verified_ids:
            assert levenshtein_reference(q, seqs[log.position(tid)]) <= 8
            assert res.original_distances[tid] == levenshtein_reference(q, seqs[log.position(tid)])


def test_query_matches_itself(small_log):
    log, _ = small_log
    f = build_random_mapping(len(log.schema.values[0]), 3, seed=1, domain=("activity",))
    res = threshold_search(log.ids[10], log, f, 0, cache=SummaryCache())
    assert log.ids[10] in res.candidate_ids


def test_external_trace_query(dup_corpus):
    f = identity_mapping(4, domain=("act",))
    external = Trace("outside", [[0], [1], [2], [0]])
    res = threshold_search(external, dup_corpus, f, 0, reduced=False, cache=SummaryCache())
    assert set(res.candidate_ids) == {"q0", "q1", "q4"}


def test_unknown_query_id_raises_lookup_error(dup_corpus):
    f = identity_mapping(4, domain=("act",))
    with pytest.raises(LookupError):
        threshold_search("missing", dup_corpus, f, 1)
    with pytest.raises(UnknownTraceError):
        threshold_search("missing", dup_corpus, f, 1)


def test_out_of_domain_query_symbols_raise(dup_corpus):
    f = identity_mapping(4, domain=("act",))
    with pytest.raises(MappingDomainError):
        threshold_search([0, 9], dup_corpus, f, 1, cache=SummaryCache())


def test_negative_chi_rejected(dup_corpus):
    with pytest.raises(ValueError):
        threshold_search("q0", dup_corpus, identity_mapping(4, domain=("act",)), -1)


def test_candidates_monotone_in_chi(small_log):
    log, _ = small_log
    f = build_random_mapping(len(log.schema.values[0]), 4, seed=3, domain=("activity",))
    cache = SummaryCache()
    for qid in log.ids[:4]:
        prev = set()
        for chi in range(0, 20, 2):
            cur = set(threshold_search(qid, log, f, chi, cache=cache).candidate_ids)
            assert prev <= cur
            prev = cur


def test_non_reduced_recall_is_one(small_log):
    log, _ = small_log
    cache = SummaryCache()
    for seed in range(3):
        f = build_random_mapping(len(log.schema.values[0]), 3 + seed, seed=seed, domain=("activity",))
        for m in evaluate_pairs(log, f, [0, 4, 10, 16], reduced=False, cache=cache):
            assert m.recall == 1.0
            assert m.violation_count == 0


def test_identity_non_reduced_is_exact(small_log):
    log, _ = small_log
    f = build_mapping(log, "identity", base_attribute="activity")
    for m in evaluate_pairs(log, f, [0, 3, 12], reduced=False, cache=SummaryCache()):
        assert m.false_positive_rate == 0.0
        assert m.recall == 1.0


def test_evaluate_pairs_counts_unordered_pairs(small_log):
    log, _ = small_log
    f = build_mapping(log, "random", k=4, base_attribute="activity")
    m = evaluate_pairs(log, f, 5, cache=SummaryCache())
    assert m.n_pairs == len(log) * (len(log) - 1) // 2


def test_evaluate_pairs_needs_two_traces():
    with pytest.raises(ValueError):
        evaluate_pairs(corpus_of("ab"), identity_mapping(4, domain=("act",)), 1)


def test_empty_candidate_and_truth_conventions():
    m = pair_metrics(np.array([5, 7]), np.array([4, 6]), 1)
    assert m.n_candidates == 0 and m.false_positive_rate == 0.0
    assert m.n_true == 0 and m.recall == 1.0


def test_pair_metrics_hand_example():
    original = np.array([1, 3, 5, 2])
    summary = np.array([1, 2, 1, 3])
    m = pair_metrics(original, summary, 2)
    # candidates: 0,1,2 ; true: 0,3
    assert m.false_positive_rate == pytest.approx(2 / 3)
    assert m.recall == pytest.approx(1 / 2)
    assert m.violation_count == 1
    assert m.violation_fraction == pytest.approx(1 / 4)


@settings(max_examples=100)
@given(
    st.lists(st.integers(0, 30), min_size=1, max_size=40).flatmap(
        lambda xs: st.tuples(st.just(xs), st.lists(st.integers(0, 30), min_size=len(xs), max_size=len(xs)))
    ),
    st.integers(0, 30),
)
def test_metrics_stay_in_unit_interval(pair, chi):
    m = pair_metrics(np.array(pair[0]), np.array(pair[1]), chi)
    for v in (m.false_positive_rate, m.recall, m.violation_fraction):
        assert 0.0 <= v <= 1.0


def test_summary_cache_reuses_and_evicts(dup_corpus):
    cache = SummaryCache(maxsize=2)
    f = identity_mapping(4, domain=("act",))
    g = build_random_mapping(4, 2, seed=0, domain=("act",))
    first = cache.summaries(dup_corpus, f, True)
    assert cache.summaries(dup_corpus, f, True) is first
    cache.summaries(dup_corpus, g, True)
    cache.summaries(dup_corpus, g, False)
    assert cache.summaries(dup_corpus, f, True) is not first


def test_cache_key_follows_content_not_identity(dup_corpus):
    cache = SummaryCache()
    f = identity_mapping(4, domain=("act",))
    a = cache.summaries(dup_corpus, f, True)
    rebuilt = TraceSet(dup_corpus.schema, dup_corpus.traces)
    assert cache.summaries(rebuilt, identity_mapping(4, domain=("act",)), True) is a


def test_search_is_deterministic_across_threads(small_log):
    log, _ = small_log
    f = build_random_mapping(len(log.schema.values[0]), 6, seed=2, domain=("activity",))
    one = threshold_search(log.ids[0], log, f, 10, threads=1, verify=True, cache=SummaryCache())
    many = threshold_search(log.ids[0], log, f, 10, threads=4, verify=True, cache=SummaryCache())
    assert one.candidate_ids == many.candidate_ids
    assert one.summary_distances == many.summary_distances
    assert one.verified_ids == many.verified_ids
