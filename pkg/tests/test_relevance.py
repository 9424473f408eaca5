import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medquery import (InputError, ScoredTerm, apply_cutoff, best_term_match,
                      mark_retained, rank_terms, score_all, two_means_split)

from .oracles import cosine as oracle_cosine
from .oracles import two_means_brute

score_lists = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, width=64),
    min_size=1, max_size=64)


def _scored(code, label, sq, sb, retained=False):
    return ScoredTerm(code=code, label=label, sim_query=sq, sim_best=sb,
                      combined=(sq + sb) / 2, retained=retained)


# --- score_all ---------------------------------------------------------------

def test_best_match_scores_one(vocab, emb, provider):
    outcome = best_term_match("Tremor", vocab, emb, 0.90, provider)
    scored = score_all(outcome.query_vector, outcome.best_vector, emb, vocab)
    assert len(scored) == len(vocab.current_pts)
    assert all(not t.retained for t in scored)
    row = next(t for t in scored if t.label == "Tremor")
    assert row.sim_best == pytest.approx(1.0, abs=1e-6)
    assert row.combined == (row.sim_query + row.sim_best) / 2


def test_scores_match_cosine_oracle(vocab, emb, provider):
    outcome = best_term_match("Low blood glucose", vocab, emb, 0.90, provider)
    scored = score_all(outcome.query_vector, outcome.best_vector, emb, vocab)
    q = outcome.query_vector.tolist()
    b = outcome.best_vector.tolist()
    for row in scored[:25]:
        v = emb.vector(row.code).tolist()
        assert row.sim_query == pytest.approx(oracle_cosine(v, q), abs=1e-6)
        assert row.sim_best == pytest.approx(oracle_cosine(v, b), abs=1e-6)
        assert -1.0 <= row.combined <= 1.0


def test_score_all_dims_mismatch(vocab, emb):
    with pytest.raises(InputError):
        score_all(np.zeros(8, dtype=np.float32),
                  np.zeros(emb.dims, dtype=np.float32), emb, vocab)


# --- two_means_split ---------------------------------------------------------

def test_clear_gap_split():
    split = two_means_split([0.10, 0.12, 0.90, 0.92])
    assert split.low_count == 2
    assert split.high_count == 2
    assert split.split_value == 0.90
    assert split.sse == pytest.approx(0.0004, abs=1e-12)


def test_constant_scores_degenerate():
    split = two_means_split([0.5, 0.5, 0.5])
    assert split.low_count == 0
    assert split.high_count == 3
    assert split.split_value == 0.5


def test_single_value_degenerate():
    split = two_means_split([0.7])
    assert split.high_count == 1
    assert split.split_value == 0.7


def test_empty_rejected():
    with pytest.raises(InputError):
        two_means_split([])


@settings(max_examples=150, deadline=None)
@given(score_lists)
def test_two_means_equals_brute_force(scores):
    split = two_means_split(scores)
    low, high, sse = two_means_brute(scores)
    assert split.low_count == len(low)
    assert split.high_count == len(high)
    assert split.sse == pytest.approx(sse, abs=1e-9)
    if high:
        assert split.split_value == min(high)
    if low and high:
        assert max(low) <= min(high)


# --- mark_retained / rank_terms / apply_cutoff -------------------------------

def test_boundary_score_is_retained():
    terms = [_scored("1", "A", 0.2, 0.2), _scored("2", "B", 0.9, 0.9)]
    split = two_means_split([t.combined for t in terms])
    marked = mark_retained(terms, split, [])
    assert [t.retained for t in marked] == [False, True]
    exact = next(t for t in marked if t.combined == split.split_value)
    assert exact.retained


def test_best_codes_force_retained():
    terms = [_scored("1", "A", 0.1, 0.1), _scored("2", "B", 0.9, 0.9)]
    split = two_means_split([t.combined for t in terms])
    marked = mark_retained(terms, split, ["1"])
    assert all(t.retained for t in marked)


def test_retained_set_permutation_invariant(fixture_results):
    import random
    result = fixture_results["Rash"]
    from medquery import score_all as _  # noqa: F401  (import kept local)
    # recompute retained flags from a shuffled copy of the scored list
    terms = list(result.ranked)
    codes = {t.code for t in terms}
    shuffled = terms[:]
    random.Random(7).shuffle(shuffled)
    split = result.split
    remarked = mark_retained(shuffled, split, [])
    assert {t.code for t in remarked if t.retained} >= codes - {
        t.code for t in terms if t.combined < split.split_value}


def test_rank_orders_by_sim_best_desc():
    terms = [_scored("1", "A", 0.5, 0.8, True), _scored("2", "B", 0.5, 0.9, True)]
    ranked = rank_terms(terms)
    assert [t.sim_best for t in ranked] == [0.9, 0.8]


def test_rank_tie_breaks_by_label():
    terms = [_scored("2", "Bradypnoea", 0.5, 0.9, True),
             _scored("1", "Apnoea", 0.5, 0.9, True)]
    ranked = rank_terms(terms)
    assert [t.label for t in ranked] == ["Apnoea", "Bradypnoea"]


def test_rank_excludes_unretained():
    terms = [_scored("1", "A", 0.5, 0.8, False), _scored("2", "B", 0.5, 0.9, True)]
    assert len(rank_terms(terms)) == 1


def test_cutoff_noop_at_minus_one(fixture_results):
    ranked = list(fixture_results["Tremor"].ranked)
    assert apply_cutoff(ranked, -1.0) == ranked


def test_cutoff_only_self_match_at_099(fixture_results):
    kept = apply_cutoff(list(fixture_results["Tremor"].ranked), 0.99)
    assert [t.label for t in kept] == ["Tremor"]


def test_cutoff_nesting(fixture_results):
    for result in fixture_results.values():
        ranked = list(result.ranked)
        prev = ranked
        for t in (0.5, 0.6, 0.7, 0.8, 0.9):
            cur = apply_cutoff(ranked, t)
            assert [x.code for x in cur] == [
                x.code for x in prev if x.sim_best >= t]
            prev = cur


def test_ranked_deterministic(vocab, emb, config):
    from medquery import run_query
    a = run_query("Bleeding events", vocab, emb, config)
    b = run_query("Bleeding events", vocab, emb, config)
    assert [(t.code, t.sim_best) for t in a.ranked] == \
        [(t.code, t.sim_best) for t in b.ranked]
