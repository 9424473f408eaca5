import pytest

from medquery import (AmqConfig, InputError, MatchMethod, ProviderConfig,
                      run_query)
from medquery.pipeline import result_payload


def test_exact_phrase_ranks_itself_first(fixture_results):
    result = fixture_results["Tremor"]
    assert result.match.method is MatchMethod.LEXICAL
    assert result.ranked[0].label == "Tremor"
    assert result.ranked[0].sim_best == pytest.approx(1.0, abs=1e-6)


def test_lexical_first_rank_is_matched_pt(fixture_results):
    for result in fixture_results.values():
        if result.match.method is MatchMethod.LEXICAL:
            assert result.ranked[0].code == result.match.matched[0][0].code


def test_empty_phrase_raises_with_stage(vocab, emb, config):
    with pytest.raises(InputError) as exc:
        run_query("", vocab, emb, config)
    assert exc.value.stage == "match"


def test_ranked_terms_all_retained_and_ordered(fixture_results):
    for result in fixture_results.values():
        assert all(t.retained for t in result.ranked)
        keys = [(-t.sim_best, t.label) for t in result.ranked]
        assert keys == sorted(keys)
        for t in result.ranked:
            assert (t.combined >= result.split.split_value
                    or t.code in {m.code for m, _ in result.match.matched})


def test_split_counts_cover_vocab(fixture_results, vocab):
    n = len(vocab.current_pts)
    for result in fixture_results.values():
        assert result.split.low_count + result.split.high_count == n
        assert result.split.high_count >= 1


def test_timings_present(fixture_results):
    for result in fixture_results.values():
        assert set(result.timings) == {"match", "score", "cluster", "rank"}
        assert all(v >= 0 for v in result.timings.values())


def test_end_to_end_determinism(vocab, emb, config):
    from medquery._fmt import stable_dumps
    a = run_query("Low blood glucose", vocab, emb, config)
    b = run_query("Low blood glucose", vocab, emb, config)
    assert stable_dumps(result_payload(a, 0.5)) == \
        stable_dumps(result_payload(b, 0.5))


def test_payload_shape(fixture_results):
    payload = result_payload(fixture_results["Insomnia"], 0.6, max_terms=2)
    assert payload["match"]["method"] == "LEXICAL"
    assert payload["terms"][0]["rank"] == 1
    assert len(payload["terms"]) <= 2
    assert payload["total_retained"] >= len(payload["terms"])
    assert "timings" not in payload


def test_config_validation():
    with pytest.raises(InputError):
        AmqConfig(fuzzy_threshold=0.0)
    with pytest.raises(InputError):
        AmqConfig(cutoff_grid=(0.5, 0.5))
    with pytest.raises(InputError):
        AmqConfig(cutoff_grid=(0.0, 0.5))
    with pytest.raises(InputError):
        AmqConfig(semantic_top_k=4)
    assert AmqConfig().cutoff_grid == (
        0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9)


def test_isolated_pt_self_match():
    import io

    from medquery import embed_vocabulary, load_vocabulary
    vocab = load_vocabulary(io.StringIO(
        "code,label,level,current\n"
        "1,Zymosis,PT,Y\n"
        "2,Femur fracture,PT,Y\n"
        "3,Insomnia,PT,Y\n"))
    provider = ProviderConfig()
    emb = embed_vocabulary(provider, vocab)
    result = run_query("Zymosis", vocab, emb, AmqConfig(provider=provider))
    assert result.ranked[0].label == "Zymosis"
    assert result.ranked[0].sim_best == pytest.approx(1.0, abs=1e-6)
