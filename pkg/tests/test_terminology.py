import io

import pytest

from medquery import (CaseMode, Level, ParseError, Scope, ValidationError,
                      load_gold_sets, load_vocabulary, lookup_exact,
                      sanitize_gold)

SMALL_VOCAB = """\
code,label,level,current
1,Tremor,PT,Y
2,Insomnia,PT,Y
3,Loose stools,LLT,Y
"""


def test_llt_excluded_from_pt_index():
    vocab = load_vocabulary(io.StringIO(SMALL_VOCAB))
    assert len(vocab.terms) == 3
    assert len(vocab.label_index) == 2
    assert len(vocab.current_pts) == 2


def test_header_only_file_is_valid():
    vocab = load_vocabulary(io.StringIO("code,label,level,current\n"))
    assert vocab.terms == ()
    assert vocab.label_index == {}


def test_fixture_vocab_counts(vocab):
    assert len(vocab.terms) == 200
    assert len(vocab.current_pts) == 180
    assert len(vocab.label_index) == 180


def test_row_order_preserved(vocab):
    codes = [t.code for t in vocab.terms]
    assert codes == sorted(codes)  # fixture codes happen to be ascending
    assert vocab.terms[0].label == "Insomnia"
    assert vocab.terms[-1].label == "Dyspepsia aggravated"


def test_load_is_idempotent(data_dir):
    a = load_vocabulary(data_dir / "vocab_fixture.csv")
    b = load_vocabulary(data_dir / "vocab_fixture.csv")
    assert a == b


def test_quoted_fields_parse_per_rfc4180():
    text = ('code,label,level,current\n'
            '1,"Fracture, femur",PT,Y\n'
            '2,"He said ""ouch""",PT,Y\n')
    vocab = load_vocabulary(io.StringIO(text))
    assert vocab.terms[0].label == "Fracture, femur"
    assert vocab.terms[1].label == 'He said "ouch"'
    assert lookup_exact(vocab, "Fracture, femur") is not None


def test_malformed_row_reports_line_number():
    bad = "code,label,level,current\n1,Tremor,PT,Y\n2,Oops,PT\n"
    with pytest.raises(ParseError) as exc:
        load_vocabulary(io.StringIO(bad))
    assert exc.value.line == 3


def test_duplicate_code_rejected():
    bad = "code,label,level,current\n1,Tremor,PT,Y\n1,Insomnia,PT,Y\n"
    with pytest.raises(ValidationError, match="duplicate code"):
        load_vocabulary(io.StringIO(bad))


def test_duplicate_current_pt_label_rejected_under_case_mode():
    rows = "code,label,level,current\n1,Tremor,PT,Y\n2,tremor,PT,Y\n"
    # distinct labels case-sensitively, duplicates case-insensitively
    load_vocabulary(io.StringIO(rows))
    with pytest.raises(ValidationError, match="duplicate current-PT label"):
        load_vocabulary(io.StringIO(rows),
                        case_mode=CaseMode.CASE_INSENSITIVE)


def test_unknown_level_rejected():
    bad = "code,label,level,current\n1,Tremor,XX,Y\n"
    with pytest.raises(ParseError):
        load_vocabulary(io.StringIO(bad))


def test_lookup_exact_hit(vocab):
    term = lookup_exact(vocab, "Tremor")
    assert term is not None
    assert term.code == "10000016"
    assert term.level is Level.PT


def test_lookup_exact_is_case_sensitive_by_default(vocab):
    assert lookup_exact(vocab, "tremor") is None


def test_lookup_exact_case_insensitive_mode(data_dir):
    vocab = load_vocabulary(data_dir / "vocab_fixture.csv",
                            case_mode=CaseMode.CASE_INSENSITIVE)
    assert lookup_exact(vocab, "tremor").code == "10000016"


def test_lookup_exact_rejects_llt(vocab):
    assert lookup_exact(vocab, "Loose stools") is None


def test_load_gold_grouping():
    text = ("query_name,query_phrase,term_label,scope\n"
            "A,alpha phrase,T1,NARROW\n"
            "A,alpha phrase,T2,BROAD\n"
            "A,alpha phrase,T3,NARROW\n"
            "B,beta phrase,T4,\n"
            "B,beta phrase,T5,BROAD\n"
            "B,beta phrase,T6,broad\n"
            "B,beta phrase,T7,BROAD\n")
    queries = load_gold_sets(io.StringIO(text))
    assert [q.name for q in queries] == ["A", "B"]
    assert [len(q.entries) for q in queries] == [3, 4]
    assert queries[1].entries[0].scope is Scope.BROAD  # empty cell default


def test_load_gold_without_scope_column_defaults_broad():
    text = ("query_name,query_phrase,term_label\n"
            "A,alpha,T1\nA,alpha,T2\n")
    queries = load_gold_sets(io.StringIO(text))
    assert all(e.scope is Scope.BROAD for e in queries[0].entries)


def test_load_gold_unknown_scope_token():
    text = "query_name,query_phrase,term_label,scope\nA,alpha,T1,WIDE\n"
    with pytest.raises(ParseError) as exc:
        load_gold_sets(io.StringIO(text))
    assert exc.value.line == 2


def test_load_gold_missing_phrase():
    text = "query_name,query_phrase,term_label,scope\nA,,T1,BROAD\n"
    with pytest.raises(ValidationError, match="missing phrase"):
        load_gold_sets(io.StringIO(text))


def test_load_gold_conflicting_phrase():
    text = ("query_name,query_phrase,term_label,scope\n"
            "A,alpha,T1,BROAD\nA,other,T2,BROAD\n")
    with pytest.raises(ValidationError, match="conflicting phrase"):
        load_gold_sets(io.StringIO(text))


def test_fixture_gold_counts(gold):
    assert len(gold) == 10
    assert sum(len(q.entries) for q in gold) == 73


def test_sanitize_drops_non_pt_entries(vocab):
    queries = load_gold_sets(io.StringIO(
        "query_name,query_phrase,term_label,scope\n"
        "Q,some phrase,Tremor,NARROW\n"
        "Q,some phrase,Loose stools,BROAD\n"))
    cleaned, report = sanitize_gold(queries, vocab)
    assert [e.label for e in cleaned[0].entries] == ["Tremor"]
    assert report.per_query[0].excluded_count == 1
    assert report.per_query[0].excluded_samples == ("Loose stools",)


def test_sanitize_fixed_point(vocab):
    queries = load_gold_sets(io.StringIO(
        "query_name,query_phrase,term_label,scope\n"
        "Q,some phrase,Tremor,NARROW\n"
        "Q,some phrase,Insomnia,BROAD\n"))
    cleaned, report = sanitize_gold(queries, vocab)
    assert cleaned == queries
    assert report.total_excluded == 0
    assert report.affected_queries == 0


def test_sanitize_fixture_gold(vocab, gold):
    cleaned, report = sanitize_gold(gold, vocab)
    # independently verified by a standalone csv join over the fixtures
    assert report.total_excluded == 9
    assert report.affected_queries == 4
    by_name = {r.name: r.excluded_count for r in report.per_query}
    assert by_name["Insomnia"] == 2
    assert by_name["Hypoglycaemia"] == 2
    assert by_name["Palpitations"] == 1
    assert by_name["Diarrhoea"] == 4
    assert [q.name for q in cleaned] == [q.name for q in gold]
    assert report.emptied_queries == ()


def test_sanitize_invariants(vocab, gold):
    from medquery import lookup_exact as resolve
    cleaned, report = sanitize_gold(gold, vocab)
    for before, after in zip(gold, cleaned):
        assert set(after.entries) <= set(before.entries)
        for entry in after.entries:
            assert resolve(vocab, entry.label) is not None
    assert report.total_excluded == sum(r.excluded_count
                                        for r in report.per_query)
    assert report.affected_queries == sum(
        1 for r in report.per_query if r.excluded_count > 0)


def test_sanitize_keeps_emptied_queries(vocab):
    queries = load_gold_sets(io.StringIO(
        "query_name,query_phrase,term_label,scope\n"
        "Q,some phrase,Unknown thing,BROAD\n"))
    cleaned, report = sanitize_gold(queries, vocab)
    assert len(cleaned) == 1
    assert cleaned[0].entries == ()
    assert report.emptied_queries == ("Q",)
