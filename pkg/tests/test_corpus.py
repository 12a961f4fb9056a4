import json

import numpy as np
import pytest

from paperrec.corpus import (
    Corpus,
    CorpusError,
    PaperRecord,
    build_citation_index,
    corpus_stats,
    parse_corpus,
    write_corpus,
)
from paperrec.synthetic import SyntheticCorpus, random_citation_graph

from conftest import toy_corpus, write_lines


def test_parse_three_lines(tmp_path):
    path = write_lines(tmp_path / "c.jsonl", [
        {"id": "a", "title": "First"},
        {"id": "b", "title": "Second", "references": ["a"]},
        {"id": "c", "title": "Third", "keywords": ["x y"], "extra": 1},
    ])
    corpus = parse_corpus(path)
    assert corpus.n == 3
    assert corpus["b"].references == ("a",)


def test_self_reference_and_duplicates_dropped(tmp_path):
    path = write_lines(tmp_path / "c.jsonl", [
        {"id": "a", "title": "  Padded title  ", "references": ["a", "b", "b", " c "]},
        {"id": "b", "title": "B"},
    ])
    rec = parse_corpus(path)["a"]
    assert rec.references == ("b", "c")
    assert rec.title == "Padded title"


def test_duplicate_id_names_offender(tmp_path):
    path = write_lines(tmp_path / "c.jsonl", [{"id": "p1", "title": "x"}, {"id": "p1", "title": "y"}])
    with pytest.raises(CorpusError, match=r"p1") as err:
        parse_corpus(path)
    assert ":2:" in str(err.value)


@pytest.mark.parametrize("line, fragment", [
    ('{"id": "a", "title": "ok"', "malformed JSON"),
    ('{"id": "a", "title": "   "}', "title"),
    ('{"id": "a"}', "title"),
    ('{"id": "has space", "title": "t"}', "whitespace"),
    ('{"id": "a", "title": "t", "topics": [{"topic_id": "x", "confidence": 1.5}]}', "confidence"),
])
def test_bad_lines_report_line_number(tmp_path, line, fragment):
    path = write_lines(tmp_path / "c.jsonl", ['{"id": "z", "title": "fine"}', line])
    with pytest.raises(CorpusError, match=fragment) as err:
        parse_corpus(path)
    assert ":2:" in str(err.value)


def test_unreadable_file(tmp_path):
    with pytest.raises(CorpusError, match="cannot read"):
        parse_corpus(tmp_path / "missing.jsonl")


def test_input_order_irrelevant(tmp_path):
    rows = [{"id": f"p{i}", "title": f"t {i}", "references": [f"p{(i + 1) % 5}"]} for i in range(5)]
    a = parse_corpus(write_lines(tmp_path / "a.jsonl", rows))
    b = parse_corpus(write_lines(tmp_path / "b.jsonl", rows[::-1]))
    assert a == b


def test_roundtrip_idempotent(tmp_path):
    corpus = SyntheticCorpus(n_topics=5, seed=3).corpus(60)
    write_corpus(corpus, tmp_path / "a.jsonl")
    again = parse_corpus(tmp_path / "a.jsonl")
    assert again == corpus
    write_corpus(again, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_index_chain():
    index = build_citation_index(toy_corpus({"A": ["B"], "B": ["C"], "C": []}))
    assert index.cited_by["C"] == ("B",)
    assert index.cited_by["B"] == ("A",)
    assert index.cited_by["A"] == ()


def test_dangling_reference_counted():
    index = build_citation_index(toy_corpus({"A": ["X"]}))
    assert index.cites["A"] == ()
    assert index.dangling == 1


def test_index_inverse_bruteforce(rng):
    corpus = random_citation_graph(500, 0.01, rng)
    index = build_citation_index(corpus)
    adj = {(i, j) for i in corpus.ids for j in corpus[i].references}
    ids = corpus.ids
    for i in ids:
        cites = set(index.cites[i])
        for j in ids:
            in_fwd = j in cites
            assert in_fwd == ((i, j) in adj)
            assert in_fwd == (i in index.cited_by[j])
    assert index.n_edges == sum(len(v) for v in index.cited_by.values())
    for v in list(index.cites.values()) + list(index.cited_by.values()):
        assert list(v) == sorted(v)


def test_stats_fractions():
    full = toy_corpus({"a": ["b"], "b": ["a"]})
    assert corpus_stats(full, build_citation_index(full)).with_references == 1.0

    edges = {f"p{i}": ([f"p{i + 1}"] if i < 4 else []) for i in range(10)}
    c = toy_corpus(edges)
    assert corpus_stats(c, build_citation_index(c)).with_references == pytest.approx(0.4)


def test_stats_mean_references_recount(rng):
    corpus = SyntheticCorpus(n_topics=10, seed=5).corpus(1000)
    report = corpus_stats(corpus, build_citation_index(corpus), with_cocitation=True)
    # independent recount straight from the records
    ids = set(corpus.ids)
    counts = [sum(r in ids for r in rec.references) for rec in corpus]
    nonzero = [c for c in counts if c]
    assert report.mean_references == pytest.approx(sum(nonzero) / len(nonzero), abs=1e-12)
    assert report.dangling == sum(len(rec.references) for rec in corpus) - sum(counts)
    assert 0.0 <= report.with_cocitation <= 1.0
