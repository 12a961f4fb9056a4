import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paperrec.corpus import Corpus, PaperRecord
from paperrec.embedding import (
    PaperEmbeddings,
    TfIdfModel,
    UnembeddableError,
    WordEmbeddings,
    embed_corpus,
    embed_paper,
    embed_text,
    fit_tfidf,
    load_word_embeddings,
    save_word_embeddings,
    tokenize,
)

from conftest import flat_tfidf


@pytest.mark.parametrize("text, expected", [
    ("Deep Learning, 2nd ed.", ["deep", "learning", "2nd", "ed"]),
    ("", []),
    ("K-Means K-Means", ["means", "means"]),
    ("1999 results: 42 of 7", ["results", "of"]),
    ("snake_case and CamelCase", ["snake", "case", "and", "camelcase"]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def docs_corpus(texts):
    return Corpus(PaperRecord(f"d{i:02d}", t) for i, t in enumerate(texts))


def test_idf_values():
    texts = ["common rare"] + ["common filler"] * 9
    model = fit_tfidf(docs_corpus(texts), min_count=1)
    assert model.idf["common"] == 0.0
    assert model.idf["rare"] == pytest.approx(math.log(10), abs=1e-12)
    assert model.idf["rare"] == pytest.approx(2.302585, abs=1e-6)


def test_min_count_cutoff():
    texts = ["often"] * 10 + ["seldom"] * 9
    model = fit_tfidf(docs_corpus(texts), min_count=10)
    assert "often" in model and "seldom" not in model
    assert all(c >= 10 for _, _, c in model.vocabulary.terms.values())
    assert all(df <= model.vocabulary.n_docs for _, df, _ in model.vocabulary.terms.values())


def test_fit_empty_corpus():
    with pytest.raises(ValueError):
        fit_tfidf(Corpus([]), 1)


def test_tfidf_json_roundtrip(tmp_path):
    model = fit_tfidf(docs_corpus(["aa bb", "bb cc", "cc dd"]), min_count=1)
    model.save(tmp_path / "m.json")
    assert TfIdfModel.load(tmp_path / "m.json") == model


def test_single_title_word_is_word_vector(ortho_words):
    rec = PaperRecord("p", "beta")
    np.testing.assert_allclose(embed_paper(rec, ortho_words, flat_tfidf(ortho_words.terms, 3.7)), [0, 1, 0, 0])


def test_title_abstract_weighting(ortho_words):
    rec = PaperRecord("p", "alpha", abstract="beta")
    vec = embed_paper(rec, ortho_words, flat_tfidf(ortho_words.terms))
    # hand evaluation: D = 2 * a + 1 * b with orthonormal a, b
    expected = np.array([2.0, 1.0, 0.0, 0.0]) / math.sqrt(5)
    assert np.max(np.abs(vec - expected)) < 1e-9


def test_keywords_share_title_weight(ortho_words):
    rec = PaperRecord("p", "alpha", keywords=("gamma",), abstract="beta")
    vec = embed_paper(rec, ortho_words, flat_tfidf(ortho_words.terms))
    np.testing.assert_allclose(vec, np.array([2.0, 1.0, 2.0, 0.0]) / 3.0, atol=1e-12)


def test_repeated_terms_and_idf(ortho_words):
    tfidf = flat_tfidf(ortho_words.terms)
    tfidf.idf["beta"] = 3.0
    rec = PaperRecord("p", "alpha alpha", abstract="beta")
    vec = embed_paper(rec, ortho_words, tfidf)
    # alpha: 2 (weight) * 2 (tf) * 1 (idf); beta: 1 * 1 * 3
    np.testing.assert_allclose(vec, np.array([4.0, 3.0, 0, 0]) / 5.0, atol=1e-12)


def test_unembeddable(ortho_words):
    tfidf = flat_tfidf(ortho_words.terms)
    with pytest.raises(UnembeddableError):
        embed_paper(PaperRecord("p", "unknown words only"), ortho_words, tfidf)
    with pytest.raises(UnembeddableError):
        embed_text("", ortho_words, tfidf)
    tfidf.idf["alpha"] = 0.0
    with pytest.raises(UnembeddableError):
        embed_paper(PaperRecord("p", "alpha"), ortho_words, tfidf)


def test_text_matches_title_only_paper(ortho_words):
    tfidf = flat_tfidf(ortho_words.terms)
    tfidf.idf["gamma"] = 2.5
    paper = embed_paper(PaperRecord("p", "alpha gamma gamma"), ortho_words, tfidf)
    query = embed_text("alpha gamma gamma", ortho_words, tfidf)
    assert float(paper @ query) == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_array_equal(embed_text("alpha beta", ortho_words, tfidf), embed_text("beta alpha", ortho_words, tfidf))


def random_words(rng, n=30, d=16):
    terms = [f"w{chr(97 + i // 26)}{chr(97 + i % 26)}" for i in range(n)]
    return WordEmbeddings(terms, rng.standard_normal((n, d)))


@settings(max_examples=50, deadline=None)
@given(
    title=st.lists(st.integers(0, 29), min_size=1, max_size=8),
    abstract=st.lists(st.integers(0, 29), max_size=20),
    scale=st.floats(0.01, 100),
    seed=st.integers(0, 2**16),
)
def test_embedding_properties(title, abstract, scale, seed):
    rng = np.random.default_rng(seed)
    words = random_words(rng)
    tfidf = flat_tfidf(words.terms)
    for t in words.terms:
        tfidf.idf[t] = float(rng.uniform(0.1, 3.0))
    tw = [words.terms[i] for i in title]
    aw = [words.terms[i] for i in abstract]
    rec = PaperRecord("p", " ".join(tw), abstract=" ".join(aw))
    vec = embed_paper(rec, words, tfidf)
    assert abs(np.linalg.norm(vec) - 1.0) < 1e-6

    shuffled = PaperRecord("p", " ".join(rng.permutation(tw)), abstract=" ".join(rng.permutation(aw)) if aw else "")
    np.testing.assert_allclose(embed_paper(shuffled, words, tfidf), vec, atol=1e-12)

    scaled = TfIdfModel(tfidf.vocabulary, {t: v * scale for t, v in tfidf.idf.items()})
    np.testing.assert_allclose(embed_paper(rec, words, scaled), vec, atol=1e-12)


def test_duplicate_paper_leaves_others_unchanged(rng):
    words = random_words(rng)
    tfidf = flat_tfidf(words.terms)
    recs = [PaperRecord(f"p{i}", " ".join(rng.choice(words.terms, 4))) for i in range(6)]
    base, _ = embed_corpus(Corpus(recs), words, tfidf)
    dup = PaperRecord("p9", recs[0].title)
    more, _ = embed_corpus(Corpus(recs + [dup]), words, tfidf)
    for r in recs:
        np.testing.assert_array_equal(base[r.id], more[r.id])


def test_word_vector_file(tmp_path):
    (tmp_path / "ok.txt").write_text("2 4\nfoo 1 0 0 1\nbar 0 3 0 0\n")
    words = load_word_embeddings(tmp_path / "ok.txt")
    assert words.dimension == 4
    np.testing.assert_allclose(np.linalg.norm(words.vectors, axis=1), 1.0, atol=1e-12)

    (tmp_path / "short.txt").write_text("3 4\nfoo 1 0 0 1\nbar 0 3 0 0\n")
    with pytest.raises(ValueError, match="declares 3"):
        load_word_embeddings(tmp_path / "short.txt")
    (tmp_path / "ragged.txt").write_text("2 4\nfoo 1 0 0 1\nbar 0 3 0\n")
    with pytest.raises(ValueError, match="expected 4"):
        load_word_embeddings(tmp_path / "ragged.txt")
    (tmp_path / "dup.txt").write_text("2 2\nfoo 1 0\nfoo 0 1\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_word_embeddings(tmp_path / "dup.txt")


def test_word_vector_roundtrip(tmp_path, rng):
    words = random_words(rng, d=8)
    save_word_embeddings(words, tmp_path / "w.txt")
    back = load_word_embeddings(tmp_path / "w.txt")
    assert back.terms == words.terms
    assert np.max(np.abs(back.vectors - words.vectors)) < 1e-6


def test_paper_embedding_cache(tmp_path, rng):
    x = rng.standard_normal((5, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    store = PaperEmbeddings(["e", "b", "a", "d", "c"], x)
    assert store.ids == ["a", "b", "c", "d", "e"]
    np.testing.assert_array_equal(store["e"], x[0])
    store.save(tmp_path / "e.npz")
    back = PaperEmbeddings.load(tmp_path / "e.npz")
    assert back.ids == store.ids
    np.testing.assert_array_equal(back.vectors, store.vectors)
