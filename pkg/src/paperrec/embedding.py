"""Tokenization, TF-IDF statistics, word vectors and paper embeddings.

A paper embedding is the normalized TF-IDF weighted sum of unit word vectors,
with title and keyword terms counted at twice the weight of abstract terms.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, PaperRecord

TITLE_WEIGHT = 2.0
ABSTRACT_WEIGHT = 1.0
CACHE_VERSION = 1

_TOKEN = re.compile(r"[^\W_]+")


class UnembeddableError(ValueError):
    """The text has no token covered by both the word vectors and the TF-IDF model."""


def tokenize(text: str) -> list[str]:
    """Lower-case alphanumeric tokens; numbers and single characters are dropped."""
    if not text:
        return []
    return [
        tok
        for tok in _TOKEN.findall(text.lower())
        if len(tok) > 1 and not tok.isnumeric()
    ]


def paper_fields(record: PaperRecord) -> tuple[list[str], list[str]]:
    """Tokens of the double-weighted fields (title, keywords) and of the abstract."""
    heavy = tokenize(record.title)
    for kw in record.keywords:
        heavy.extend(tokenize(kw))
    return heavy, tokenize(record.abstract)


def paper_tokens(record: PaperRecord) -> list[str]:
    heavy, light = paper_fields(record)
    return heavy + light


@dataclass(frozen=True)
class Vocabulary:
    """term -> (term_id, document_frequency, corpus_frequency)."""

    terms: dict[str, tuple[int, int, int]]
    n_docs: int
    min_count: int = 1

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def ordered_terms(self) -> list[str]:
        return sorted(self.terms, key=lambda t: self.terms[t][0])

    def counts(self) -> np.ndarray:
        return np.array([self.terms[t][2] for t in self.ordered_terms()], dtype=np.int64)


def build_vocabulary(docs: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Count terms over tokenized documents; ids go by frequency, then term."""
    cf: Counter[str] = Counter()
    df: Counter[str] = Counter()
    n_docs = 0
    for toks in docs:
        n_docs += 1
        cf.update(toks)
        df.update(set(toks))
    kept = sorted((t for t, c in cf.items() if c >= min_count), key=lambda t: (-cf[t], t))
    return Vocabulary({t: (i, df[t], cf[t]) for i, t in enumerate(kept)}, n_docs, min_count)


@dataclass(frozen=True)
class TfIdfModel:
    vocabulary: Vocabulary
    idf: dict[str, float]

    def __contains__(self, term: str) -> bool:
        return term in self.idf

    def to_json(self) -> dict:
        v = self.vocabulary
        return {
            "version": CACHE_VERSION,
            "n_docs": v.n_docs,
            "min_count": v.min_count,
            "terms": [[t, *v.terms[t]] for t in v.ordered_terms()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TfIdfModel":
        if obj.get("version") != CACHE_VERSION:
            raise ValueError(f"unsupported tfidf model version {obj.get('version')!r}")
        terms = {t: (i, d, c) for t, i, d, c in obj["terms"]}
        return _make_tfidf(Vocabulary(terms, obj["n_docs"], obj["min_count"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfIdfModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _make_tfidf(vocab: Vocabulary) -> TfIdfModel:
    idf = {t: math.log(vocab.n_docs / df) for t, (_, df, _) in vocab.terms.items()}
    return TfIdfModel(vocab, idf)


def fit_tfidf(corpus: Corpus, min_count: int = 10) -> TfIdfModel:
    """Fit idf(t) = ln(n_docs / df(t)) over title + keywords + abstract documents.

    Terms whose total corpus frequency is below ``min_count`` are dropped.
    """
    if corpus.n == 0:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    return _make_tfidf(build_vocabulary((paper_tokens(r) for r in corpus), min_count))


class WordEmbeddings:
    """Unit-norm word vectors, one row per term."""

    def __init__(self, terms: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(terms):
            raise ValueError("need one vector row per term")
        index = {}
        for i, t in enumerate(terms):
            if t in index:
                raise ValueError(f"duplicate term {t!r}")
            index[t] = i
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0):
            bad = terms[int(np.flatnonzero(norms == 0)[0])]
            raise ValueError(f"zero vector for term {bad!r}")
        self.terms = list(terms)
        self.vectors = vectors / norms[:, None]
        self.index = index

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def __getitem__(self, term: str) -> np.ndarray:
        return self.vectors[self.index[term]]

    def save(self, path: str | Path) -> None:
        save_word_embeddings(self, path)


def save_word_embeddings(words: WordEmbeddings, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {words.dimension}\n")
        for term, vec in zip(words.terms, words.vectors):
            fh.write(term + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def load_word_embeddings(path: str | Path) -> WordEmbeddings:
    """Read the ``<count> <dim>`` header text format; vectors come back unit-norm."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: expected '<count> <dimension>' header")
        count, dim = int(header[0]), int(header[1])
        terms, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            terms.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if len(terms) != count:
        raise ValueError(f"{path}: header declares {count} vectors, body has {len(terms)}")
    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return WordEmbeddings(terms, vectors)


def _compose(groups, words: WordEmbeddings, tfidf: TfIdfModel) -> np.ndarray:
    weights: dict[str, float] = {}
    for tokens, w in groups:
        for tok in tokens:
            if tok in words and tok in tfidf:
                weights[tok] = weights.get(tok, 0.0) + w * tfidf.idf[tok]
    if not weights:
        raise UnembeddableError("no in-vocabulary tokens")
    terms = sorted(weights)
    rows = np.fromiter((words.index[t] for t in terms), dtype=np.intp, count=len(terms))
    coef = np.fromiter((weights[t] for t in terms), dtype=np.float64, count=len(terms))
    vec = coef @ words.vectors[rows]
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        # every matched term has idf 0 (it occurs in all documents)
        raise UnembeddableError("all in-vocabulary tokens carry zero weight")
    return vec / norm


def embed_paper(record: PaperRecord, words: WordEmbeddings, tfidf: TfIdfModel) -> np.ndarray:
    heavy, light = paper_fields(record)
    try:
        return _compose([(heavy, TITLE_WEIGHT), (light, ABSTRACT_WEIGHT)], words, tfidf)
    except UnembeddableError as exc:
        raise UnembeddableError(f"paper {record.id!r}: {exc}") from None


def embed_text(text: str, words: WordEmbeddings, tfidf: TfIdfModel) -> np.ndarray:
    """Embed free text as if it were a title."""
    return _compose([(tokenize(text), TITLE_WEIGHT)], words, tfidf)


class PaperEmbeddings:
    """Row-aligned paper ids and unit embedding matrix, ids sorted."""

    def __init__(self, ids: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(ids):
            raise ValueError("need one vector row per paper id")
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        self.ids = [ids[i] for i in order]
        self.vectors = vectors[order] if order != list(range(len(ids))) else vectors
        self.row = {pid: i for i, pid in enumerate(self.ids)}
        if len(self.row) != len(self.ids):
            raise ValueError("duplicate paper id in embeddings")

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, pid: str) -> bool:
        return pid in self.row

    def __getitem__(self, pid: str) -> np.ndarray:
        return self.vectors[self.row[pid]]

    def subset(self, ids: Iterable[str]) -> "PaperEmbeddings":
        keep = sorted(set(ids) & self.row.keys())
        return PaperEmbeddings(keep, self.vectors[[self.row[p] for p in keep]])

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                version=np.array(CACHE_VERSION),
                ids=np.array(self.ids, dtype=str),
                vectors=self.vectors,
            )

    @classmethod
    def load(cls, path: str | Path) -> "PaperEmbeddings":
        with np.load(path, allow_pickle=False) as data:
            version = int(data["version"])
            if version != CACHE_VERSION:
                raise ValueError(f"unsupported embedding cache version {version}")
            return cls([str(x) for x in data["ids"]], data["vectors"])


def embed_corpus(
    corpus: Corpus, words: WordEmbeddings, tfidf: TfIdfModel
) -> tuple[PaperEmbeddings, list[str]]:
    """Embed every paper; returns the store and the sorted list of unembeddable ids."""
    ids, rows, skipped = [], [], []
    for rec in corpus:
        try:
            rows.append(embed_paper(rec, words, tfidf))
        except UnembeddableError:
            skipped.append(rec.id)
            continue
        ids.append(rec.id)
    dim = words.dimension
    mat = np.vstack(rows) if rows else np.empty((0, dim))
    return PaperEmbeddings(ids, mat), skipped
