import json

import numpy as np
import pytest

from paperrec.corpus import Corpus, PaperRecord, Topic
from paperrec.embedding import TfIdfModel, Vocabulary, WordEmbeddings


def write_lines(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for o in objs:
            fh.write((o if isinstance(o, str) else json.dumps(o)) + "\n")
    return path


def toy_corpus(edges: dict[str, list[str]]) -> Corpus:
    return Corpus(PaperRecord(pid, f"title {pid}", references=tuple(refs)) for pid, refs in edges.items())


def flat_tfidf(terms, idf=1.0, n_docs=10) -> TfIdfModel:
    vocab = Vocabulary({t: (i, 1, 10) for i, t in enumerate(terms)}, n_docs, 1)
    return TfIdfModel(vocab, {t: idf for t in terms})


def planted_vectors(n, d, k, rng, spread=0.3):
    """n unit vectors scattered around k random unit directions."""
    centers = rng.standard_normal((k, d))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    labels = rng.integers(k, size=n)
    x = centers[labels] + spread * rng.standard_normal((n, d)) / np.sqrt(d)
    return x / np.linalg.norm(x, axis=1, keepdims=True), labels


@pytest.fixture
def ortho_words():
    terms = ["alpha", "beta", "gamma", "delta"]
    return WordEmbeddings(terms, np.eye(4))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def topic_record():
    def make(pid, title, topic=None, conf=0.9, leaf=True, abstract=""):
        topics = (Topic(topic, conf, leaf),) if topic else ()
        return PaperRecord(pid, title, (), abstract, (), topics)
    return make


ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)
