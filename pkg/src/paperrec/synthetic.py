"""Seeded synthetic corpora with planted topic structure.

Every paper is generated from its own random stream keyed on ``(seed, index)``,
so extending a corpus with more papers leaves the earlier ones unchanged.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .corpus import Corpus, PaperRecord, Topic

_ONSETS = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "eo"]


def _make_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        syl = rng.integers(2, 4)
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(syl))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


class SyntheticCorpus:
    """Generator of papers on ``n_topics`` planted topics.

    Titles draw mostly from the paper's topic vocabulary, abstracts mix topic
    and Zipf-distributed background words, and references favour earlier
    papers of the same topic.
    """

    def __init__(
        self,
        n_topics: int = 40,
        seed: int = 0,
        topic_words: int = 30,
        background_words: int = 400,
        id_prefix: str = "p",
        reference_rate: float = 0.6,
        max_references: int = 12,
    ):
        self.n_topics = n_topics
        self.seed = seed
        self.id_prefix = id_prefix
        self.reference_rate = reference_rate
        self.max_references = max_references
        rng = np.random.default_rng([seed, 0xC0])
        taken: set[str] = set()
        self.topic_vocab = [_make_words(rng, topic_words, taken) for _ in range(n_topics)]
        self.background = _make_words(rng, background_words, taken)
        ranks = np.arange(1, background_words + 1)
        self._bg_cdf = np.cumsum(1.0 / ranks) / (1.0 / ranks).sum()

    def paper_id(self, i: int) -> str:
        return f"{self.id_prefix}{i:07d}"

    def topic_of(self, i: int) -> int:
        return int(np.random.default_rng([self.seed, 1, i]).integers(self.n_topics))

    def paper(self, i: int, topics_before: np.ndarray | None = None) -> PaperRecord:
        rng = np.random.default_rng([self.seed, 2, i])
        topic = self.topic_of(i)
        vocab = self.topic_vocab[topic]

        def draw(n, topical):
            out = []
            for _ in range(n):
                if rng.random() < topical:
                    out.append(vocab[rng.integers(len(vocab))])
                else:
                    out.append(self.background[min(int(np.searchsorted(self._bg_cdf, rng.random())), len(self.background) - 1)])
            return out

        title = " ".join(draw(int(rng.integers(4, 9)), 0.75)).capitalize()
        keywords = [" ".join(draw(int(rng.integers(1, 3)), 0.9)) for _ in range(rng.integers(0, 4))]
        abstract = " ".join(draw(int(rng.integers(20, 50)), 0.4)) + "." if rng.random() < 0.8 else ""

        refs = []
        if i > 0 and rng.random() < self.reference_rate:
            if topics_before is None:
                topics_before = np.array([self.topic_of(j) for j in range(i)])
            same = np.flatnonzero(topics_before[:i] == topic)
            n_refs = int(rng.integers(1, self.max_references + 1))
            for _ in range(n_refs):
                if len(same) and rng.random() < 0.85:
                    refs.append(self.paper_id(int(same[rng.integers(len(same))])))
                else:
                    refs.append(self.paper_id(int(rng.integers(i))))
            if rng.random() < 0.05:
                refs.append(f"ext{int(rng.integers(10**6))}")

        topics = [Topic(f"t{topic:04d}", round(float(rng.uniform(0.5, 1.0)), 3), True)]
        topics.append(Topic(f"root{topic % 3}", 1.0, False))
        return PaperRecord(self.paper_id(i), title, tuple(keywords), abstract, tuple(dict.fromkeys(refs)), tuple(topics))

    def papers(self, start: int, stop: int) -> list[PaperRecord]:
        topics = np.array([self.topic_of(j) for j in range(stop)])
        return [self.paper(i, topics) for i in range(start, stop)]

    def corpus(self, n: int) -> Corpus:
        return Corpus(self.papers(0, n))


def write_jsonl(records, path: str | Path, append: bool = False) -> None:
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def random_citation_graph(n: int, p: float, rng: np.random.Generator) -> Corpus:
    """Erdos-Renyi style directed citation graph without self-loops."""
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    ids = [f"n{i:04d}" for i in range(n)]
    return Corpus(
        PaperRecord(ids[i], f"paper {i}", references=tuple(ids[j] for j in np.flatnonzero(adj[i])))
        for i in range(n)
    )
