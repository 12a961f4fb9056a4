"""Content-based neighbor search, co-citation score mapping and list fusion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np

from .clustering import ClusterModel, SearchPartition, partition_for_search
from .cocitation import CoCitationList, cocitation_counts
from .corpus import CitationIndex, Corpus
from .embedding import PaperEmbeddings, TfIdfModel, WordEmbeddings, embed_text

log = logging.getLogger(__name__)

PROVENANCE = ("ccb", "cb", "both")


class CcbOnlyError(LookupError):
    """The paper has no content-based candidates (unembedded or in a capped cluster)."""


@dataclass(frozen=True)
class MergeParams:
    theta: float = 0.4
    tau: float = 5.0
    top_k: int = 20

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")


@dataclass(frozen=True)
class Recommendation:
    source: str
    target: str
    score: float
    provenance: str

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"self-recommendation for {self.source!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass
class SimilarityCounter:
    """Tally of embedding dot products actually computed."""

    count: int = 0

    def add(self, n: int) -> None:
        self.count += int(n)


def _searchable(model: ClusterModel, partition: SearchPartition | None) -> np.ndarray:
    if partition is None:
        return np.ones(model.k, dtype=bool)
    return partition.searchable


def cb_neighbors(
    source: str,
    model: ClusterModel,
    embeddings: PaperEmbeddings,
    k: int,
    partition: SearchPartition | None = None,
    counter: SimilarityCounter | None = None,
) -> list[tuple[str, float]]:
    """Top-``k`` most cosine-similar papers from the source's own cluster."""
    if source not in model or source not in embeddings:
        raise CcbOnlyError(f"{source!r} is not embedded")
    cluster = model.cluster_of(source)
    if not _searchable(model, partition)[cluster]:
        raise CcbOnlyError(f"{source!r} is in capped cluster {cluster}")
    ids = [model.paper_ids[i] for i in model.members(cluster)]
    others = [p for p in ids if p != source]
    if not others or k < 1:
        return []
    sims = embeddings.vectors[[embeddings.row[p] for p in others]] @ embeddings[source]
    if counter is not None:
        counter.add(len(others))
    # members come in ascending id order, so a stable sort breaks ties by id
    order = np.argsort(-sims, kind="stable")[:k]
    return [(others[i], float(sims[i])) for i in order]


def map_cc_score(cc: int, params: MergeParams | None = None) -> np.longdouble:
    """Logistic map 1 / (1 + exp(theta * (tau - cc))) of a co-citation count.

    Evaluated in extended precision: with theta = 0.4 a double saturates at
    1.0 from cc of roughly 97 on, which would tie large counts.
    """
    params = params or MergeParams()
    if cc < 0:
        raise ValueError(f"co-citation count must be >= 0, got {cc}")
    x = np.longdouble(params.theta) * (np.longdouble(params.tau) - np.longdouble(cc))
    return np.longdouble(1) / (np.longdouble(1) + np.exp(x))


def merge_recommendations(
    ccb: CoCitationList | Iterable[tuple[str, int]],
    cb: Iterable[tuple[str, float]],
    params: MergeParams | None = None,
    source: str | None = None,
) -> list[Recommendation]:
    """Fuse mapped co-citation scores with cosine scores into one ranked list.

    A target present in both streams keeps the larger of its two scores and
    is marked ``both``; negative cosines are discarded.
    """
    params = params or MergeParams()
    if isinstance(ccb, CoCitationList):
        source = ccb.source if source is None else source
        ccb = ccb.entries
    best: dict[str, tuple[np.longdouble, str]] = {}
    for target, count in ccb:
        best[target] = (map_cc_score(count, params), "ccb")
    for target, cos in cb:
        if cos < 0:
            continue
        score = np.longdouble(min(cos, 1.0))
        if target in best:
            prev = best[target][0]
            best[target] = (max(prev, score), "both")
        else:
            best[target] = (score, "cb")
    ranked = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))[: params.top_k]
    src = source if source is not None else ""
    return [Recommendation(src, t, float(s), prov) for t, (s, prov) in ranked]


@dataclass
class RunStats:
    papers: int = 0
    emitted: int = 0
    no_coverage: int = 0
    ccb_only: int = 0
    with_ccb: int = 0
    with_cb: int = 0
    unembedded: int = 0
    capped: int = 0
    similarity: SimilarityCounter = field(default_factory=SimilarityCounter)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "similarity"}
        d["similarity_computations"] = self.similarity.count
        d["coverage"] = self.emitted / self.papers if self.papers else 0.0
        return d


def recommend_paper(
    pid: str,
    index: CitationIndex,
    embeddings: PaperEmbeddings,
    model: ClusterModel,
    params: MergeParams,
    partition: SearchPartition | None = None,
    counter: SimilarityCounter | None = None,
) -> tuple[list[Recommendation], CoCitationList, list[tuple[str, float]] | None]:
    ccb = cocitation_counts(index, pid)
    try:
        cb = cb_neighbors(pid, model, embeddings, params.top_k, partition, counter)
    except CcbOnlyError:
        cb = None
    return merge_recommendations(ccb, cb or [], params), ccb, cb


def recommend_corpus(
    corpus: Corpus,
    index: CitationIndex,
    embeddings: PaperEmbeddings,
    model: ClusterModel,
    params: MergeParams | None = None,
    partition: SearchPartition | None = None,
    stats: RunStats | None = None,
) -> Iterator[list[Recommendation]]:
    """Yield the merged list of every paper that has any candidate, in id order."""
    params = params or MergeParams()
    partition = partition or partition_for_search(model)
    stats = stats if stats is not None else RunStats()
    capped = set(partition.capped_ids)
    for pid in corpus.ids:
        stats.papers += 1
        recs, ccb, cb = recommend_paper(pid, index, embeddings, model, params, partition, stats.similarity)
        if len(ccb):
            stats.with_ccb += 1
        if cb is None:
            if pid in capped:
                stats.capped += 1
            else:
                stats.unembedded += 1
            if len(ccb):
                stats.ccb_only += 1
        elif cb:
            stats.with_cb += 1
        if not recs:
            stats.no_coverage += 1
            continue
        stats.emitted += 1
        yield recs
    log.info("recommend: %s", stats.as_dict())


def write_recommendations_tsv(lists: Iterable[list[Recommendation]], fh: TextIO) -> int:
    """``source<TAB>target<TAB>score<TAB>provenance`` rows, score to 6 decimals."""
    rows = 0
    for recs in lists:
        for r in recs:
            fh.write(f"{r.source}\t{r.target}\t{r.score:.6f}\t{r.provenance}\n")
            rows += 1
    return rows


def nearest_searchable_cluster(
    vector: np.ndarray,
    model: ClusterModel,
    partition: SearchPartition | None = None,
    counter: SimilarityCounter | None = None,
) -> int:
    sims = model.centroids @ vector
    if counter is not None:
        counter.add(len(sims))
    ok = _searchable(model, partition)
    if not ok.any():
        raise CcbOnlyError("no searchable cluster")
    order = np.argsort(-sims, kind="stable")
    return int(next(c for c in order if ok[c]))


def recommend_text(
    query: str,
    words: WordEmbeddings,
    tfidf: TfIdfModel,
    model: ClusterModel,
    embeddings: PaperEmbeddings,
    k: int = 10,
    partition: SearchPartition | None = None,
    counter: SimilarityCounter | None = None,
) -> list[tuple[str, float]]:
    """Papers most similar to free text: one centroid scan, then one cluster scan."""
    if k < 1:
        raise ValueError("k must be >= 1")
    vec = embed_text(query, words, tfidf)
    cluster = nearest_searchable_cluster(vec, model, partition, counter)
    ids = [model.paper_ids[i] for i in model.members(cluster)]
    sims = embeddings.vectors[[embeddings.row[p] for p in ids]] @ vec
    if counter is not None:
        counter.add(len(ids))
    order = np.argsort(-sims, kind="stable")[:k]
    return [(ids[i], float(sims[i])) for i in order]
