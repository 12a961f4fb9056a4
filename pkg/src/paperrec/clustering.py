"""Spherical k-means over unit paper embeddings.

Centroids are seeded from leaf topics: each high-confidence leaf topic gets the
normalized mean of (at most ``max_samples_per_topic``) of its papers. Corpora
without topic labels can use :func:`farthest_point_seeds` instead.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .corpus import Corpus
from .embedding import PaperEmbeddings

log = logging.getLogger(__name__)

MODEL_VERSION = 1


class NoTopicSeedsError(ValueError):
    """No leaf topic qualifies for centroid seeding."""


@dataclass(frozen=True)
class ClusterParams:
    initial_k: int = 23533
    max_iterations: int = 10
    min_error: float = 1e-3
    size_cap: int = 35000
    max_samples_per_topic: int = 1000
    topic_confidence: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.initial_k < 1:
            raise ValueError("initial_k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.min_error > 0:
            raise ValueError("min_error must be > 0")
        if self.size_cap < 1:
            raise ValueError("size_cap must be >= 1")
        if self.max_samples_per_topic < 1:
            raise ValueError("max_samples_per_topic must be >= 1")


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1, keepdims=True)


@dataclass
class SeedCentroids:
    centroids: np.ndarray
    topics: list[str]
    sampled: list[int]

    @property
    def k(self) -> int:
        return len(self.topics)


def init_centroids(corpus: Corpus, embeddings: PaperEmbeddings, params: ClusterParams) -> SeedCentroids:
    """One centroid per leaf topic that has embedded high-confidence members.

    Topics are processed in id order and sampled with a generator seeded from
    ``params.seed``. When more topics qualify than ``params.initial_k`` the
    best-populated ones are kept.
    """
    members: dict[str, list[int]] = {}
    for pid in embeddings.ids:
        if pid not in corpus:
            continue
        for t in corpus[pid].topics:
            if t.is_leaf and t.confidence >= params.topic_confidence:
                members.setdefault(t.topic_id, []).append(embeddings.row[pid])
    if not members:
        raise NoTopicSeedsError(
            "no embedded paper carries a high-confidence leaf topic; "
            "seed with farthest_point_seeds instead"
        )
    topics = sorted(members)
    if len(topics) > params.initial_k:
        topics = sorted(sorted(topics, key=lambda t: (-len(members[t]), t))[: params.initial_k])

    rng = np.random.default_rng(params.seed)
    rows, kept, sampled = [], [], []
    for t in topics:
        idx = np.array(members[t])
        if len(idx) > params.max_samples_per_topic:
            idx = np.sort(rng.choice(idx, size=params.max_samples_per_topic, replace=False))
        mean = embeddings.vectors[idx].mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            continue
        rows.append(mean / norm)
        kept.append(t)
        sampled.append(len(idx))
    if not rows:
        raise NoTopicSeedsError("every qualifying topic averaged to a zero vector")
    log.info("seeded %d centroids from leaf topics", len(kept))
    return SeedCentroids(np.vstack(rows), kept, sampled)


def farthest_point_seeds(vectors: np.ndarray, k: int, seed: int = 0, sample_size: int = 20000) -> np.ndarray:
    """k-means++ style seeding on the sphere, using 1 - cosine as the distance."""
    rng = np.random.default_rng(seed)
    n = len(vectors)
    if n == 0:
        raise ValueError("no vectors to seed from")
    pool = vectors if n <= sample_size else vectors[np.sort(rng.choice(n, sample_size, replace=False))]
    k = min(k, len(pool))
    chosen = [int(rng.integers(len(pool)))]
    dist = np.clip(1.0 - pool @ pool[chosen[0]], 0.0, None)
    for _ in range(1, k):
        total = dist.sum()
        if total <= 0:
            break
        nxt = int(np.searchsorted(np.cumsum(dist) / total, rng.random(), side="right"))
        nxt = min(nxt, len(pool) - 1)
        chosen.append(nxt)
        dist = np.minimum(dist, np.clip(1.0 - pool @ pool[nxt], 0.0, None))
    return pool[chosen].copy()


@dataclass
class ClusterModel:
    centroids: np.ndarray
    paper_ids: list[str]
    labels: np.ndarray
    objective: list[float] = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False
    params: ClusterParams | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if any(a > b for a, b in zip(self.paper_ids, self.paper_ids[1:])):
            order = sorted(range(len(self.paper_ids)), key=self.paper_ids.__getitem__)
            self.paper_ids = [self.paper_ids[i] for i in order]
            self.labels = self.labels[order]
        self._row = {pid: i for i, pid in enumerate(self.paper_ids)}
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.k + 1))
        # member rows per cluster, in paper_ids order (ids are sorted, so ascending id)
        self._members = [order[bounds[c]:bounds[c + 1]] for c in range(self.k)]

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @property
    def mean_cluster_size(self) -> float:
        return float(len(self.labels) / self.k) if self.k else 0.0

    def __contains__(self, pid: str) -> bool:
        return pid in self._row

    def cluster_of(self, pid: str) -> int:
        return int(self.labels[self._row[pid]])

    def members(self, cluster: int) -> np.ndarray:
        """Row indices (into ``paper_ids``) of the cluster's papers."""
        return self._members[cluster]

    def assignment(self) -> dict[str, int]:
        return {pid: int(c) for pid, c in zip(self.paper_ids, self.labels)}

    def stats(self) -> dict:
        sizes = self.sizes
        return {
            "clusters": self.k,
            "mean_cluster_size": self.mean_cluster_size,
            "min_cluster_size": int(sizes.min()) if self.k else 0,
            "max_cluster_size": int(sizes.max()) if self.k else 0,
            "iterations": self.n_iter,
            "converged": self.converged,
            "objective": self.objective[-1] if self.objective else float("nan"),
        }

    def save(self, path: str | Path) -> None:
        p = asdict(self.params) if self.params else {}
        with open(path, "wb") as fh:
            np.savez(
                fh,
                version=np.array(MODEL_VERSION),
                centroids=self.centroids,
                paper_ids=np.array(self.paper_ids, dtype=str),
                labels=self.labels,
                objective=np.array(self.objective, dtype=np.float64),
                n_iter=np.array(self.n_iter),
                converged=np.array(self.converged),
                params=np.array(json.dumps(p)),
            )

    @classmethod
    def load(cls, path: str | Path) -> "ClusterModel":
        with np.load(path, allow_pickle=False) as d:
            if int(d["version"]) != MODEL_VERSION:
                raise ValueError(f"unsupported cluster model version {int(d['version'])}")
            raw = json.loads(str(d["params"]))
            params = ClusterParams(**raw) if raw else None
            return cls(
                d["centroids"],
                [str(x) for x in d["paper_ids"]],
                d["labels"],
                d["objective"].tolist(),
                int(d["n_iter"]),
                bool(d["converged"]),
                params,
            )

    def write_assignments(self, fh) -> None:
        for pid, c in zip(self.paper_ids, self.labels):
            fh.write(f"{pid}\t{int(c)}\n")


def _assign(X: np.ndarray, C: np.ndarray, block: int = 8192) -> tuple[np.ndarray, np.ndarray]:
    labels = np.empty(len(X), dtype=np.int64)
    best = np.empty(len(X))
    for s in range(0, len(X), block):
        sims = X[s:s + block] @ C.T
        # argmax returns the first maximum, i.e. ties go to the lowest index
        labels[s:s + block] = np.argmax(sims, axis=1)
        best[s:s + block] = sims[np.arange(len(sims)), labels[s:s + block]]
    return labels, best


def _drop_empty(C: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.bincount(labels, minlength=len(C))
    alive = sizes > 0
    if alive.all():
        return C, labels
    remap = np.cumsum(alive) - 1
    return C[alive], remap[labels]


def spherical_kmeans(
    embeddings: PaperEmbeddings | np.ndarray,
    centroids: np.ndarray,
    params: ClusterParams | None = None,
    ids: list[str] | None = None,
) -> ClusterModel:
    """Lloyd iterations on the unit sphere.

    Each round assigns papers to their most similar centroid, then replaces
    every centroid by the normalized mean of its members; clusters that lose
    all members are dropped. Stops after ``max_iterations`` rounds or once the
    mean cosine distance between old and new centroids falls below
    ``min_error``. The objective (mean paper-to-centroid cosine) is recorded
    after every assignment and never decreases.
    """
    params = params or ClusterParams()
    if isinstance(embeddings, PaperEmbeddings):
        X, ids = embeddings.vectors, list(embeddings.ids)
    else:
        X = np.asarray(embeddings, dtype=np.float64)
        width = len(str(max(len(X) - 1, 0)))
        ids = list(ids) if ids is not None else [f"{i:0{width}d}" for i in range(len(X))]
    C = np.asarray(centroids, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("no embeddings to cluster")
    if C.ndim != 2 or len(C) == 0:
        raise ValueError("need at least one initial centroid")
    if X.shape[1] != C.shape[1]:
        raise ValueError(f"dimension mismatch: embeddings {X.shape[1]}, centroids {C.shape[1]}")
    C = _normalize_rows(C)

    objective = []
    converged = False
    n_iter = 0
    for n_iter in range(1, params.max_iterations + 1):
        labels, best = _assign(X, C)
        objective.append(float(best.mean()))
        C, labels = _drop_empty(C, labels)
        onehot = sparse.csr_matrix((np.ones(len(X)), (labels, np.arange(len(X)))), shape=(len(C), len(X)))
        sums = onehot @ X
        norms = np.linalg.norm(sums, axis=1)
        # a cluster whose members cancel out keeps its previous direction
        new = np.where(norms[:, None] > 0, sums / np.where(norms > 0, norms, 1.0)[:, None], C)
        shift = float(np.mean(1.0 - np.sum(C * new, axis=1)))
        C = new
        log.debug("kmeans iter %d: k=%d objective=%.6f shift=%.2e", n_iter, len(C), objective[-1], shift)
        if shift < params.min_error:
            converged = True
            break

    labels, best = _assign(X, C)
    objective.append(float(best.mean()))
    C, labels = _drop_empty(C, labels)
    log.info("kmeans: %d clusters after %d iterations, objective %.4f", len(C), n_iter, objective[-1])
    return ClusterModel(C, ids, labels, objective, n_iter, converged, params)


@dataclass(frozen=True)
class SearchPartition:
    searchable: np.ndarray
    capped_ids: tuple[str, ...]
    sizes: np.ndarray

    @property
    def max_searchable_size(self) -> int:
        return int(self.sizes[self.searchable].max()) if self.searchable.any() else 0


def partition_for_search(model: ClusterModel, params: ClusterParams | None = None) -> SearchPartition:
    """Mark clusters no larger than ``size_cap`` as searchable; members of the rest are CcB-only."""
    params = params or model.params or ClusterParams()
    sizes = model.sizes
    searchable = sizes <= params.size_cap
    capped = sorted(model.paper_ids[i] for c in np.flatnonzero(~searchable) for i in model.members(c))
    return SearchPartition(searchable, tuple(capped), sizes)
