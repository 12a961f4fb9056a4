"""Minimal skip-gram word2vec with negative sampling, in numpy.

Training is single-threaded and fully determined by ``TrainingParams.seed``:
the same corpus and parameters reproduce the same vectors bit for bit. Updates
are applied in mini-batches of (center, context) pairs rather than one pair at
a time, which is what makes a pure numpy trainer usable on desk-scale corpora.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .corpus import Corpus
from .embedding import WordEmbeddings, build_vocabulary, paper_tokens

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingParams:
    skipgram: bool = True
    embedding_size: int = 256
    window: int = 10
    max_iterations: int = 10
    min_count: int = 10
    subsample: float = 1e-5
    negatives: int = 10
    seed: int = 1
    alpha: float = 0.025
    min_alpha: float = 1e-4
    batch_size: int = 1024

    def __post_init__(self):
        if not self.skipgram:
            raise ValueError("only the skip-gram architecture is implemented")
        for name in ("embedding_size", "window", "max_iterations", "min_count", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.subsample < 0:
            raise ValueError("subsample must be >= 0")
        if not 0 < self.min_alpha <= self.alpha:
            raise ValueError("need 0 < min_alpha <= alpha")


@dataclass
class SkipGramResult:
    terms: list[str]
    vectors: np.ndarray
    counts: np.ndarray
    epoch_loss: list[float]


def _keep_probability(counts: np.ndarray, sample: float) -> np.ndarray:
    if sample <= 0:
        return np.ones(len(counts))
    threshold = sample * counts.sum()
    keep = (np.sqrt(counts / threshold) + 1.0) * threshold / counts
    return np.minimum(keep, 1.0)


def _pairs(tokens: np.ndarray, doc: np.ndarray, window: int, rng: np.random.Generator):
    """All (center, context) position pairs under word2vec's shrunk random window."""
    n = len(tokens)
    reach = rng.integers(1, window + 1, size=n)
    centers, contexts = [], []
    for off in range(1, min(window, n - 1) + 1):
        left = np.arange(n - off)
        right = left + off
        same = doc[left] == doc[right]
        fwd = same & (reach[left] >= off)
        bwd = same & (reach[right] >= off)
        centers += [left[fwd], right[bwd]]
        contexts += [right[fwd], left[bwd]]
    if not centers:
        return np.empty(0, np.intp), np.empty(0, np.intp)
    c = np.concatenate(centers)
    o = np.concatenate(contexts)
    order = np.argsort(c, kind="stable")
    return tokens[c[order]], tokens[o[order]]


def _scatter_add(target: np.ndarray, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray,
                 values: np.ndarray) -> None:
    """target[rows[i]] += weights[i] * values[cols[i]], summing repeated rows."""
    touched, local = np.unique(rows, return_inverse=True)
    mix = sparse.csr_matrix((weights, (local, cols)), shape=(len(touched), len(values)))
    target[touched] += mix @ values


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def train_skipgram(docs: Sequence[Sequence[str]], params: TrainingParams) -> SkipGramResult:
    vocab = build_vocabulary(docs, params.min_count)
    if len(vocab) == 0:
        raise ValueError(f"no term reaches min_count={params.min_count}")
    terms = vocab.ordered_terms()
    tid = {t: i for i, t in enumerate(terms)}
    counts = vocab.counts()
    V, dim = len(terms), params.embedding_size

    encoded = [np.array([tid[t] for t in d if t in tid], dtype=np.intp) for d in docs]
    stream = np.concatenate(encoded) if encoded else np.empty(0, np.intp)
    doc_of = np.repeat(np.arange(len(encoded)), [len(e) for e in encoded])

    rng = np.random.default_rng(params.seed)
    W = ((rng.random((V, dim)) - 0.5) / dim).astype(np.float32)
    C = np.zeros((V, dim), dtype=np.float32)
    noise = counts.astype(np.float64) ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())
    noise_cdf[-1] = 1.0
    keep_p = _keep_probability(counts.astype(np.float64), params.subsample)

    epochs = params.max_iterations
    losses = []
    for epoch in range(epochs):
        kept = rng.random(len(stream)) < keep_p[stream]
        centers, contexts = _pairs(stream[kept], doc_of[kept], params.window, rng)
        total = len(centers)
        if total == 0:
            losses.append(float("nan"))
            continue
        loss_sum = 0.0
        B, K = params.batch_size, params.negatives
        for start in range(0, total, B):
            c = centers[start:start + B]
            o = contexts[start:start + B]
            b = len(c)
            neg = np.searchsorted(noise_cdf, rng.random((b, K)), side="right")
            progress = (epoch + start / total) / epochs
            lr = max(params.min_alpha, params.alpha - (params.alpha - params.min_alpha) * progress)

            v = W[c]
            out_rows = np.concatenate([o[:, None], neg], axis=1)  # (b, 1 + K)
            u = C[out_rows]
            z = np.einsum("bkd,bd->bk", u, v)
            z[:, 0] = -z[:, 0]
            # positive pair wants sigmoid(z) -> 1, negatives want it -> 0
            loss_sum -= _log_sigmoid(-z).sum()
            g = (1.0 / (1.0 + np.exp(-z))).astype(np.float32)
            g[:, 0] = -g[:, 0]
            grad_v = np.einsum("bk,bkd->bd", g, u)
            pair = np.repeat(np.arange(b), K + 1)
            _scatter_add(C, out_rows.ravel(), pair, np.float32(-lr) * g.ravel(), v)
            _scatter_add(W, c, np.arange(b), np.full(b, -lr, dtype=np.float32), grad_v)
        losses.append(float(loss_sum) / total)
        log.info("word2vec epoch %d/%d: %d pairs, loss %.4f", epoch + 1, epochs, total, losses[-1])

    return SkipGramResult(terms, W, counts, losses)


def train_word_embeddings(corpus: Corpus, params: TrainingParams | None = None) -> WordEmbeddings:
    """Train skip-gram vectors on title + keywords + abstract of every paper."""
    params = params or TrainingParams()
    if corpus.n == 0:
        raise ValueError("cannot train on an empty corpus")
    result = train_skipgram([paper_tokens(r) for r in corpus], params)
    return WordEmbeddings(result.terms, result.vectors)
