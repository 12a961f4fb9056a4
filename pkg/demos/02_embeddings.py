"""Word vectors and TF-IDF paper embeddings.

Trains a small skip-gram model on synthetic text and embeds every paper.
Papers that share a planted topic end up much closer than papers that do not.
"""

import numpy as np

from paperrec.embedding import embed_corpus, embed_text, fit_tfidf
from paperrec.synthetic import SyntheticCorpus
from paperrec.word2vec import TrainingParams, train_word_embeddings

# the default subsampling threshold (1e-5) drops almost every token of a corpus this small
gen = SyntheticCorpus(n_topics=6, seed=2)
corpus = gen.corpus(1500)
words = train_word_embeddings(corpus, TrainingParams(embedding_size=48, max_iterations=4, min_count=5, subsample=1e-3))
tfidf = fit_tfidf(corpus, min_count=5)
emb, skipped = embed_corpus(corpus, words, tfidf)
print(f"vocabulary {len(words)} terms, embedded {len(emb)} papers, {len(skipped)} unembeddable")

topics = np.array([gen.topic_of(corpus.index_of(pid)) for pid in emb.ids])
sims = emb.vectors @ emb.vectors.T
same = topics[:, None] == topics[None, :]
np.fill_diagonal(same, False)
other = topics[:, None] != topics[None, :]
print(f"mean cosine, same topic:      {sims[same].mean():.3f}")
print(f"mean cosine, different topic: {sims[other].mean():.3f}")

# a free-text query uses the same weighting as a title
title = corpus[emb.ids[0]].title
q = embed_text(title, words, tfidf)
best = np.argsort(-(emb.vectors @ q))[:3]
print(f"\nquery {title!r}")
for i in best:
    print(f"  {emb.ids[i]}  {float(emb.vectors[i] @ q):.3f}  {corpus[emb.ids[i]].title!r}")
