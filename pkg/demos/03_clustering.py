"""Spherical k-means seeded from topic labels.

Each paper carries a high-confidence leaf topic, so the initial centroids are
the normalized means of topic members. The recovered clusters line up with
the planted topics.
"""

from collections import Counter

from paperrec.clustering import ClusterParams, init_centroids, partition_for_search, spherical_kmeans
from paperrec.embedding import embed_corpus, fit_tfidf
from paperrec.synthetic import SyntheticCorpus
from paperrec.word2vec import TrainingParams, train_word_embeddings

gen = SyntheticCorpus(n_topics=8, seed=3)
corpus = gen.corpus(2000)
words = train_word_embeddings(corpus, TrainingParams(embedding_size=48, max_iterations=4, min_count=5, subsample=1e-3))
emb, _ = embed_corpus(corpus, words, fit_tfidf(corpus, 5))

params = ClusterParams(initial_k=50, size_cap=300)
seeds = init_centroids(corpus, emb, params)
print(f"{len(seeds.topics)} topic seeds")
model = spherical_kmeans(emb, seeds.centroids, params)
print(f"converged={model.converged} after {model.n_iter} iterations")
print("objective per iteration:", " ".join(f"{v:.4f}" for v in model.objective))

purity = 0
for c in range(model.k):
    labels = Counter(gen.topic_of(corpus.index_of(model.paper_ids[i])) for i in model.members(c))
    purity += labels.most_common(1)[0][1]
print(f"purity {purity / len(model.paper_ids):.3f}, sizes {sorted(model.sizes.tolist(), reverse=True)}")

part = partition_for_search(model, params)
print(f"{len(part.capped_ids)} papers sit in clusters above the cap and get co-citation results only")
