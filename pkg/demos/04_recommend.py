"""Hybrid recommendations for papers and for free text.

Co-citation counts pass through a logistic map so they can be compared with
cosine scores, then both candidate lists are merged per source paper.
"""

from paperrec.clustering import ClusterParams, init_centroids, partition_for_search, spherical_kmeans
from paperrec.cocitation import cocitation_counts
from paperrec.corpus import build_citation_index
from paperrec.embedding import embed_corpus, fit_tfidf
from paperrec.recommend import MergeParams, RunStats, map_cc_score, recommend_corpus, recommend_text
from paperrec.synthetic import SyntheticCorpus
from paperrec.word2vec import TrainingParams, train_word_embeddings

params = MergeParams(theta=0.4, tau=5.0, top_k=6)
print("co-citation count -> score:", ", ".join(f"{c}:{float(map_cc_score(c, params)):.3f}" for c in (0, 2, 5, 10, 20)))

gen = SyntheticCorpus(n_topics=6, seed=4)
corpus = gen.corpus(1500)
tfidf = fit_tfidf(corpus, 5)
words = train_word_embeddings(corpus, TrainingParams(embedding_size=48, max_iterations=4, min_count=5, subsample=1e-3))
emb, _ = embed_corpus(corpus, words, tfidf)
cparams = ClusterParams(initial_k=20)
model = spherical_kmeans(emb, init_centroids(corpus, emb, cparams).centroids, cparams)
part = partition_for_search(model, cparams)

stats = RunStats()
lists = {lst[0].source: lst for lst in recommend_corpus(corpus, build_citation_index(corpus), emb, model, params, part, stats)}
print(stats.as_dict())

# pick the paper with the strongest co-citation signal
index = build_citation_index(corpus)
source = max(corpus.ids, key=lambda pid: (max((c for _, c in cocitation_counts(index, pid).entries), default=0), pid))
print(f"\n{source}: {corpus[source].title!r}")
print("co-citation candidates:")
for target, count in cocitation_counts(index, source).entries[:4]:
    print(f"  {target}  count={count}  score={float(map_cc_score(count, params)):.3f}")
print("merged list (close text neighbours outrank weak co-citation evidence):")
for r in lists[source]:
    print(f"  {r.target}  {r.score:.3f}  {r.provenance:4s}  {corpus[r.target].title!r}")

print("\nfree-text query:")
for pid, score in recommend_text(corpus[source].title, words, tfidf, model, emb, 3, part):
    print(f"  {pid}  {score:.3f}")
