"""Co-citation on a synthetic corpus.

Builds a few hundred papers whose references favour earlier papers on the
same planted topic, then shows which papers are most often cited together
with a chosen source.
"""

from paperrec.cocitation import cocitation_counts, top_cocited
from paperrec.corpus import build_citation_index, corpus_stats
from paperrec.synthetic import SyntheticCorpus

gen = SyntheticCorpus(n_topics=6, seed=1)
corpus = gen.corpus(400)
index = build_citation_index(corpus)

for line in corpus_stats(corpus, index, with_cocitation=True).as_lines():
    print(line)

# the most-cited paper makes an interesting source
source = max(corpus.ids, key=lambda pid: len(index.cited_by.get(pid, ())))
cc = cocitation_counts(index, source)
print(f"\n{source} (topic {gen.topic_of(corpus.index_of(source))}) is cited {len(index.cited_by[source])} times")
print("top co-cited papers:")
for target, count in top_cocited(cc, 8).entries:
    print(f"  {target}  count={count}  topic={gen.topic_of(corpus.index_of(target))}")
