"""Hybrid research paper recommender.

Co-citation candidates and clustered content-embedding neighbors are scored on
a common [0, 1] scale and merged into one ranked list per paper.
"""

from .cocitation import CoCitationList, cocitation_counts, top_cocited
from .clustering import (
    ClusterModel,
    ClusterParams,
    NoTopicSeedsError,
    farthest_point_seeds,
    init_centroids,
    partition_for_search,
    spherical_kmeans,
)
from .corpus import (
    CitationIndex,
    Corpus,
    CorpusError,
    PaperRecord,
    Topic,
    build_citation_index,
    corpus_stats,
    parse_corpus,
)
from .embedding import (
    PaperEmbeddings,
    TfIdfModel,
    UnembeddableError,
    WordEmbeddings,
    embed_corpus,
    embed_paper,
    embed_text,
    fit_tfidf,
    load_word_embeddings,
    save_word_embeddings,
    tokenize,
)
from .evaluation import EvalReport, GradedRecommendation, evaluate_survey, ndcg, precision_at_k
from .recommend import (
    CcbOnlyError,
    MergeParams,
    Recommendation,
    SimilarityCounter,
    cb_neighbors,
    map_cc_score,
    merge_recommendations,
    recommend_corpus,
    recommend_text,
)
from .word2vec import TrainingParams, train_word_embeddings

__version__ = "0.1.0"
