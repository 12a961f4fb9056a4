"""Stage-per-command pipeline driver.

Every stage reads its inputs from, and writes its artifact to, the working
directory named in the config. Artifacts are written to a temporary file and
renamed into place, so an interrupted stage never leaves a partial file under
the final name.

    paperrec ingest --corpus papers.jsonl
    paperrec cocite --top-k 10
    paperrec embed --train
    paperrec cluster --k 500 --cap 35000
    paperrec recommend --theta 0.4 --tau 5 --top-k 20
    paperrec query --text "spherical clustering of documents" --k 10
    paperrec eval --survey survey.csv
    paperrec stats
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, fields
from pathlib import Path

from . import cocitation, evaluation
from .clustering import ClusterModel, ClusterParams, NoTopicSeedsError, farthest_point_seeds, init_centroids, partition_for_search, spherical_kmeans
from .corpus import Corpus, CorpusError, build_citation_index, corpus_stats, parse_corpus, write_corpus
from .embedding import PaperEmbeddings, TfIdfModel, embed_corpus, fit_tfidf, load_word_embeddings, save_word_embeddings
from .recommend import CcbOnlyError, MergeParams, RunStats, SimilarityCounter, recommend_corpus, recommend_text, write_recommendations_tsv
from .word2vec import TrainingParams, train_word_embeddings

log = logging.getLogger("paperrec")

STAGES = ("ingest", "cocite", "embed", "cluster", "recommend", "query", "eval", "stats")


class StageError(RuntimeError):
    pass


class ParameterError(ValueError):
    pass


@dataclass
class PipelineConfig:
    workdir: str = "."
    corpus: str = ""
    vectors: str = ""

    corpus_file: str = "corpus.jsonl"
    cocitation_file: str = "cocitations.tsv"
    words_file: str = "word_vectors.txt"
    tfidf_file: str = "tfidf.json"
    embeddings_file: str = "embeddings.npz"
    unembeddable_file: str = "unembeddable.txt"
    cluster_file: str = "clusters.npz"
    assignments_file: str = "assignments.tsv"
    recommendations_file: str = "recommendations.tsv"
    report_file: str = "eval_report.txt"
    histogram_file: str = "eval_histogram.csv"

    cocite_top_k: int = 10
    emb_size: int = 256
    window: int = 10
    w2v_iterations: int = 10
    min_count: int = 10
    sample: float = 1e-5
    negative: int = 10

    k: int = 23533
    kmeans_iterations: int = 10
    min_error: float = 1e-3
    cap: int = 35000
    max_samples_per_topic: int = 1000
    topic_confidence: float = 0.8

    theta: float = 0.4
    tau: float = 5.0
    top_k: int = 20

    workers: int = 1
    seed: int = 1

    def path(self, name: str) -> Path:
        return Path(self.workdir) / getattr(self, name)

    def training_params(self) -> TrainingParams:
        return TrainingParams(
            embedding_size=self.emb_size, window=self.window, max_iterations=self.w2v_iterations,
            min_count=self.min_count, subsample=self.sample, negatives=self.negative, seed=self.seed,
        )

    def cluster_params(self) -> ClusterParams:
        return ClusterParams(
            initial_k=self.k, max_iterations=self.kmeans_iterations, min_error=self.min_error,
            size_cap=self.cap, max_samples_per_topic=self.max_samples_per_topic,
            topic_confidence=self.topic_confidence, seed=self.seed,
        )

    def merge_params(self) -> MergeParams:
        return MergeParams(theta=self.theta, tau=self.tau, top_k=self.top_k)

    def update(self, values: dict) -> None:
        types = {f.name: f.type for f in fields(self)}
        for key, raw in values.items():
            if key not in types:
                raise ParameterError(f"unknown config key {key!r}")
            conv = {"int": int, "float": float}.get(types[key], str)
            try:
                setattr(self, key, conv(raw) if isinstance(raw, str) else raw)
            except ValueError:
                raise ParameterError(f"config key {key!r}: cannot parse {raw!r} as {types[key]}") from None


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


@contextlib.contextmanager
def atomic_path(path: Path):
    """Yield a temporary sibling path that is renamed onto ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


@contextlib.contextmanager
def atomic_write(path: Path):
    with atomic_path(path) as tmp, open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        yield fh


def _require(cfg: PipelineConfig, name: str, stage: str) -> Path:
    p = cfg.path(name)
    if not p.exists():
        raise StageError(f"missing {p}: run {stage} first")
    return p


def _log_counters(stage: str, counters: dict) -> None:
    for k, v in counters.items():
        log.info("%s.%s=%s", stage, k, v)


def _load_corpus(cfg):
    return parse_corpus(_require(cfg, "corpus_file", "ingest"))


def stage_ingest(cfg: PipelineConfig, args) -> int:
    src = args.corpus or cfg.corpus
    if not src:
        raise ParameterError("ingest needs --corpus <path>")
    corpus = parse_corpus(src)
    index = build_citation_index(corpus)
    with atomic_path(cfg.path("corpus_file")) as tmp:
        write_corpus(corpus, tmp)
    _log_counters("ingest", {"papers": corpus.n, "citations": index.n_edges, "dangling": index.dangling})
    return 0


def stage_cocite(cfg: PipelineConfig, args) -> int:
    corpus = _load_corpus(cfg)
    index = build_citation_index(corpus)
    k = args.top_k if args.top_k is not None else cfg.cocite_top_k
    if k < 1:
        raise ParameterError(f"top-k must be >= 1, got {k}")
    with atomic_write(cfg.path("cocitation_file")) as fh:
        rows = cocitation.write_cocitation_tsv(cocitation.all_cocitations(index, k=k), fh)
    _log_counters("cocite", {"papers": corpus.n, "rows": rows})
    return 0


def stage_embed(cfg: PipelineConfig, args) -> int:
    corpus = _load_corpus(cfg)
    if args.load or (cfg.vectors and not args.train):
        words = load_word_embeddings(args.load or cfg.vectors)
    else:
        words = train_word_embeddings(corpus, cfg.training_params())
    with atomic_path(cfg.path("words_file")) as tmp:
        save_word_embeddings(words, tmp)
    tfidf = fit_tfidf(corpus, cfg.min_count)
    embeddings, skipped = embed_corpus(corpus, words, tfidf)
    with atomic_path(cfg.path("tfidf_file")) as tmp:
        tfidf.save(tmp)
    with atomic_write(cfg.path("unembeddable_file")) as fh:
        fh.writelines(pid + "\n" for pid in skipped)
    with atomic_path(cfg.path("embeddings_file")) as tmp:
        embeddings.save(tmp)
    _log_counters("embed", {
        "papers": corpus.n, "embedded": len(embeddings), "unembeddable": len(skipped),
        "vocabulary": len(words), "coverage": round(len(embeddings) / corpus.n, 6),
    })
    return 0


def stage_cluster(cfg: PipelineConfig, args) -> int:
    corpus = _load_corpus(cfg)
    embeddings = PaperEmbeddings.load(_require(cfg, "embeddings_file", "embed"))
    params = cfg.cluster_params()
    try:
        seeds = init_centroids(corpus, embeddings, params).centroids
    except NoTopicSeedsError as exc:
        log.warning("%s; falling back to farthest-point seeding", exc)
        seeds = farthest_point_seeds(embeddings.vectors, params.initial_k, params.seed)
    model = spherical_kmeans(embeddings, seeds, params)
    with atomic_path(cfg.path("cluster_file")) as tmp:
        model.save(tmp)
    with atomic_write(cfg.path("assignments_file")) as fh:
        model.write_assignments(fh)
    part = partition_for_search(model, params)
    counters = model.stats()
    counters.update({"papers": len(model.paper_ids), "capped_papers": len(part.capped_ids),
                     "similarity_computations": len(model.paper_ids) * len(seeds) * model.n_iter})
    _log_counters("cluster", counters)
    return 0


def _recommend_chunk(ids):
    corpus, index, embeddings, model, params, partition = _WORKER_STATE
    sub = Corpus(corpus[p] for p in ids)
    stats = RunStats()
    lists = list(recommend_corpus(sub, index, embeddings, model, params, partition, stats))
    return lists, stats


_WORKER_STATE = None


def stage_recommend(cfg: PipelineConfig, args) -> int:
    global _WORKER_STATE
    corpus = _load_corpus(cfg)
    embeddings = PaperEmbeddings.load(_require(cfg, "embeddings_file", "embed"))
    model = ClusterModel.load(_require(cfg, "cluster_file", "cluster"))
    params = cfg.merge_params()
    cparams = model.params or cfg.cluster_params()
    cparams = dataclasses.replace(cparams, size_cap=cfg.cap)
    partition = partition_for_search(model, cparams)
    index = build_citation_index(corpus)
    embeddings = embeddings.subset(model.paper_ids)

    stats = RunStats()
    if cfg.workers > 1:
        import concurrent.futures as cf
        import multiprocessing as mp

        _WORKER_STATE = (corpus, index, embeddings, model, params, partition)
        ids = list(corpus.ids)
        step = max(1, len(ids) // (cfg.workers * 8) + 1)
        chunks = [ids[i:i + step] for i in range(0, len(ids), step)]
        with cf.ProcessPoolExecutor(cfg.workers, mp_context=mp.get_context("fork")) as pool:
            results = list(pool.map(_recommend_chunk, chunks))
        _WORKER_STATE = None
        lists = [recs for part, _ in results for recs in part]
        for _, s in results:
            for f in dataclasses.fields(RunStats):
                if f.name == "similarity":
                    stats.similarity.add(s.similarity.count)
                else:
                    setattr(stats, f.name, getattr(stats, f.name) + getattr(s, f.name))
    else:
        lists = recommend_corpus(corpus, index, embeddings, model, params, partition, stats)

    with atomic_write(cfg.path("recommendations_file")) as fh:
        rows = write_recommendations_tsv(lists, fh)
    counters = stats.as_dict()
    bound = len(model.paper_ids) * (model.k + partition.max_searchable_size)
    counters.update({"rows": rows, "similarity_bound": bound})
    _log_counters("recommend", counters)
    if stats.similarity.count > bound:
        raise StageError(f"similarity computations {stats.similarity.count} exceed bound {bound}")
    return 0


def stage_query(cfg: PipelineConfig, args) -> int:
    if not args.text:
        raise ParameterError("query needs --text <string>")
    if args.k < 1:
        raise ParameterError(f"k must be >= 1, got {args.k}")
    words = load_word_embeddings(_require(cfg, "words_file", "embed"))
    tfidf = TfIdfModel.load(_require(cfg, "tfidf_file", "embed"))
    embeddings = PaperEmbeddings.load(_require(cfg, "embeddings_file", "embed"))
    model = ClusterModel.load(_require(cfg, "cluster_file", "cluster"))
    cparams = dataclasses.replace(model.params or cfg.cluster_params(), size_cap=cfg.cap)
    counter = SimilarityCounter()
    hits = recommend_text(args.text, words, tfidf, model, embeddings, args.k,
                          partition_for_search(model, cparams), counter)
    for pid, score in hits:
        print(f"{pid}\t{score:.6f}")
    _log_counters("query", {"results": len(hits), "similarity_computations": counter.count})
    return 0


def stage_eval(cfg: PipelineConfig, args) -> int:
    if not args.survey:
        raise ParameterError("eval needs --survey <csv>")
    report = evaluation.evaluate_survey(args.survey, aggregation=args.aggregation)
    with atomic_write(cfg.path("report_file")) as fh:
        fh.writelines(line + "\n" for line in report.as_lines())
    with atomic_path(cfg.path("histogram_file")) as tmp:
        report.write_histogram_csv(tmp)
    for line in report.as_lines():
        print(line)
    return 0


def stage_stats(cfg: PipelineConfig, args) -> int:
    corpus = _load_corpus(cfg)
    index = build_citation_index(corpus)
    report = corpus_stats(corpus, index, with_cocitation=True)
    model_path = cfg.path("cluster_file")
    if model_path.exists():
        report.extra.update({f"cluster.{k}": v for k, v in ClusterModel.load(model_path).stats().items()})
    for line in report.as_lines():
        print(line)
    return 0


HANDLERS = {
    "ingest": stage_ingest, "cocite": stage_cocite, "embed": stage_embed, "cluster": stage_cluster,
    "recommend": stage_recommend, "query": stage_query, "eval": stage_eval, "stats": stage_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paperrec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--workdir", help="artifact directory (overrides config)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="stage", required=True)

    p = sub.add_parser("ingest")
    p.add_argument("--corpus")
    p = sub.add_parser("cocite")
    p.add_argument("--top-k", type=int)
    p = sub.add_parser("embed")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--train", action="store_true")
    g.add_argument("--load", metavar="VECTORS")
    p = sub.add_parser("cluster")
    p.add_argument("--k", type=int)
    p.add_argument("--cap", type=int)
    p = sub.add_parser("recommend")
    p.add_argument("--theta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--top-k", type=int)
    p = sub.add_parser("query")
    p.add_argument("--text", required=True)
    p.add_argument("--k", type=int, default=10)
    p = sub.add_parser("eval")
    p.add_argument("--survey", required=True)
    p.add_argument("--aggregation", choices=("macro", "micro"), default="macro")
    sub.add_parser("stats")
    return parser


def make_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config:
        cfg.update(read_config(args.config))
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    cfg.update(overrides)
    direct = {"workdir": args.workdir, "seed": args.seed, "workers": args.workers}
    stage_flags = {
        "cluster": {"k": getattr(args, "k", None), "cap": getattr(args, "cap", None)},
        "recommend": {"theta": getattr(args, "theta", None), "tau": getattr(args, "tau", None),
                      "top_k": getattr(args, "top_k", None)},
    }.get(args.stage, {})
    cfg.update({k: v for k, v in {**direct, **stage_flags}.items() if v is not None})
    # surface parameter invariants before any work is done
    try:
        cfg.training_params()
        cfg.cluster_params()
        cfg.merge_params()
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    if cfg.workers < 1:
        raise ParameterError("workers must be >= 1")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = make_config(args)
        start = time.perf_counter()
        status = HANDLERS[args.stage](cfg, args)
        log.info("%s finished in %.2fs", args.stage, time.perf_counter() - start)
        return status
    except ParameterError as exc:
        print(f"paperrec {args.stage}: parameter error: {exc}", file=sys.stderr)
        return 2
    except (StageError, CorpusError, CcbOnlyError, evaluation.SurveyFormatError, ValueError, OSError) as exc:
        print(f"paperrec {args.stage}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
