"""Corpus loading, validation and citation adjacency.

The corpus file is UTF-8 JSON lines, one paper per line::

    {"id": "p1", "title": "...", "keywords": [...], "abstract": "...",
     "references": ["p7", ...],
     "topics": [{"topic_id": "t3", "confidence": 0.93, "is_leaf": true}]}

Only ``id`` and ``title`` are required; unknown fields are ignored.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

_WS = re.compile(r"\s")


class CorpusError(ValueError):
    """Raised for unreadable or invalid corpus input."""


@dataclass(frozen=True)
class Topic:
    topic_id: str
    confidence: float
    is_leaf: bool


@dataclass(frozen=True)
class PaperRecord:
    id: str
    title: str
    keywords: tuple[str, ...] = ()
    abstract: str = ""
    references: tuple[str, ...] = ()
    topics: tuple[Topic, ...] = ()

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "keywords": list(self.keywords),
            "abstract": self.abstract,
            "references": list(self.references),
            "topics": [
                {"topic_id": t.topic_id, "confidence": t.confidence, "is_leaf": t.is_leaf}
                for t in self.topics
            ],
        }


def _check_id(value, what: str) -> str:
    if not isinstance(value, str):
        raise CorpusError(f"{what} must be a string, got {type(value).__name__}")
    value = value.strip()
    if not value or _WS.search(value):
        raise CorpusError(f"{what} must be non-empty without whitespace: {value!r}")
    return value


def make_record(obj: Mapping) -> PaperRecord:
    """Validate and clean one decoded JSON object.

    Strings are trimmed, references deduplicated (first occurrence wins) and
    self-references removed.
    """
    if not isinstance(obj, Mapping):
        raise CorpusError("record must be a JSON object")
    pid = _check_id(obj.get("id"), "id")

    title = obj.get("title")
    if not isinstance(title, str) or not title.strip():
        raise CorpusError(f"paper {pid!r}: missing or empty title")

    keywords = obj.get("keywords") or []
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise CorpusError(f"paper {pid!r}: keywords must be a list of strings")
    keywords = tuple(k.strip() for k in keywords if k.strip())

    abstract = obj.get("abstract") or ""
    if not isinstance(abstract, str):
        raise CorpusError(f"paper {pid!r}: abstract must be a string")

    refs_in = obj.get("references") or []
    if not isinstance(refs_in, list):
        raise CorpusError(f"paper {pid!r}: references must be a list")
    seen = set()
    refs = []
    for r in refs_in:
        r = _check_id(r, f"paper {pid!r}: reference")
        if r == pid or r in seen:
            continue
        seen.add(r)
        refs.append(r)

    topics = []
    for t in obj.get("topics") or []:
        if not isinstance(t, Mapping) or "topic_id" not in t:
            raise CorpusError(f"paper {pid!r}: topic entries need a topic_id")
        conf = float(t.get("confidence", 0.0))
        if not 0.0 <= conf <= 1.0:
            raise CorpusError(f"paper {pid!r}: topic confidence {conf} outside [0, 1]")
        topics.append(Topic(str(t["topic_id"]), conf, bool(t.get("is_leaf", False))))

    return PaperRecord(pid, title.strip(), keywords, abstract.strip(), tuple(refs), tuple(topics))


class Corpus:
    """Immutable id-indexed collection of papers, ordered by id."""

    def __init__(self, records: Iterable[PaperRecord]):
        by_id: dict[str, PaperRecord] = {}
        for rec in records:
            if rec.id in by_id:
                raise CorpusError(f"duplicate id {rec.id!r}")
            by_id[rec.id] = rec
        self.ids: tuple[str, ...] = tuple(sorted(by_id))
        self._records = {pid: by_id[pid] for pid in self.ids}

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self._records.values())

    def __contains__(self, pid: str) -> bool:
        return pid in self._records

    def __getitem__(self, pid: str) -> PaperRecord:
        return self._records[pid]

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self._records == other._records

    def index_of(self, pid: str) -> int:
        i = bisect_left(self.ids, pid)
        if i == len(self.ids) or self.ids[i] != pid:
            raise KeyError(pid)
        return i


def parse_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from exc

    records = []
    first_line: dict[str, int] = {}
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            try:
                rec = make_record(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if rec.id in first_line:
                raise CorpusError(
                    f"{path}:{lineno}: duplicate id {rec.id!r} (first seen on line {first_line[rec.id]})"
                )
            first_line[rec.id] = lineno
            records.append(rec)
    return Corpus(records)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


@dataclass(frozen=True)
class CitationIndex:
    """Forward and inverted citation adjacency restricted to corpus ids.

    ``cites[i]`` lists the papers ``i`` references; ``cited_by[j]`` the papers
    referencing ``j``. Both are sorted by id and hold an entry for every paper.
    """

    cites: dict[str, tuple[str, ...]]
    cited_by: dict[str, tuple[str, ...]]
    dangling: int = 0

    def __contains__(self, pid: str) -> bool:
        return pid in self.cites

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.cites.values())


def build_citation_index(corpus: Corpus) -> CitationIndex:
    cites = {}
    cited_by: dict[str, list[str]] = {pid: [] for pid in corpus.ids}
    dangling = 0
    # corpus.ids is sorted, so appending citers in that order keeps cited_by sorted
    for pid in corpus.ids:
        out = []
        for ref in corpus[pid].references:
            if ref in cited_by:
                out.append(ref)
            else:
                dangling += 1
        out.sort()
        cites[pid] = tuple(out)
        for ref in out:
            cited_by[ref].append(pid)
    return CitationIndex(cites, {k: tuple(v) for k, v in cited_by.items()}, dangling)


@dataclass
class StatsReport:
    n: int
    with_references: float
    mean_references: float
    dangling: int
    with_cocitation: float | None = None
    extra: dict = field(default_factory=dict)

    def as_lines(self) -> list[str]:
        lines = [
            f"papers={self.n}",
            f"fraction_with_references={self.with_references:.6f}",
            f"mean_references={self.mean_references:.6f}",
            f"dangling_references={self.dangling}",
        ]
        if self.with_cocitation is not None:
            lines.append(f"fraction_with_cocitation={self.with_cocitation:.6f}")
        lines.extend(f"{k}={v}" for k, v in self.extra.items())
        return lines


def corpus_stats(corpus: Corpus, index: CitationIndex, with_cocitation: bool = False) -> StatsReport:
    """Coverage statistics for a corpus.

    ``mean_references`` averages in-corpus reference counts over papers that
    have at least one. The co-citation fraction is optional since it needs a
    pass over every citer's reference list.
    """
    n = corpus.n
    degrees = [len(index.cites[pid]) for pid in corpus.ids]
    referenced = [d for d in degrees if d > 0]
    frac = len(referenced) / n if n else 0.0
    mean = sum(referenced) / len(referenced) if referenced else 0.0

    cocited = None
    if with_cocitation:
        # a paper has a co-citation iff one of its citers also cites something else
        has = sum(
            1
            for pid in corpus.ids
            if any(len(index.cites[k]) > 1 for k in index.cited_by[pid])
        )
        cocited = has / n if n else 0.0
    return StatsReport(n, frac, mean, index.dangling, cocited)
