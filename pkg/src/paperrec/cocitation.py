"""Co-citation counting and candidate lists.

Two papers are co-cited once for every third paper whose reference list
contains both. Counts are accumulated sparsely: for a source paper we walk its
citers and tally everything else each citer references.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .corpus import CitationIndex


@dataclass(frozen=True)
class CoCitationList:
    source: str
    entries: tuple[tuple[str, int], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict[str, int]:
        return dict(self.entries)


def _rank_key(item: tuple[str, int]):
    return (-item[1], item[0])


def cocitation_counts(index: CitationIndex, source: str) -> CoCitationList:
    if source not in index:
        raise KeyError(f"unknown paper id {source!r}")
    counts: Counter[str] = Counter()
    for citer in index.cited_by[source]:
        counts.update(index.cites[citer])
    counts.pop(source, None)
    return CoCitationList(source, tuple(sorted(counts.items(), key=_rank_key)))


def top_cocited(cc: CoCitationList, k: int) -> CoCitationList:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    # entries are already in (count desc, id asc) order
    return CoCitationList(cc.source, cc.entries[:k])


def all_cocitations(
    index: CitationIndex, sources: Iterable[str] | None = None, k: int | None = None
) -> Iterator[CoCitationList]:
    for pid in sorted(index.cites) if sources is None else sources:
        cc = cocitation_counts(index, pid)
        yield cc if k is None else top_cocited(cc, k)


def write_cocitation_tsv(lists: Iterable[CoCitationList], fh: TextIO) -> int:
    """Write ``source<TAB>other<TAB>count`` rows; returns the row count."""
    rows = 0
    for cc in lists:
        for other, count in cc.entries:
            fh.write(f"{cc.source}\t{other}\t{count}\n")
            rows += 1
    return rows
