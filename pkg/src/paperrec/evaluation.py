"""Ranking metrics over graded recommendation lists.

The survey input is a CSV with header
``source_id,target_id,method,system_score,user_grade`` where ``method`` is one
of ``ccb``, ``cb`` or ``both`` and grades run 1 (not relevant) to 5.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

COLUMNS = ("source_id", "target_id", "method", "system_score", "user_grade")
METHODS = ("ccb", "cb", "both")
BUCKETS = ("ccb", "cb", "combined")
N_BINS = 10


class SurveyFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GradedRecommendation:
    source: str
    target: str
    method: str
    system_score: float
    user_grade: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.user_grade not in (1, 2, 3, 4, 5):
            raise ValueError(f"user_grade must be an integer 1-5, got {self.user_grade!r}")


def _grades(items: Sequence) -> list[int]:
    return [it.user_grade if isinstance(it, GradedRecommendation) else int(it) for it in items]


def precision_at_k(items: Sequence, threshold: int, k: int = 10) -> float | None:
    """Share of the top ``min(k, len)`` items graded at least ``threshold``.

    ``items`` are in system rank order (graded recommendations or bare
    grades). Returns None for an empty list so callers can skip it.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    grades = _grades(items)[:k]
    if not grades:
        return None
    return sum(g >= threshold for g in grades) / len(grades)


def dcg(grades: Sequence[int]) -> float:
    return sum((2.0 ** g - 1.0) / math.log2(rank + 1) for rank, g in enumerate(grades, start=1))


def ndcg(items: Sequence) -> float | None:
    """Exponential-gain nDCG of a list in system rank order; None when empty."""
    grades = _grades(items)
    if not grades:
        return None
    ideal = dcg(sorted(grades, reverse=True))
    return dcg(grades) / ideal


def load_survey(path: str | Path) -> list[GradedRecommendation]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SurveyFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise SurveyFormatError(f"{path}:1: missing columns {missing}")
        pos = {c: header.index(c) for c in COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise SurveyFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                score = float(row[pos["system_score"]])
                grade_f = float(row[pos["user_grade"]])
                if grade_f != int(grade_f):
                    raise ValueError(f"non-integer grade {row[pos['user_grade']]!r}")
                rows.append(GradedRecommendation(
                    row[pos["source_id"]].strip(),
                    row[pos["target_id"]].strip(),
                    row[pos["method"]].strip().lower(),
                    score,
                    int(grade_f),
                ))
            except ValueError as exc:
                raise SurveyFormatError(f"{path}:{lineno}: {exc}") from None
    return rows


def adapt_survey_rows(
    rows: Iterable[Mapping[str, str]],
    column_map: Mapping[str, str],
    method_map: Mapping[str, str] | None = None,
) -> list[dict[str, str]]:
    """Rename columns of an external survey export into the canonical schema.

    ``column_map`` maps each canonical column to the source column holding it;
    ``method_map`` translates the source's method labels (e.g. ``{"CoCitation":
    "ccb", "Embedding": "cb"}``).
    """
    missing = [c for c in COLUMNS if c not in column_map]
    if missing:
        raise ValueError(f"column_map lacks {missing}")
    method_map = {k.lower(): v for k, v in (method_map or {}).items()}
    out = []
    for row in rows:
        rec = {c: str(row[column_map[c]]).strip() for c in COLUMNS}
        rec["method"] = method_map.get(rec["method"].lower(), rec["method"].lower())
        out.append(rec)
    return out


def write_survey_csv(rows: Iterable[Mapping[str, str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


def score_bin(score: float) -> int:
    # round first so that e.g. 0.7 lands in [0.7, 0.8) despite 0.7 * 10 < 7 issues
    return min(int(math.floor(round(score * N_BINS, 9))), N_BINS - 1) if score > 0 else 0


@dataclass
class EvalReport:
    precision3: dict[str, float]
    precision4: dict[str, float]
    ndcg: dict[str, float]
    groups: dict[str, int]
    pairs: dict[str, int]
    histogram: np.ndarray = field(repr=False)
    aggregation: str = "macro"

    def as_lines(self) -> list[str]:
        lines = [f"aggregation={self.aggregation}"]
        for b in BUCKETS:
            lines += [
                f"{b}.pairs={self.pairs[b]}",
                f"{b}.groups={self.groups[b]}",
                f"{b}.p@10-3={self.precision3[b]:.4f}",
                f"{b}.p@10-4={self.precision4[b]:.4f}",
                f"{b}.ndcg={self.ndcg[b]:.4f}",
            ]
        return lines

    def histogram_rows(self) -> list[tuple[int, float, int]]:
        return [
            (g + 1, round(b / N_BINS, 1), int(self.histogram[g, b]))
            for g in range(5)
            for b in range(N_BINS)
        ]

    def write_histogram_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["grade", "bin_low", "count"])
            for grade, low, count in self.histogram_rows():
                w.writerow([grade, f"{low:.1f}", count])


def _buckets_of(method: str) -> tuple[str, ...]:
    if method == "both":
        return ("ccb", "cb", "combined")
    return (method, "combined")


def evaluate_survey(
    data: str | Path | Sequence[GradedRecommendation],
    per_source_k: int = 10,
    aggregation: str = "macro",
) -> EvalReport:
    """P@k at grade thresholds 3 and 4 plus nDCG for CcB, CB and combined lists.

    Pairs are grouped by (source, bucket) and ranked by system score. A pair
    recommended by both methods joins the CcB and the CB list, and appears
    once in the combined list. ``macro`` averages per-list metrics over lists;
    ``micro`` pools the top-k items of every list for precision and weights
    nDCG by list length.
    """
    if aggregation not in ("macro", "micro"):
        raise ValueError("aggregation must be 'macro' or 'micro'")
    items = load_survey(data) if isinstance(data, (str, Path)) else list(data)

    groups: dict[tuple[str, str], list[GradedRecommendation]] = defaultdict(list)
    hist = np.zeros((5, N_BINS), dtype=np.int64)
    for it in items:
        for b in _buckets_of(it.method):
            groups[(b, it.source)].append(it)
        hist[it.user_grade - 1, score_bin(it.system_score)] += 1

    p3: dict[str, list] = {b: [] for b in BUCKETS}
    p4: dict[str, list] = {b: [] for b in BUCKETS}
    nd: dict[str, list] = {b: [] for b in BUCKETS}
    for (bucket, _), lst in sorted(groups.items()):
        ranked = sorted(lst, key=lambda it: (-it.system_score, it.target))
        top = ranked[:per_source_k]
        p3[bucket].append((precision_at_k(ranked, 3, per_source_k), len(top)))
        p4[bucket].append((precision_at_k(ranked, 4, per_source_k), len(top)))
        nd[bucket].append((ndcg(ranked), len(ranked)))

    def agg(vals):
        vals = [(v, w) for v, w in vals if v is not None]
        if not vals:
            return float("nan")
        if aggregation == "macro":
            return float(np.mean([v for v, _ in vals]))
        return float(sum(v * w for v, w in vals) / sum(w for _, w in vals))

    pairs = {b: sum(len(l) for (bb, _), l in groups.items() if bb == b) for b in BUCKETS}
    n_groups = {b: sum(1 for (bb, _) in groups if bb == b) for b in BUCKETS}
    return EvalReport(
        {b: agg(p3[b]) for b in BUCKETS},
        {b: agg(p4[b]) for b in BUCKETS},
        {b: agg(nd[b]) for b in BUCKETS},
        n_groups,
        pairs,
        hist,
        aggregation,
    )
