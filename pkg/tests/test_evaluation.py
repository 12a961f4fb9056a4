import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paperrec.evaluation import (
    COLUMNS,
    GradedRecommendation,
    SurveyFormatError,
    adapt_survey_rows,
    evaluate_survey,
    load_survey,
    ndcg,
    precision_at_k,
    score_bin,
    write_survey_csv,
)


def test_precision_examples():
    assert precision_at_k([5] * 10, 3) == 1.0
    assert precision_at_k([5, 4, 3, 2, 1], 3, 10) == pytest.approx(0.6)
    assert precision_at_k([2, 2], 4) == 0.0
    assert precision_at_k([], 3) is None
    assert precision_at_k([5] * 5 + [1] * 10, 3, 10) == 0.5
    with pytest.raises(ValueError):
        precision_at_k([5], 3, 0)


def test_ndcg_examples():
    assert ndcg([5, 4, 4, 2, 1]) == pytest.approx(1.0)
    assert ndcg([3]) == 1.0
    assert ndcg([]) is None
    # hand evaluation: DCG = 1/log2(2) + 31/log2(3), ideal = 31/log2(2) + 1/log2(3)
    expected = (1 + 31 / math.log2(3)) / (31 + 1 / math.log2(3))
    assert ndcg([1, 5]) == pytest.approx(expected, abs=1e-12)
    assert ndcg([1, 5]) == pytest.approx(0.6500, abs=5e-4)


@given(st.lists(st.integers(1, 5), min_size=1, max_size=12), st.integers(1, 12))
def test_metric_properties(grades, k):
    ps = [precision_at_k(grades, t, k) for t in range(1, 6)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    value = ndcg(grades)
    assert 0 < value <= 1 + 1e-12
    non_increasing = all(a >= b for a, b in zip(grades, grades[1:]))
    assert (abs(value - 1) < 1e-12) == non_increasing


def test_ndcg_depends_only_on_grade_sequence(hand_survey):
    # reordering equal-grade items among themselves cannot change the metric
    renamed = [GradedRecommendation(h.source, h.target + "x", h.method, h.system_score, h.user_grade) for h in hand_survey]
    assert evaluate_survey(renamed).ndcg == evaluate_survey(hand_survey).ndcg
    assert ndcg([3, 5, 3, 1, 5]) != ndcg([5, 5, 3, 1, 3])


def test_graded_recommendation_validation():
    with pytest.raises(ValueError):
        GradedRecommendation("s", "t", "cb", 0.5, 6)
    with pytest.raises(ValueError):
        GradedRecommendation("s", "t", "other", 0.5, 3)


def write_csv(path, rows, header=COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def test_load_survey_errors(tmp_path):
    good = ["s", "t", "cb", "0.5", "3"]
    with pytest.raises(SurveyFormatError, match=":3:"):
        load_survey(write_csv(tmp_path / "a.csv", [good, ["s", "t", "cb", "0.5", "7"]]))
    with pytest.raises(SurveyFormatError, match=":2:"):
        load_survey(write_csv(tmp_path / "b.csv", [["s", "t", "cb", "abc", "3"]]))
    with pytest.raises(SurveyFormatError, match="missing columns"):
        load_survey(write_csv(tmp_path / "c.csv", [good], header=COLUMNS[:4]))
    with pytest.raises(SurveyFormatError, match=":2:"):
        load_survey(write_csv(tmp_path / "d.csv", [["s", "t", "cb"]]))


def test_single_pair_dataset(tmp_path):
    report = evaluate_survey(write_csv(tmp_path / "one.csv", [["s", "t", "ccb", "0.7", "4"]]))
    assert report.ndcg["ccb"] == 1.0
    assert report.precision3["ccb"] == 1.0
    assert report.precision4["ccb"] == 1.0
    report = evaluate_survey(write_csv(tmp_path / "two.csv", [["s", "t", "cb", "0.7", "2"]]))
    assert report.precision3["cb"] == 0.0
    assert report.ndcg["combined"] == 1.0


@pytest.fixture
def hand_survey():
    # source s1: CcB list graded [5, 3, 1] by system rank, CB list [2, 4]
    # source s2: CcB list [4], CB list [1, 1, 5]; one pair found by both methods
    return [
        GradedRecommendation("s1", "a", "ccb", 0.95, 5),
        GradedRecommendation("s1", "b", "ccb", 0.90, 3),
        GradedRecommendation("s1", "c", "ccb", 0.60, 1),
        GradedRecommendation("s1", "d", "cb", 0.80, 2),
        GradedRecommendation("s1", "e", "cb", 0.70, 4),
        GradedRecommendation("s2", "f", "both", 0.99, 4),
        GradedRecommendation("s2", "g", "cb", 0.85, 1),
        GradedRecommendation("s2", "h", "cb", 0.75, 1),
        GradedRecommendation("s2", "i", "cb", 0.65, 5),
    ]


def g(gr):
    return sum((2 ** x - 1) / math.log2(r + 2) for r, x in enumerate(gr))


def test_hand_computed_report(hand_survey):
    report = evaluate_survey(hand_survey)
    # lists per bucket, in system-score order
    ccb = [[5, 3, 1], [4]]
    cb = [[2, 4], [4, 1, 1, 5]]
    comb = [[5, 3, 2, 4, 1], [4, 1, 1, 5]]

    def p(lists, t):
        return np.mean([sum(x >= t for x in l[:10]) / min(10, len(l)) for l in lists])

    def n(lists):
        return np.mean([g(l) / g(sorted(l, reverse=True)) for l in lists])

    for bucket, lists in (("ccb", ccb), ("cb", cb), ("combined", comb)):
        assert report.precision3[bucket] == pytest.approx(p(lists, 3), abs=1e-12)
        assert report.precision4[bucket] == pytest.approx(p(lists, 4), abs=1e-12)
        assert report.ndcg[bucket] == pytest.approx(n(lists), abs=1e-12)
    assert report.precision3["ccb"] == pytest.approx((2 / 3 + 1) / 2)
    assert report.pairs == {"ccb": 4, "cb": 6, "combined": 9}


def test_micro_aggregation(hand_survey):
    report = evaluate_survey(hand_survey, aggregation="micro")
    # pooled top-10 items: ccb has 4 items with 3 graded >= 3
    assert report.precision3["ccb"] == pytest.approx(3 / 4)
    assert report.precision4["cb"] == pytest.approx(3 / 6)


def test_histogram(hand_survey, tmp_path):
    report = evaluate_survey(hand_survey)
    per_grade = np.bincount([h.user_grade for h in hand_survey], minlength=6)[1:]
    np.testing.assert_array_equal(report.histogram.sum(axis=1), per_grade)
    assert report.histogram[4, 9] == 1  # grade 5 at 0.95
    assert report.histogram[0, 6] == 1  # grade 1 at 0.60
    report.write_histogram_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "grade,bin_low,count"
    assert len(lines) == 51
    assert "5,0.9,1" in lines


@pytest.mark.parametrize("score, expected", [(0.0, 0), (0.05, 0), (0.1, 1), (0.3, 3), (0.7, 7), (0.6999, 6), (1.0, 9)])
def test_score_bins(score, expected):
    assert score_bin(score) == expected


def test_adapter_roundtrip(tmp_path, hand_survey):
    native = [
        {"Paper": h.source, "Recommended": h.target, "Algo": {"ccb": "CoCitation", "cb": "Embedding", "both": "Both"}[h.method],
         "Similarity": str(h.system_score), "Rating": str(h.user_grade)}
        for h in hand_survey
    ]
    mapping = {"source_id": "Paper", "target_id": "Recommended", "method": "Algo",
               "system_score": "Similarity", "user_grade": "Rating"}
    rows = adapt_survey_rows(native, mapping, {"CoCitation": "ccb", "Embedding": "cb", "Both": "both"})
    write_survey_csv(rows, tmp_path / "canon.csv")
    assert load_survey(tmp_path / "canon.csv") == hand_survey
    with pytest.raises(ValueError):
        adapt_survey_rows(native, {"source_id": "Paper"})
