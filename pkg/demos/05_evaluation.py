"""Scoring graded survey responses.

A handful of invented survey rows show how P@10 at two grade thresholds and
exponential-gain nDCG are computed per source and averaged per method.
"""

from paperrec.evaluation import GradedRecommendation, evaluate_survey

rows = [
    GradedRecommendation("s1", "a", "ccb", 0.95, 5),
    GradedRecommendation("s1", "b", "ccb", 0.90, 3),
    GradedRecommendation("s1", "c", "cb", 0.80, 2),
    GradedRecommendation("s1", "d", "cb", 0.70, 4),
    GradedRecommendation("s2", "e", "both", 0.99, 4),
    GradedRecommendation("s2", "f", "cb", 0.85, 1),
    GradedRecommendation("s2", "g", "cb", 0.65, 5),
]

for aggregation in ("macro", "micro"):
    print(f"[{aggregation}]")
    for line in evaluate_survey(rows, aggregation=aggregation).as_lines():
        print("  " + line)

report = evaluate_survey(rows)
print("\ngrade x score-bin histogram:")
for grade, row in enumerate(report.histogram, start=1):
    print(f"  {grade}: {' '.join(str(int(v)) for v in row)}")
