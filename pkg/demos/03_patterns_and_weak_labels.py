"""Walkthrough: dependency patterns as labeling functions and the label model.

Applies the shipped pattern inventory to the unlabeled part of the fixture
corpus, builds the vote matrix, fits the generative label model by EM, and
compares its probabilistic labels with plain majority voting.
"""

from importlib import resources
from pathlib import Path

from wirref.corpus import index_segments, ingest
from wirref.depmatch import format_hit_table, load_patterns, match_all
from wirref.weaksup import (
    build_matrix,
    fit_label_model,
    format_review_sheet,
    majority_vote,
    predict_silver,
    sample_for_review,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

patterns = load_patterns(str(resources.files("wirref.data").joinpath("patterns_v1.yaml")))
print(f"loaded {len(patterns)} patterns\n")

segments = ingest(FIXTURES / "fixture_debates.conllu", "conllu")
test_docs = {l.strip() for l in (FIXTURES / "test_docs.txt").read_text().splitlines() if l.strip()}
pool = [s for s in segments if s.doc_id not in test_docs]
print(f"unlabeled pool: {len(pool)} segments (test documents removed)\n")

table = match_all(patterns, pool)
fired = [p for p in patterns if table.counts[p.name] > 0]
print(format_hit_table(fired, table))

matrix = build_matrix(patterns, pool, test_doc_ids=sorted(test_docs))
print(f"\nlabel matrix: {len(matrix.instance_ids)} instances x {len(matrix.lf_names)} "
      f"labeling functions ({matrix.n_excluded} instances without any vote)\n")

params = fit_label_model(matrix)
print(f"EM converged in {len(params.log_likelihood_trace)} iterations; "
      f"log-likelihood {params.log_likelihood_trace[0]:.2f} -> {params.log_likelihood_trace[-1]:.2f}")

silver = predict_silver(matrix, params)
mv = majority_vote(matrix)
flips = [
    (s.instance_id, m.hard_label.name, s.hard_label.name)
    for s, m in zip(silver, mv)
    if s.hard_label != m.hard_label
]
print(f"label model and majority vote disagree on {len(flips)} of {len(silver)} instances")
for instance_id, mv_label, lm_label in flips:
    print(f"  {instance_id}: majority={mv_label} -> label model={lm_label}")

print("\nreview sample (3 per class):")
rows = sample_for_review(silver, index_segments(segments), n_per_class=3, seed=42, matrix=matrix)
print(format_review_sheet(rows))
