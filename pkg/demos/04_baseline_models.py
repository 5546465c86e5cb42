"""Walkthrough: the three baselines under 5-fold cross-validation.

Fits the word-form majority baseline, the rule-based system with label-model
tie-breaking, and the linear max-margin classifier on tf-idf context features,
then compares pooled cross-validation accuracy (T1: gold only; T2 adds
downsampled silver labels).
"""

from importlib import resources
from pathlib import Path

from wirref.annotation import gold_as_dict, read_gold
from wirref.corpus import ingest, index_segments, instance_from_id
from wirref.depmatch import load_patterns
from wirref.evaluate import CVPlan, cross_validate, format_report
from wirref.features import FeatureConfig
from wirref.models import LinearHyper, fit_majority, format_majority_table
from wirref.weaksup import build_matrix, downsample, fit_label_model, predict_silver

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

segments = ingest(FIXTURES / "fixture_debates.conllu", "conllu")
gold = gold_as_dict(read_gold(FIXTURES / "fixture_gold.jsonl"))
segindex = index_segments(segments)
print(f"{len(gold)} gold-labeled instances\n")

print("word-form majority baseline (decision table):")
items = [(instance_from_id(i, segindex).form, label) for i, label in sorted(gold.items())]
print(format_majority_table(fit_majority(items)))

patterns = load_patterns(str(resources.files("wirref.data").joinpath("patterns_v1.yaml")))
test_docs = {l.strip() for l in (FIXTURES / "test_docs.txt").read_text().splitlines() if l.strip()}
pool = [s for s in segments if s.doc_id not in test_docs]
matrix = build_matrix(patterns, pool, test_doc_ids=sorted(test_docs))
params = fit_label_model(matrix)
silver = downsample(predict_silver(matrix, params), cap=300, seed=42)

plan = CVPlan(k=5, seed=42)
config = FeatureConfig()
runs = [
    ("majority (B1)", "majority", {}),
    ("rule-based (B2)", "rule", {"patterns": patterns, "label_params": params}),
    ("linear T1 (B3)", "linear", {"feature_config": config, "hyper": LinearHyper()}),
    ("linear T2 (B3 + silver)", "linear",
     {"feature_config": config, "hyper": LinearHyper(), "regime": "T2", "silver": silver}),
]
print("\n5-fold cross-validation (pooled predictions):")
for name, spec, kwargs in runs:
    report, _, _ = cross_validate(spec, gold, plan, segments, **kwargs)
    print(f"\n=== {name}: accuracy {100 * report.accuracy:.1f}% ===")
    print(format_report(report))
