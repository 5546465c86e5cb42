"""Walkthrough: inter-annotator agreement and adjudication.

Two annotators labeled the same pronoun instances; we compute Krippendorff's
alpha, percentage agreement, per-class F1 and the confusion matrix, then merge
both runs into an adjudicated gold standard.
"""

from pathlib import Path

from wirref.annotation import (
    adjudicate,
    agreement_report,
    format_agreement_report,
    read_annotations,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

records_a = read_annotations(FIXTURES / "annotations_a.jsonl")
records_b = read_annotations(FIXTURES / "annotations_b.jsonl")
resolutions = {r.instance_id: r.label for r in read_annotations(FIXTURES / "resolutions.jsonl")}

disagreements = sum(
    1 for a, b in zip(records_a, records_b) if a.label != b.label
)
print(f"{len(records_a)} instances, {disagreements} disagreements\n")

gold = adjudicate(records_a, records_b, resolutions)
resolved = [g for g in gold if g.provenance == "resolved"]
print(f"adjudicated gold store: {len(gold)} labels, {len(resolved)} from resolution\n")

report = agreement_report(records_a + records_b, "A1", "A2", gold)
print(format_agreement_report(report))
