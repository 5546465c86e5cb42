"""Walkthrough: from a parsed debate corpus to 1PL pronoun instances.

Reads the bundled fixture debates (CoNLL-U with speech metadata), extracts
every first-person-plural pronoun, and shows context windows, sentence-pair
splits and per-party frequency statistics.
"""

from pathlib import Path

from wirref.corpus import (
    context_window,
    corpus_stats,
    extract_instances,
    format_stats_table,
    index_segments,
    ingest,
    resolve_instance,
    split_pair,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

segments = ingest(FIXTURES / "fixture_debates.conllu", "conllu")
print(f"ingested {len(segments)} segments from {len({s.doc_id for s in segments})} documents\n")

instances = extract_instances(segments)
print(f"extracted {len(instances)} pronoun instances; the first five:")
segindex = index_segments(segments)
for inst in instances[:5]:
    seg, flat = resolve_instance(inst.instance_id, segindex)
    left, right = context_window(seg, flat, width=4)
    window = " ".join(t.form for t in left) + f" [{inst.form}] " + " ".join(t.form for t in right)
    print(f"  {inst.instance_id:<22} {window.strip()}")

print("\nsentence-pair split of the first instance (left context | pronoun + right):")
seg, flat = resolve_instance(instances[0].instance_id, segindex)
s1, s2 = split_pair(seg, flat)
print(f"  S1: {s1!r}")
print(f"  S2: {s2!r}")

print("\n1PL pronouns per 1000 tokens by party:")
print(format_stats_table(corpus_stats(segments, instances, group_by="party")))
