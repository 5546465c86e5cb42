"""Walkthrough: referent-class profiles per speaker and the PCA biplot.

Builds per-speaker rates of each referent class (occurrences per 1000 tokens),
runs PCA on the profile matrix and writes a deterministic SVG biplot with
class loadings and speaker scores on PC1/PC2.
"""

from pathlib import Path

from wirref.analysis import build_profiles, emit_biplot, pca
from wirref.annotation import RefClass, gold_as_dict, read_gold
from wirref.corpus import ingest

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"
OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

segments = ingest(FIXTURES / "fixture_debates.conllu", "conllu")
gold = gold_as_dict(read_gold(FIXTURES / "fixture_gold.jsonl"))

profile = build_profiles(gold, segments, group_by="speaker")
print(f"profile matrix: {len(profile.groups)} speakers x {len(profile.classes)} classes\n")

header = f"{'speaker':<16}" + "".join(f"{cls.name[:6]:>8}" for cls in RefClass)
print(header)
for i, speaker in enumerate(profile.groups):
    cells = "".join(f"{profile.rates[i, cls.value]:>8.1f}" for cls in RefClass)
    print(f"{speaker:<16}{cells}")

result = pca(profile)
print("\nexplained variance by component:")
for j, ratio in enumerate(result.explained_variance_ratio[:4]):
    print(f"  PC{j + 1}: {100 * ratio:.1f}%")

print("\nclass loadings on PC1/PC2:")
for j, name in enumerate(result.column_names):
    print(f"  {name:<10} PC1 {result.loadings[0, j]:+.2f}   PC2 {result.loadings[1, j]:+.2f}")

biplot = OUT / "speaker_biplot.svg"
emit_biplot(result, profile.groups, biplot)
print(f"\nwrote {biplot}")
