"""Toy pair-export generators shared by the harness tests.

The generated files follow the exporter's JSONL schemas exactly; every class
has its own lexical cues so a small encoder can learn the mapping.
"""

import json
import random
from pathlib import Path

import pytest

from wirref_finetune.data import LABELS

CUES = {
    "BOARD": ["ausschuss", "kabinett", "gremium"],
    "COUNTRY": ["land", "heimat", "grundgesetz"],
    "GENERIC": ["alle", "überall", "bekanntlich"],
    "GOVERN": ["regierung", "schaffen", "investieren"],
    "PARL": ["parlament", "antrag", "debatte"],
    "PARTY": ["fraktion", "liberale", "fordern"],
    "PEOPLE": ["steuerzahler", "rentner", "pendler"],
    "SPECPERS": ["beide", "gemeinsam", "verhandeln"],
    "UNION": ["europa", "nato", "bündnis"],
}
FILLER = ["heute", "hier", "wichtig", "dafür", "deshalb", "gut", "klar", "jetzt"]
PRONOUNS = ["wir", "Wir", "uns", "unsere"]


def toy_pairs(n, seed, id_prefix="toy"):
    """n labeled pairs whose s2 carries the class cue words."""
    rng = random.Random(seed)
    rows = []
    for k in range(n):
        label = LABELS[k % len(LABELS)]
        cues = CUES[label]
        s1_words = rng.sample(FILLER, rng.randint(0, 3))
        s2_words = [rng.choice(PRONOUNS)]
        body = [rng.choice(cues), rng.choice(cues)] + rng.sample(FILLER, 2)
        rng.shuffle(body)
        s2_words += body
        rows.append({
            "instance_id": f"{id_prefix}:{k // 10}:{k % 10}",
            "s1": " ".join(s1_words),
            "s2": " ".join(s2_words),
            "label": label,
        })
    return rows


def write_jsonl(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def toy_export(tmp_path):
    """200-instance labeled export plus a matching 5-fold assignment."""
    rows = toy_pairs(200, seed=11)
    pairs_path = write_jsonl(rows, tmp_path / "pairs.jsonl")
    folds = [{"instance_id": row["instance_id"], "fold": k % 5}
             for k, row in enumerate(rows)]
    folds_path = write_jsonl(folds, tmp_path / "folds.jsonl")
    gold = [{"instance_id": r["instance_id"], "label": r["label"], "provenance": "agreed"}
            for r in rows]
    gold_path = write_jsonl(gold, tmp_path / "gold.jsonl")
    return pairs_path, folds_path, gold_path
