"""Reading the exporter's file formats and encoding sentence pairs as tensors.

The harness touches nothing but exported files: pair JSONL
({instance_id, s1, s2, label?}), fold JSONL ({instance_id, fold}) and silver
JSONL ({instance_id, hard_label, ...}); predictions go back out as
{instance_id, label} JSONL.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import torch

LABELS = ("BOARD", "COUNTRY", "GENERIC", "GOVERN", "PARL", "PARTY", "PEOPLE",
          "SPECPERS", "UNION")
LABEL_INDEX = {name: i for i, name in enumerate(LABELS)}

PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"

ONE_PL = {
    "wir", "uns", "unser", "unsre", "unsere", "unserem", "unseren", "unserer",
    "unseres", "unsrem", "unsren", "unsrer", "unsres",
}


@dataclass(frozen=True)
class PairExample:
    instance_id: str
    s1: str
    s2: str
    label: str | None = None

    def label_index(self) -> int:
        if self.label is None:
            raise ValueError(f"{self.instance_id} carries no label")
        return LABEL_INDEX[self.label]


def read_pairs(path: str | Path, require_labels: bool = False) -> list[PairExample]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            label = obj.get("label")
            if label is not None and label not in LABEL_INDEX:
                raise ValueError(f"{path}:{line_no}: unknown label {label!r}")
            if require_labels and label is None:
                raise ValueError(f"{path}:{line_no}: pair {obj['instance_id']!r} has no label")
            s2 = obj["s2"]
            first = s2.split(" ", 1)[0] if s2 else ""
            if first.casefold() not in ONE_PL:
                raise ValueError(
                    f"{path}:{line_no}: s2 must start with a 1PL form, got {first!r}")
            pairs.append(PairExample(obj["instance_id"], obj.get("s1", ""), s2, label))
    return pairs


def read_folds(path: str | Path) -> dict:
    folds = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            folds[obj["instance_id"]] = int(obj["fold"])
    return folds


def pairs_from_silver(silver_path: str | Path, pairs_path: str | Path) -> list[PairExample]:
    """Join silver hard labels onto an unlabeled pair export by instance_id."""
    labels = {}
    with open(silver_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            labels[obj["instance_id"]] = obj["hard_label"]
    joined = []
    for pair in read_pairs(pairs_path):
        if pair.instance_id in labels:
            joined.append(PairExample(pair.instance_id, pair.s1, pair.s2,
                                      labels[pair.instance_id]))
    return joined


def write_predictions(predictions: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instance_id in sorted(predictions):
            label = predictions[instance_id]
            fh.write(json.dumps({"instance_id": instance_id,
                                 "label": label if label else "NONE"}) + "\n")


class WordVocab:
    """Whitespace-token vocabulary with the usual special tokens."""

    def __init__(self, tokens: Iterable[str]):
        self.itos = [PAD, UNK, CLS, SEP] + sorted(set(tokens))
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def from_pairs(cls, pairs: Iterable[PairExample]) -> "WordVocab":
        tokens = []
        for pair in pairs:
            tokens.extend(pair.s1.split())
            tokens.extend(pair.s2.split())
        return cls(tokens)

    def lookup(self, token: str) -> int:
        return self.stoi.get(token, self.stoi[UNK])


def encode_pair(pair: PairExample, vocab: WordVocab, max_len: int):
    """[CLS] s1 [SEP] s2 [SEP] with token types 0/0/0/1/1."""
    s1 = pair.s1.split()
    s2 = pair.s2.split()
    ids = [vocab.lookup(CLS)] + [vocab.lookup(t) for t in s1] + [vocab.lookup(SEP)]
    types = [0] * len(ids)
    ids += [vocab.lookup(t) for t in s2] + [vocab.lookup(SEP)]
    types += [1] * (len(s2) + 1)
    ids, types = ids[:max_len], types[:max_len]
    return ids, types


def encode_batch(pairs: list, vocab: WordVocab, max_len: int, device="cpu"):
    encoded = [encode_pair(p, vocab, max_len) for p in pairs]
    width = max(len(ids) for ids, _ in encoded)
    input_ids = torch.zeros((len(pairs), width), dtype=torch.long, device=device)
    token_types = torch.zeros_like(input_ids)
    mask = torch.zeros((len(pairs), width), dtype=torch.bool, device=device)
    for row, (ids, types) in enumerate(encoded):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        token_types[row, : len(types)] = torch.tensor(types, dtype=torch.long)
        mask[row, len(ids):] = True  # padding positions
    return input_ids, token_types, mask
