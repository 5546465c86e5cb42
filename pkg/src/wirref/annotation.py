"""Referent classes, annotation stores and inter-annotator agreement statistics."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)


class RefClass(Enum):
    """The nine collective identities a 1PL pronoun can refer to.

    The definition order is canonical and used for deterministic tie-breaking.
    """

    BOARD = 0
    COUNTRY = 1
    GENERIC = 2
    GOVERN = 3
    PARL = 4
    PARTY = 5
    PEOPLE = 6
    SPECPERS = 7
    UNION = 8

    @classmethod
    def from_string(cls, name: str) -> "RefClass":
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown referent class {name!r}; expected one of {[c.name for c in cls]}")


N_CLASSES = len(RefClass)
CLASS_ORDER = tuple(RefClass)


@dataclass(frozen=True)
class AnnotationRecord:
    instance_id: str
    annotator_id: str
    label: RefClass


@dataclass(frozen=True)
class GoldLabel:
    instance_id: str
    label: RefClass
    provenance: str  # "agreed" | "resolved" | "single"


@dataclass
class AgreementReport:
    alpha: float
    percent_agreement: float
    per_class_f1: dict  # RefClass -> float
    micro_f1: float
    confusion: np.ndarray  # rows: annotator b, columns: annotator a
    support: dict  # RefClass -> count in the adjudicated gold


def _units(records: Iterable[AnnotationRecord]) -> dict:
    """Group labels by instance, rejecting duplicate (instance, annotator) pairs."""
    seen = {}
    units = defaultdict(list)
    for rec in records:
        key = (rec.instance_id, rec.annotator_id)
        if key in seen:
            if seen[key] != rec.label:
                raise ValueError(f"conflicting labels for {key}: {seen[key].name} vs {rec.label.name}")
            continue
        seen[key] = rec.label
        units[rec.instance_id].append(rec.label)
    return units


def krippendorff_alpha(records: Iterable[AnnotationRecord]) -> float:
    """Nominal Krippendorff's alpha over all pairable values.

    Uses the coincidence-matrix formulation: each unit with m>=2 values
    contributes every ordered value pair at weight 1/(m-1).
    """
    units = {k: v for k, v in _units(records).items() if len(v) >= 2}
    if not units:
        raise ValueError("insufficient data: no instance has two or more annotations")

    coincidence = defaultdict(float)
    totals = defaultdict(float)
    for values in units.values():
        w = 1.0 / (len(values) - 1)
        for i, a in enumerate(values):
            totals[a] += 1.0
            for j, b in enumerate(values):
                if i != j:
                    coincidence[(a, b)] += w

    n = sum(totals.values())
    d_observed = sum(v for (a, b), v in coincidence.items() if a != b) / n
    d_expected = sum(
        totals[a] * totals[b] for a in totals for b in totals if a != b
    ) / (n * (n - 1))
    if d_expected == 0.0:
        log.warning("only one class used by all annotators; alpha defined as 1.0")
        return 1.0
    return 1.0 - d_observed / d_expected


def percent_agreement(records: Iterable[AnnotationRecord]) -> float:
    """Fraction of multiply-annotated instances whose labels all coincide."""
    units = {k: v for k, v in _units(records).items() if len(v) >= 2}
    if not units:
        raise ValueError("insufficient data: no instance has two or more annotations")
    agreeing = sum(1 for values in units.values() if len(set(values)) == 1)
    return agreeing / len(units)


def _shared_labels(
    records: Iterable[AnnotationRecord], annotator_a: str, annotator_b: str
) -> list:
    by_annotator = defaultdict(dict)
    for rec in records:
        by_annotator[rec.annotator_id][rec.instance_id] = rec.label
    labels_a = by_annotator[annotator_a]
    labels_b = by_annotator[annotator_b]
    shared = sorted(set(labels_a) & set(labels_b))
    return [(labels_a[i], labels_b[i]) for i in shared]


def pairwise_f1(
    records: Iterable[AnnotationRecord], annotator_a: str, annotator_b: str
) -> tuple[dict, float]:
    """Per-class F1 over the shared instances, annotator_a as reference; plus micro-F1."""
    pairs = _shared_labels(records, annotator_a, annotator_b)
    per_class = {}
    total_tp = total_fp = total_fn = 0
    for cls in RefClass:
        tp = sum(1 for a, b in pairs if a == cls and b == cls)
        fp = sum(1 for a, b in pairs if a != cls and b == cls)
        fn = sum(1 for a, b in pairs if a == cls and b != cls)
        denom = 2 * tp + fp + fn
        per_class[cls] = (2.0 * tp / denom) if denom else 0.0
        total_tp += tp
        total_fp += fp
        total_fn += fn
    micro_denom = 2 * total_tp + total_fp + total_fn
    micro = (2.0 * total_tp / micro_denom) if micro_denom else 0.0
    return per_class, micro


def confusion(
    records: Iterable[AnnotationRecord], annotator_a: str, annotator_b: str
) -> np.ndarray:
    """9x9 count matrix; cell (i, j) counts instances b labeled class_i and a class_j."""
    pairs = _shared_labels(records, annotator_a, annotator_b)
    matrix = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    for a, b in pairs:
        matrix[b.value, a.value] += 1
    return matrix


def adjudicate(
    records_a: Iterable[AnnotationRecord],
    records_b: Iterable[AnnotationRecord],
    resolutions: dict,
) -> list[GoldLabel]:
    """Merge two annotation runs into a gold store.

    Agreeing instances keep the shared label; disagreeing ones require an entry
    in `resolutions`; instances labeled by only one side pass through as "single".
    """
    a = {rec.instance_id: rec.label for rec in records_a}
    b = {rec.instance_id: rec.label for rec in records_b}
    gold = []
    missing = []
    for instance_id in sorted(set(a) | set(b)):
        in_a, in_b = instance_id in a, instance_id in b
        if in_a and in_b:
            if a[instance_id] == b[instance_id]:
                gold.append(GoldLabel(instance_id, a[instance_id], "agreed"))
            elif instance_id in resolutions:
                gold.append(GoldLabel(instance_id, resolutions[instance_id], "resolved"))
            else:
                missing.append(instance_id)
        else:
            gold.append(GoldLabel(instance_id, a[instance_id] if in_a else b[instance_id], "single"))
    if missing:
        raise ValueError(f"missing resolutions for disagreeing instances: {missing}")
    return gold


def agreement_report(
    records: Iterable[AnnotationRecord],
    annotator_a: str,
    annotator_b: str,
    gold: Iterable[GoldLabel],
) -> AgreementReport:
    records = list(records)
    per_class, micro = pairwise_f1(records, annotator_a, annotator_b)
    support = Counter(g.label for g in gold)
    return AgreementReport(
        alpha=krippendorff_alpha(records),
        percent_agreement=percent_agreement(records),
        per_class_f1=per_class,
        micro_f1=micro,
        confusion=confusion(records, annotator_a, annotator_b),
        support={cls: support.get(cls, 0) for cls in RefClass},
    )


def format_agreement_report(report: AgreementReport) -> str:
    lines = [
        f"Krippendorff's alpha: {report.alpha:.4f}",
        f"Percent agreement:    {report.percent_agreement:.4f}",
        "",
        f"{'Class':<10}{'F1':>8}{'Support':>10}",
    ]
    for cls in RefClass:
        lines.append(f"{cls.name:<10}{100 * report.per_class_f1[cls]:>8.1f}{report.support[cls]:>10}")
    lines.append(f"{'Total':<10}{100 * report.micro_f1:>8.1f}{sum(report.support.values()):>10}")
    lines.append("")
    lines.append("Confusion (rows: annotator B, columns: annotator A)")
    header = " " * 10 + "".join(f"{cls.name[:7]:>9}" for cls in RefClass)
    lines.append(header)
    for cls in RefClass:
        row = report.confusion[cls.value]
        lines.append(f"{cls.name:<10}" + "".join(f"{int(v):>9}" for v in row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# file formats

def read_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Annotation JSONL: {instance_id, annotator, label}."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            records.append(
                AnnotationRecord(obj["instance_id"], obj["annotator"], RefClass.from_string(obj["label"]))
            )
    return records


def write_annotations(records: Iterable[AnnotationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {"instance_id": rec.instance_id, "annotator": rec.annotator_id, "label": rec.label.name},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_gold(path: str | Path) -> list[GoldLabel]:
    """Gold JSONL: {instance_id, label, provenance}."""
    gold = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            gold.append(
                GoldLabel(obj["instance_id"], RefClass.from_string(obj["label"]), obj.get("provenance", "agreed"))
            )
    return gold


def write_gold(gold: Iterable[GoldLabel], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in gold:
            fh.write(
                json.dumps(
                    {"instance_id": g.instance_id, "label": g.label.name, "provenance": g.provenance},
                    ensure_ascii=False,
                )
                + "\n"
            )


def gold_as_dict(gold: Iterable[GoldLabel]) -> dict:
    return {g.instance_id: g.label for g in gold}
