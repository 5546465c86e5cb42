"""Scoring, cross-validation and prediction-file evaluation shared by all models."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .annotation import CLASS_ORDER, N_CLASSES, RefClass
from .corpus import Segment, index_segments, instance_from_id
from .features import FeatureConfig, fit_vocabulary, transform_many
from .models import (
    LinearHyper,
    fit_linear,
    fit_majority,
    predict_linear_many,
    predict_majority,
    predict_rule_based,
)

log = logging.getLogger(__name__)

MODEL_SPECS = ("majority", "rule", "linear")
REGIMES = ("T1", "T2", "T3")

# test instrumentation: called as (fold, instance_id) whenever a gold label is
# read while that fold is held out
label_read_hook = None


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    accuracy: float
    per_class: dict  # RefClass -> ClassMetrics
    confusion: np.ndarray  # rows gold, columns predicted; None predictions excluded
    none_by_class: np.ndarray  # per gold class, count of None predictions
    n: int
    regime_note: str = ""


def score(gold: Mapping, predictions: Mapping) -> EvalReport:
    """Standard multiclass precision/recall/F1 and overall accuracy.

    `predictions` must cover every gold instance; None counts as wrong and
    stays out of the confusion matrix columns.
    """
    unknown = sorted(set(predictions) - set(gold))
    if unknown:
        raise ValueError(f"predictions for unknown instance ids: {unknown[:5]}")
    missing = sorted(set(gold) - set(predictions))
    if missing:
        raise ValueError(f"missing predictions for instance ids: {missing[:5]}")

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    none_by_class = np.zeros(N_CLASSES, dtype=int)
    correct = 0
    for instance_id, gold_label in gold.items():
        pred = predictions[instance_id]
        if pred is None:
            none_by_class[gold_label.value] += 1
            continue
        confusion[gold_label.value, pred.value] += 1
        if pred == gold_label:
            correct += 1

    n = len(gold)
    per_class = {}
    for cls in RefClass:
        tp = int(confusion[cls.value, cls.value])
        fp = int(confusion[:, cls.value].sum()) - tp
        fn = int(confusion[cls.value, :].sum()) - tp + int(none_by_class[cls.value])
        support = int(confusion[cls.value, :].sum() + none_by_class[cls.value])
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassMetrics(precision, recall, f1, support)
    return EvalReport(
        accuracy=correct / n if n else 0.0,
        per_class=per_class,
        confusion=confusion,
        none_by_class=none_by_class,
        n=n,
    )


def format_report(report: EvalReport) -> str:
    lines = [f"{'Class':<12}{'#Gold':>7}{'Prec':>7}{'Rec':>7}{'F1':>7}"]
    for cls in RefClass:
        m = report.per_class[cls]
        lines.append(
            f"{cls.name:<12}{m.support:>7}{100 * m.precision:>7.0f}{100 * m.recall:>7.0f}{100 * m.f1:>7.0f}"
        )
    lines.append(f"{'Total':<12}{report.n:>7}   Acc = {100 * report.accuracy:.1f}%")
    if report.regime_note:
        lines.append(f"({report.regime_note})")
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "n": report.n,
        "per_class": {
            cls.name: {
                "precision": report.per_class[cls].precision,
                "recall": report.per_class[cls].recall,
                "f1": report.per_class[cls].f1,
                "support": report.per_class[cls].support,
            }
            for cls in RefClass
        },
        "confusion": report.confusion.tolist(),
        "none_by_class": report.none_by_class.tolist(),
        "regime_note": report.regime_note,
    }


# ---------------------------------------------------------------------------
# folds

@dataclass
class CVPlan:
    k: int = 5
    seed: int = 42
    stratified: bool = True


def make_folds(gold: Mapping, plan: CVPlan) -> dict:
    """Deterministic fold assignment instance_id -> fold, stratified by label.

    Per class the shuffled members are dealt round-robin, with the starting
    fold rotating so overall fold sizes stay balanced.
    """
    if len(gold) < plan.k:
        raise ValueError(f"cannot split {len(gold)} instances into {plan.k} folds")
    rng = np.random.default_rng(plan.seed)
    assignment = {}
    if not plan.stratified:
        ids = sorted(gold)
        rng.shuffle(ids)
        for i, instance_id in enumerate(ids):
            assignment[instance_id] = i % plan.k
        return assignment
    assigned = 0
    for cls in RefClass:
        members = sorted(i for i, label in gold.items() if label is cls)
        if not members:
            continue
        if len(members) < plan.k:
            log.warning(
                "class %s has %d instances, fewer than %d folds; distributing round-robin",
                cls.name, len(members), plan.k,
            )
        members = list(members)
        rng.shuffle(members)
        for i, instance_id in enumerate(members):
            assignment[instance_id] = (assigned + i) % plan.k
        assigned += len(members)
    return assignment


def write_folds(assignment: Mapping, path: str | Path) -> None:
    """Fold JSONL: {instance_id, fold}, sorted by instance id."""
    with open(path, "w", encoding="utf-8") as fh:
        for instance_id in sorted(assignment):
            fh.write(json.dumps({"instance_id": instance_id, "fold": assignment[instance_id]}) + "\n")


def read_folds(path: str | Path) -> dict:
    assignment = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            assignment[obj["instance_id"]] = int(obj["fold"])
    return assignment


def write_predictions(predictions: Mapping, path: str | Path) -> None:
    """Predictions JSONL: {instance_id, label}; None serializes as "NONE"."""
    with open(path, "w", encoding="utf-8") as fh:
        for instance_id in sorted(predictions):
            label = predictions[instance_id]
            fh.write(
                json.dumps({"instance_id": instance_id, "label": label.name if label else "NONE"})
                + "\n"
            )


def read_predictions(path: str | Path) -> dict:
    predictions = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            label = obj["label"]
            predictions[obj["instance_id"]] = None if label == "NONE" else RefClass.from_string(label)
    return predictions


# ---------------------------------------------------------------------------
# cross-validation

def collect_predictions(
    model_spec: str,
    gold: Mapping,
    folds: Mapping,
    segments: Iterable[Segment],
    *,
    regime: str = "T1",
    silver: list | None = None,
    patterns: list | None = None,
    label_params=None,
    feature_config: FeatureConfig | None = None,
    hyper: LinearHyper | None = None,
) -> dict:
    """Train per fold and predict its held-out instances; no gold label of a
    test fold is read during that fold's training."""
    if model_spec not in MODEL_SPECS:
        raise ValueError(f"unknown model spec {model_spec!r}; expected one of {MODEL_SPECS}")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    segments = list(segments)
    segindex = index_segments(segments)
    silver = list(silver) if (silver and regime in ("T2", "T3")) else []
    if silver:
        overlap = sorted({s.instance_id for s in silver} & set(gold))
        if overlap:
            raise ValueError(f"silver instances overlap gold instance ids: {overlap[:5]}")

    missing = sorted(set(gold) - set(folds))
    if missing:
        raise ValueError(f"fold assignment missing gold instances: {missing[:5]}")
    predictions: dict = {}
    for fold in sorted(set(folds.values())):
        test_ids = sorted(i for i in gold if folds[i] == fold)
        train_ids = sorted(i for i in gold if folds[i] != fold)
        if not test_ids:
            continue

        def train_label(instance_id, _fold=fold):
            if label_read_hook is not None:
                label_read_hook(_fold, instance_id)
            return gold[instance_id]

        if model_spec == "majority":
            items = [(instance_from_id(i, segindex).form, train_label(i)) for i in train_ids]
            items += [(instance_from_id(s.instance_id, segindex).form, s.hard_label) for s in silver]
            model = fit_majority(items)
            for i in test_ids:
                predictions[i] = predict_majority(model, instance_from_id(i, segindex).form)
        elif model_spec == "rule":
            if patterns is None or label_params is None:
                raise ValueError("rule model needs compiled patterns and label model parameters")
            predictions.update(
                predict_rule_based(patterns, label_params, segments, test_ids)
            )
        else:  # linear
            config = feature_config or FeatureConfig()
            train_instances = [instance_from_id(i, segindex) for i in train_ids]
            labels = {i: train_label(i) for i in train_ids}
            for s in silver:
                train_instances.append(instance_from_id(s.instance_id, segindex))
                labels[s.instance_id] = s.hard_label
            vocab = fit_vocabulary(train_instances, labels, segindex, config)
            x_train = transform_many(train_instances, vocab, segindex)
            y_train = np.array([labels[inst.instance_id].value for inst in train_instances])
            model = fit_linear(x_train, y_train, hyper or LinearHyper())
            test_instances = [instance_from_id(i, segindex) for i in test_ids]
            x_test = transform_many(test_instances, vocab, segindex)
            for i, label in zip(test_ids, predict_linear_many(model, x_test)):
                predictions[i] = label
    return predictions


def cross_validate(
    model_spec: str,
    gold: Mapping,
    plan: CVPlan,
    segments: Iterable[Segment],
    **kwargs,
) -> tuple:
    """k-fold cross-validation with pooled scoring; returns (report, predictions, folds)."""
    folds = make_folds(gold, plan)
    predictions = collect_predictions(model_spec, gold, folds, segments, **kwargs)
    report = score(gold, predictions)
    regime = kwargs.get("regime", "T1")
    if regime == "T3":
        report.regime_note = "regime T3 equals T2 for non-encoder models"
    return report, predictions, folds
