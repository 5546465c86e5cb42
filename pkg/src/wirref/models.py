"""Baseline predictors: word-form majority, rule-based, and linear max-margin.

The linear classifier is one-vs-rest hinge loss trained with SGD on a
1/(lambda*(t+t0)) schedule; everything is seeded and deterministic.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .annotation import CLASS_ORDER, N_CLASSES, RefClass
from .corpus import Segment
from .depmatch import Pattern, match_all
from .weaksup import ABSTAIN, LabelMatrix, LabelModelParams, predict_silver


@dataclass
class MajorityModel:
    form_labels: dict  # surface form -> RefClass
    counts: dict  # surface form -> Counter over RefClass
    distinct_labels: dict  # surface form -> number of distinct labels seen
    global_majority: RefClass


def _plurality(counter: Counter, global_counter: Counter | None = None) -> RefClass:
    top = max(counter.values())
    tied = [cls for cls, c in counter.items() if c == top]
    if len(tied) > 1 and global_counter is not None:
        best_global = max(global_counter.get(cls, 0) for cls in tied)
        tied = [cls for cls in tied if global_counter.get(cls, 0) == best_global]
    return min(tied, key=lambda cls: cls.value)


def fit_majority(items: Iterable[tuple]) -> MajorityModel:
    """Fit the per-word-form majority baseline from (surface form, label) pairs."""
    per_form: dict = defaultdict(Counter)
    global_counter: Counter = Counter()
    for form, label in items:
        per_form[form][label] += 1
        global_counter[label] += 1
    if not global_counter:
        raise ValueError("empty training set")
    return MajorityModel(
        form_labels={form: _plurality(c, global_counter) for form, c in per_form.items()},
        counts=dict(per_form),
        distinct_labels={form: len(c) for form, c in per_form.items()},
        global_majority=_plurality(global_counter),
    )


def predict_majority(model: MajorityModel, form: str) -> RefClass:
    """Exact form, then lowercased form, then the global majority."""
    if form in model.form_labels:
        return model.form_labels[form]
    lowered = form.casefold()
    if lowered in model.form_labels:
        return model.form_labels[lowered]
    return model.global_majority


def format_majority_table(model: MajorityModel) -> str:
    """Word forms with their majority label, support fraction and distinct labels."""
    lines = [f"{'wform':<10}{'class':<10}{'support':>12}{'DL':>5}"]
    forms = sorted(model.counts, key=lambda f: (-sum(model.counts[f].values()), f))
    for form in forms:
        counter = model.counts[form]
        label = model.form_labels[form]
        lines.append(
            f"{form:<10}{label.name:<10}{f'({counter[label]}/{sum(counter.values())})':>12}"
            f"{model.distinct_labels[form]:>5}"
        )
    return "\n".join(lines)


def predict_rule_based(
    patterns: Iterable[Pattern],
    params: LabelModelParams,
    segments: Iterable[Segment],
    instance_ids: Iterable[str],
) -> dict:
    """Label every instance with at least one pattern hit; the rest get None.

    Conflicting hits are resolved through the generative model's posterior over
    the instance's votes.
    """
    patterns = list(patterns)
    instance_ids = list(instance_ids)
    table = match_all(patterns, segments)
    votes_by_instance: dict = defaultdict(dict)
    for j, pattern in enumerate(patterns):
        for m in table.matches[pattern.name]:
            votes_by_instance[m.instance_id][j] = pattern.label.value

    hit_ids = [i for i in instance_ids if i in votes_by_instance]
    predictions = {i: None for i in instance_ids}
    if hit_ids:
        votes = np.full((len(hit_ids), len(patterns)), ABSTAIN, dtype=np.int8)
        for row, instance_id in enumerate(hit_ids):
            for j, value in votes_by_instance[instance_id].items():
                votes[row, j] = value
        matrix = LabelMatrix(instance_ids=hit_ids, lf_names=[p.name for p in patterns], votes=votes)
        for silver in predict_silver(matrix, params):
            predictions[silver.instance_id] = silver.hard_label
    return predictions


@dataclass(frozen=True)
class LinearHyper:
    regularization: float = 1e-4
    epochs: int = 50
    seed: int = 42


@dataclass
class LinearModel:
    weights: np.ndarray  # (9, dim)
    bias: np.ndarray  # (9,)
    hyper: LinearHyper
    loss_trace: list = field(default_factory=list)  # epoch-averaged objective

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def fit_linear(x: np.ndarray, y: np.ndarray, hyper: LinearHyper = LinearHyper()) -> LinearModel:
    """One-vs-rest hinge SGD with learning rate 1/(lambda*(t+t0)).

    t0 comes from the data scale: the first step size is 1/R^2 for R the
    largest training row norm, so updates start at the margin scale.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    n, dim = x.shape
    if n == 0:
        raise ValueError("empty training set")
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate training set: only one class present")

    lam = hyper.regularization
    row_norms = np.linalg.norm(x, axis=1)
    radius = max(float(row_norms.max()), 1e-12)
    eta0 = 1.0 / (radius * radius)
    t0 = 1.0 / (eta0 * lam)

    rng = np.random.default_rng(hyper.seed)
    weights = np.zeros((N_CLASSES, dim))
    bias = np.zeros(N_CLASSES)
    signs = np.full((n, N_CLASSES), -1.0)
    signs[np.arange(n), y] = 1.0

    trace = []
    t = 0
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        for i in order:
            eta = 1.0 / (lam * (t + t0))
            xi = x[i]
            margins = signs[i] * (weights @ xi + bias)
            violating = margins < 1.0
            weights *= 1.0 - eta * lam
            if violating.any():
                weights[violating] += eta * np.outer(signs[i, violating], xi)
                bias[violating] += eta * signs[i, violating]
            t += 1
        scores = x @ weights.T + bias
        hinge = np.maximum(0.0, 1.0 - signs * scores).sum(axis=1).mean()
        objective = 0.5 * lam * float((weights * weights).sum()) + float(hinge)
        trace.append(objective)

    return LinearModel(weights=weights, bias=bias, hyper=hyper, loss_trace=trace)


def predict_linear(model: LinearModel, x: np.ndarray) -> RefClass:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ValueError(f"feature dimensionality {x.shape} does not match model ({model.dim},)")
    scores = model.weights @ x + model.bias
    best = scores.max()
    for cls in CLASS_ORDER:  # canonical order breaks exact ties
        if scores[cls.value] == best:
            return cls
    raise AssertionError("unreachable")


def predict_linear_many(model: LinearModel, x: np.ndarray) -> list:
    return [predict_linear(model, row) for row in np.asarray(x, dtype=float)]


# ---------------------------------------------------------------------------
# model files: text formats for diffability

def write_majority(model: MajorityModel, path: str | Path) -> None:
    payload = {
        "global_majority": model.global_majority.name,
        "forms": {
            form: {
                "label": model.form_labels[form].name,
                "counts": {cls.name: c for cls, c in sorted(model.counts[form].items(), key=lambda kv: kv[0].value)},
                "distinct_labels": model.distinct_labels[form],
            }
            for form in sorted(model.counts)
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def read_majority(path: str | Path) -> MajorityModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    counts = {
        form: Counter({RefClass.from_string(k): v for k, v in info["counts"].items()})
        for form, info in payload["forms"].items()
    }
    return MajorityModel(
        form_labels={form: RefClass.from_string(info["label"]) for form, info in payload["forms"].items()},
        counts=counts,
        distinct_labels={form: info["distinct_labels"] for form, info in payload["forms"].items()},
        global_majority=RefClass.from_string(payload["global_majority"]),
    )


def write_linear(model: LinearModel, weights_path: str | Path, meta_path: str | Path) -> None:
    with open(weights_path, "w", encoding="utf-8") as fh:
        fh.write("class\tbias\t" + "\t".join(f"w{i}" for i in range(model.dim)) + "\n")
        for cls in RefClass:
            row = model.weights[cls.value]
            fh.write(
                cls.name
                + "\t"
                + f"{model.bias[cls.value]:.17g}"
                + "\t"
                + "\t".join(f"{v:.17g}" for v in row)
                + "\n"
            )
    meta = {
        "dim": model.dim,
        "hyper": {
            "regularization": model.hyper.regularization,
            "epochs": model.hyper.epochs,
            "seed": model.hyper.seed,
        },
        "loss_trace": model.loss_trace,
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_linear(weights_path: str | Path, meta_path: str | Path) -> LinearModel:
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    weights = np.zeros((N_CLASSES, meta["dim"]))
    bias = np.zeros(N_CLASSES)
    with open(weights_path, encoding="utf-8") as fh:
        next(fh)  # header
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            cls = RefClass.from_string(parts[0])
            bias[cls.value] = float(parts[1])
            weights[cls.value] = [float(v) for v in parts[2:]]
    hyper = LinearHyper(
        regularization=meta["hyper"]["regularization"],
        epochs=meta["hyper"]["epochs"],
        seed=meta["hyper"]["seed"],
    )
    return LinearModel(weights=weights, bias=bias, hyper=hyper, loss_trace=meta.get("loss_trace", []))
