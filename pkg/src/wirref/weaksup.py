"""Labeling-function votes, probabilistic label aggregation and silver corpus tools.

Each compiled pattern acts as one labeling function: it votes its class on the
instances it matches and abstains elsewhere.  Votes are aggregated either by
plurality or by an EM-trained generative model (one accuracy and one voting
propensity per function, uniform error spreading over the wrong classes).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .annotation import CLASS_ORDER, N_CLASSES, RefClass
from .corpus import Segment, context_window, extract_instances, resolve_instance
from .depmatch import Pattern, match_all

log = logging.getLogger(__name__)

ABSTAIN = -1

# parameter clamps: EM estimates stay inside (0, 1)
_PARAM_LO, _PARAM_HI = 0.01, 0.99
_INIT_ACC_LO, _INIT_ACC_HI = 0.55, 0.95


@dataclass
class LabelMatrix:
    instance_ids: list
    lf_names: list
    votes: np.ndarray  # (n_instances, n_lfs), RefClass values or ABSTAIN
    n_excluded: int = 0  # extracted instances dropped because no function fired

    def vote_of(self, row: int, col: int) -> RefClass | None:
        v = self.votes[row, col]
        return None if v == ABSTAIN else CLASS_ORDER[v]


@dataclass
class LabelModelParams:
    priors: np.ndarray  # (9,)
    accuracy: np.ndarray  # (n_lfs,)
    propensity: np.ndarray  # (n_lfs,)
    lf_names: list
    log_likelihood_trace: list = field(default_factory=list)


@dataclass
class SilverLabel:
    instance_id: str
    posterior: np.ndarray  # (9,), sums to 1
    hard_label: RefClass
    source: str  # "MAJORITY" | "LABEL_MODEL"


def build_matrix(
    patterns: Iterable[Pattern],
    segments: Iterable[Segment],
    test_doc_ids: Iterable[str] | None = None,
) -> LabelMatrix:
    """Vote matrix over all extracted instances that received at least one vote."""
    patterns = list(patterns)
    segments = list(segments)
    if test_doc_ids:
        overlap = sorted({s.doc_id for s in segments} & set(test_doc_ids))
        if overlap:
            raise ValueError(f"test documents leaked into the training corpus: {overlap}")
    instances = extract_instances(segments)
    table = match_all(patterns, segments)

    row_index = {inst.instance_id: i for i, inst in enumerate(instances)}
    votes = np.full((len(instances), len(patterns)), ABSTAIN, dtype=np.int8)
    for j, pattern in enumerate(patterns):
        for m in table.matches[pattern.name]:
            votes[row_index[m.instance_id], j] = pattern.label.value

    fired = (votes != ABSTAIN).any(axis=1)
    kept = [inst.instance_id for inst, keep in zip(instances, fired) if keep]
    return LabelMatrix(
        instance_ids=kept,
        lf_names=[p.name for p in patterns],
        votes=votes[fired],
        n_excluded=int(len(instances) - fired.sum()),
    )


def _vote_share_priors(votes: np.ndarray) -> np.ndarray:
    counts = np.array([(votes == c).sum() for c in range(N_CLASSES)], dtype=float)
    counts += 1.0  # keep every class representable
    return counts / counts.sum()


def _tie_argmax(scores: np.ndarray, priors: np.ndarray) -> RefClass:
    """Argmax with documented tie-breaking: higher prior, then canonical order."""
    best = scores.max()
    tied = [c for c in range(N_CLASSES) if scores[c] == best]
    if len(tied) > 1:
        best_prior = max(priors[c] for c in tied)
        tied = [c for c in tied if priors[c] == best_prior]
    return CLASS_ORDER[tied[0]]


def majority_vote(matrix: LabelMatrix) -> list[SilverLabel]:
    """Plurality aggregation; posterior is the per-row vote-share vector."""
    if len(matrix.instance_ids) == 0:
        raise ValueError("empty label matrix")
    corpus_priors = _vote_share_priors(matrix.votes)
    out = []
    for i, instance_id in enumerate(matrix.instance_ids):
        row = matrix.votes[i]
        counts = np.array([(row == c).sum() for c in range(N_CLASSES)], dtype=float)
        total = counts.sum()
        if total == 0:
            raise ValueError(f"all-abstain row for {instance_id} (matrix not built here?)")
        posterior = counts / total
        out.append(
            SilverLabel(
                instance_id=instance_id,
                posterior=posterior,
                hard_label=_tie_argmax(counts, corpus_priors),
                source="MAJORITY",
            )
        )
    return out


def _log_posteriors(
    votes: np.ndarray, priors: np.ndarray, accuracy: np.ndarray, propensity: np.ndarray
) -> np.ndarray:
    """Unnormalized per-class log posterior including the abstain likelihood."""
    voting = votes != ABSTAIN  # (n, j)
    log_correct = np.log(propensity * accuracy)
    log_wrong = np.log(propensity * (1.0 - accuracy) / (N_CLASSES - 1))
    log_abstain = np.log(1.0 - propensity)
    # class-independent part of each row
    base = voting @ log_wrong + (~voting) @ log_abstain  # (n,)
    out = np.empty((votes.shape[0], N_CLASSES))
    delta = log_correct - log_wrong
    for c in range(N_CLASSES):
        out[:, c] = np.log(priors[c]) + base + (votes == c) @ delta
    return out


def _posteriors_and_ll(votes, priors, accuracy, propensity):
    logp = _log_posteriors(votes, priors, accuracy, propensity)
    row_max = logp.max(axis=1, keepdims=True)
    shifted = np.exp(logp - row_max)
    norm = shifted.sum(axis=1, keepdims=True)
    posteriors = shifted / norm
    log_likelihood = float((np.log(norm) + row_max).sum())
    return posteriors, log_likelihood


def fit_label_model(
    matrix: LabelMatrix,
    max_iter: int = 100,
    tol: float = 1e-6,
    seed: int = 42,
) -> LabelModelParams:
    """EM under the conditional-independence vote model.

    Initialization is deterministic (accuracies from agreement with the
    majority vote, priors from vote shares), so `seed` only pins downstream
    reproducibility metadata.
    """
    del seed  # deterministic initialization; kept for interface stability
    votes = matrix.votes
    n, n_lfs = votes.shape
    if n_lfs < 2:
        raise ValueError("label model needs at least two labeling functions")
    if n == 0:
        raise ValueError("empty label matrix")

    voting = votes != ABSTAIN
    propensity = voting.mean(axis=0)
    silent = propensity < _PARAM_LO
    if silent.any():
        names = [matrix.lf_names[j] for j in np.flatnonzero(silent)]
        log.warning("labeling functions never fire, propensity floored: %s", names)
    propensity = np.clip(propensity, _PARAM_LO, _PARAM_HI)

    mv = majority_vote(matrix)
    mv_labels = np.array([s.hard_label.value for s in mv])
    accuracy = np.empty(n_lfs)
    for j in range(n_lfs):
        mask = voting[:, j]
        accuracy[j] = (votes[mask, j] == mv_labels[mask]).mean() if mask.any() else 0.75
    accuracy = np.clip(accuracy, _INIT_ACC_LO, _INIT_ACC_HI)
    priors = _vote_share_priors(votes)

    trace = []
    for _ in range(max_iter):
        posteriors, ll = _posteriors_and_ll(votes, priors, accuracy, propensity)
        trace.append(ll)
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            break
        # M-step
        priors = np.clip(posteriors.mean(axis=0), 1e-12, None)
        priors = priors / priors.sum()
        for j in range(n_lfs):
            mask = voting[:, j]
            if mask.any():
                agree = posteriors[mask, votes[mask, j]]
                accuracy[j] = agree.mean()
        accuracy = np.clip(accuracy, _PARAM_LO, _PARAM_HI)
        # propensity's maximizer is the observed vote rate: constant across iterations

    return LabelModelParams(
        priors=priors,
        accuracy=accuracy,
        propensity=propensity,
        lf_names=list(matrix.lf_names),
        log_likelihood_trace=trace,
    )


def predict_silver(matrix: LabelMatrix, params: LabelModelParams) -> list[SilverLabel]:
    """Posterior labels under the fitted generative model."""
    if list(matrix.lf_names) != list(params.lf_names):
        raise ValueError("label matrix and model parameters disagree on labeling functions")
    posteriors, _ = _posteriors_and_ll(
        matrix.votes, params.priors, params.accuracy, params.propensity
    )
    out = []
    for i, instance_id in enumerate(matrix.instance_ids):
        post = posteriors[i]
        out.append(
            SilverLabel(
                instance_id=instance_id,
                posterior=post,
                hard_label=_tie_argmax(post, params.priors),
                source="LABEL_MODEL",
            )
        )
    return out


def downsample(silver: Iterable[SilverLabel], cap: int, seed: int) -> list[SilverLabel]:
    """Per hard-label class, keep at most `cap` instances, uniformly at random."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    silver = list(silver)
    rng = np.random.default_rng(seed)
    kept = []
    for cls in RefClass:
        members = [s for s in silver if s.hard_label is cls]
        if len(members) > cap:
            chosen = rng.choice(len(members), size=cap, replace=False)
            members = [members[i] for i in sorted(chosen)]
        kept.extend(members)
    return kept


@dataclass
class ReviewRow:
    instance_id: str
    hard_label: RefClass
    left: str
    pronoun: str
    right: str
    votes: dict  # lf name -> class name


def sample_for_review(
    silver: Iterable[SilverLabel],
    segindex: dict,
    n_per_class: int,
    seed: int,
    matrix: LabelMatrix | None = None,
    context: int = 12,
) -> list[ReviewRow]:
    """Uniform per-class sample with readable context; small classes emit all."""
    silver = list(silver)
    votes_of = {}
    if matrix is not None:
        for i, instance_id in enumerate(matrix.instance_ids):
            votes_of[instance_id] = {
                name: CLASS_ORDER[v].name
                for name, v in zip(matrix.lf_names, matrix.votes[i])
                if v != ABSTAIN
            }
    rng = np.random.default_rng(seed)
    rows = []
    for cls in RefClass:
        members = [s for s in silver if s.hard_label is cls]
        if len(members) > n_per_class:
            chosen = rng.choice(len(members), size=n_per_class, replace=False)
            members = [members[i] for i in sorted(chosen)]
        for s in members:
            seg, flat = resolve_instance(s.instance_id, segindex)
            left, right = context_window(seg, flat, context)
            rows.append(
                ReviewRow(
                    instance_id=s.instance_id,
                    hard_label=s.hard_label,
                    left=" ".join(t.form for t in left),
                    pronoun=seg.token_at(flat).form,
                    right=" ".join(t.form for t in right),
                    votes=votes_of.get(s.instance_id, {}),
                )
            )
    return rows


def format_review_sheet(rows: Iterable[ReviewRow]) -> str:
    lines = ["instance_id\tlabel\tcontext\tvotes"]
    for row in rows:
        context = f"{row.left} [[{row.pronoun}]] {row.right}".strip()
        votes = ", ".join(f"{k}={v}" for k, v in sorted(row.votes.items()))
        lines.append(f"{row.instance_id}\t{row.hard_label.name}\t{context}\t{votes}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# file formats

def write_matrix_tsv(matrix: LabelMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("instance_id\t" + "\t".join(matrix.lf_names) + "\n")
        for i, instance_id in enumerate(matrix.instance_ids):
            cells = [
                CLASS_ORDER[v].name if v != ABSTAIN else "ABSTAIN" for v in matrix.votes[i]
            ]
            fh.write(instance_id + "\t" + "\t".join(cells) + "\n")


def read_matrix_tsv(path: str | Path) -> LabelMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        lf_names = header[1:]
        ids, rows = [], []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(lf_names) + 1:
                raise ValueError(f"{path}: malformed matrix row {parts[0]!r}")
            ids.append(parts[0])
            rows.append(
                [ABSTAIN if c == "ABSTAIN" else RefClass.from_string(c).value for c in parts[1:]]
            )
    votes = np.array(rows, dtype=np.int8) if rows else np.empty((0, len(lf_names)), dtype=np.int8)
    return LabelMatrix(instance_ids=ids, lf_names=lf_names, votes=votes)


def write_label_model(params: LabelModelParams, path: str | Path) -> None:
    payload = {
        "priors": {cls.name: params.priors[cls.value] for cls in RefClass},
        "labeling_functions": [
            {"name": name, "accuracy": float(a), "propensity": float(p)}
            for name, a, p in zip(params.lf_names, params.accuracy, params.propensity)
        ],
        "log_likelihood_trace": list(params.log_likelihood_trace),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def read_label_model(path: str | Path) -> LabelModelParams:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    lfs = payload["labeling_functions"]
    return LabelModelParams(
        priors=np.array([payload["priors"][cls.name] for cls in RefClass]),
        accuracy=np.array([lf["accuracy"] for lf in lfs]),
        propensity=np.array([lf["propensity"] for lf in lfs]),
        lf_names=[lf["name"] for lf in lfs],
        log_likelihood_trace=list(payload.get("log_likelihood_trace", [])),
    )


def write_silver(silver: Iterable[SilverLabel], matrix: LabelMatrix, path: str | Path) -> None:
    """Silver JSONL: {instance_id, hard_label, posterior, votes}."""
    votes_of = {}
    for i, instance_id in enumerate(matrix.instance_ids):
        votes_of[instance_id] = {
            name: CLASS_ORDER[v].name
            for name, v in zip(matrix.lf_names, matrix.votes[i])
            if v != ABSTAIN
        }
    with open(path, "w", encoding="utf-8") as fh:
        for s in silver:
            fh.write(
                json.dumps(
                    {
                        "instance_id": s.instance_id,
                        "hard_label": s.hard_label.name,
                        "posterior": [float(x) for x in s.posterior],
                        "votes": votes_of.get(s.instance_id, {}),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_silver(path: str | Path) -> list[SilverLabel]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                SilverLabel(
                    instance_id=obj["instance_id"],
                    posterior=np.array(obj["posterior"], dtype=float),
                    hard_label=RefClass.from_string(obj["hard_label"]),
                    source=obj.get("source", "LABEL_MODEL"),
                )
            )
    return out
