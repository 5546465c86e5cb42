"""Training regimes over exported folds and held-out silver evaluation.

T1 trains on the gold folds alone, T2 on gold plus (already downsampled)
silver pairs, T3 pretrains on the silver pairs and then fine-tunes on the
gold folds.  All randomness is seeded; per-fold predictions come back in the
exporter's predictions format.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .data import (
    LABELS,
    PairExample,
    WordVocab,
    encode_batch,
    write_predictions,
)
from .model import EncoderConfig, PairClassifier

log = logging.getLogger(__name__)

REGIMES = ("T1", "T2", "T3")


@dataclass
class TrainConfig:
    epochs: int = 25
    pretrain_epochs: int = 25
    batch_size: int = 16
    learning_rate: float = 4e-5
    max_len: int = 512
    seed: int = 42
    encoder: EncoderConfig = field(default_factory=EncoderConfig)


@dataclass
class TrainedModel:
    model: PairClassifier
    vocab: WordVocab
    config: TrainConfig
    trained_on: set  # instance ids seen during any training phase


def _train_epochs(model, vocab, pairs, config, epochs, generator):
    device = next(model.parameters()).device
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    model.train()
    losses = []
    for _ in range(epochs):
        order = torch.randperm(len(pairs), generator=generator).tolist()
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [pairs[i] for i in order[start : start + config.batch_size]]
            input_ids, token_types, mask = encode_batch(batch, vocab, config.max_len, device)
            labels = torch.tensor([p.label_index() for p in batch], device=device)
            optimizer.zero_grad()
            logits = model(input_ids, token_types, mask)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            total += loss.detach().item() * len(batch)
        losses.append(total / len(pairs))
    return losses


def train_on_pairs(pairs: list, config: TrainConfig, pretrain_pairs: list | None = None) -> TrainedModel:
    """Train a fresh classifier, optionally with a pretraining phase."""
    if not pairs:
        raise ValueError("no training pairs")
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)
    vocab_source = list(pairs) + list(pretrain_pairs or [])
    vocab = WordVocab.from_pairs(vocab_source)
    model = PairClassifier(config.encoder, vocab_size=len(vocab))
    trained_on = set()
    if pretrain_pairs:
        _train_epochs(model, vocab, pretrain_pairs, config, config.pretrain_epochs, generator)
        trained_on |= {p.instance_id for p in pretrain_pairs}
    _train_epochs(model, vocab, pairs, config, config.epochs, generator)
    trained_on |= {p.instance_id for p in pairs}
    return TrainedModel(model=model, vocab=vocab, config=config, trained_on=trained_on)


def predict(trained: TrainedModel, pairs: list) -> dict:
    trained.model.eval()
    predictions = {}
    with torch.no_grad():
        for start in range(0, len(pairs), trained.config.batch_size):
            batch = pairs[start : start + trained.config.batch_size]
            input_ids, token_types, mask = encode_batch(
                batch, trained.vocab, trained.config.max_len)
            logits = trained.model(input_ids, token_types, mask)
            for pair, row in zip(batch, logits.argmax(dim=1).tolist()):
                predictions[pair.instance_id] = LABELS[row]
    return predictions


def train(
    regime: str,
    gold_pairs: list,
    folds: dict,
    silver_pairs: list | None = None,
    config: TrainConfig | None = None,
    out_dir: str | Path | None = None,
) -> dict:
    """Cross-validation loop over exported folds; returns pooled predictions.

    When `out_dir` is given, per-fold prediction files (fold<k>.jsonl) and the
    pooled predictions.jsonl are written there.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    config = config or TrainConfig()
    silver_pairs = list(silver_pairs or [])
    by_id = {p.instance_id: p for p in gold_pairs}

    missing_folds = sorted(set(by_id) - set(folds))
    if missing_folds:
        raise ValueError(f"fold assignment missing exported pairs: {missing_folds[:5]}")
    missing_pairs = sorted(set(folds) - set(by_id))
    if missing_pairs:
        raise ValueError(f"fold file names unknown pairs: {missing_pairs[:5]}")
    overlap = sorted({p.instance_id for p in silver_pairs} & set(by_id))
    if overlap:
        raise ValueError(f"silver pairs overlap gold instance ids: {overlap[:5]}")
    for pair in gold_pairs + silver_pairs:
        pair.label_index()  # raises on unlabeled input

    out_dir = Path(out_dir) if out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    pooled = {}
    for fold in sorted(set(folds.values())):
        test = sorted(i for i in by_id if folds[i] == fold)
        train_ids = sorted(i for i in by_id if folds[i] != fold)
        if not test:
            continue
        train_pairs = [by_id[i] for i in train_ids]
        pretrain = None
        if regime == "T2":
            train_pairs = train_pairs + silver_pairs
        elif regime == "T3":
            pretrain = silver_pairs or None
        trained = train_on_pairs(train_pairs, config, pretrain_pairs=pretrain)
        fold_predictions = predict(trained, [by_id[i] for i in test])
        pooled.update(fold_predictions)
        if out_dir:
            write_predictions(fold_predictions, out_dir / f"fold{fold}.jsonl")
        log.info("fold %d: trained on %d pairs, predicted %d", fold,
                 len(train_pairs), len(fold_predictions))
    if out_dir:
        write_predictions(pooled, out_dir / "predictions.jsonl")
    return pooled


def eval_heldout_silver(trained: TrainedModel, heldout: list) -> float:
    """Accuracy of the trained model against held-out silver hard labels."""
    overlap = sorted({p.instance_id for p in heldout} & trained.trained_on)
    if overlap:
        raise ValueError(f"held-out silver overlaps training instances: {overlap[:5]}")
    if not heldout:
        raise ValueError("empty held-out set")
    predictions = predict(trained, heldout)
    return sum(
        1 for p in heldout if predictions[p.instance_id] == p.label
    ) / len(heldout)
