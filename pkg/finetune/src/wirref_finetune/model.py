"""Transformer encoder for sentence-pair classification.

The default "scratch" encoder is a compact BERT-style stack built locally, so
training works without any model hub access; a pretrained checkpoint can be
plugged in through the huggingface adapter when one is available on disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .data import LABELS


@dataclass(frozen=True)
class EncoderConfig:
    """Defaults mirror the pinned pretrained-encoder settings."""

    hidden_size: int = 768
    num_hidden_layers: int = 12
    num_attention_heads: int = 12
    hidden_dropout_prob: float = 0.1
    attention_probs_dropout_prob: float = 0.1
    hidden_act: str = "gelu"
    layer_norm_eps: float = 1e-12
    max_position_embeddings: int = 512
    type_vocab_size: int = 2
    vocab_size: int = 31102

    @classmethod
    def small(cls) -> "EncoderConfig":
        """CPU-friendly configuration for toy corpora and tests."""
        return cls(hidden_size=64, num_hidden_layers=2, num_attention_heads=4,
                   max_position_embeddings=128)


class PairClassifier(nn.Module):
    """[CLS]-pooled transformer encoder with a 9-way head."""

    def __init__(self, config: EncoderConfig, vocab_size: int | None = None):
        super().__init__()
        self.config = config
        vocab_size = vocab_size or config.vocab_size
        hidden = config.hidden_size
        self.word_embeddings = nn.Embedding(vocab_size, hidden)
        self.position_embeddings = nn.Embedding(config.max_position_embeddings, hidden)
        self.token_type_embeddings = nn.Embedding(config.type_vocab_size, hidden)
        self.embedding_norm = nn.LayerNorm(hidden, eps=config.layer_norm_eps)
        self.dropout = nn.Dropout(config.hidden_dropout_prob)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden,
            nhead=config.num_attention_heads,
            dim_feedforward=4 * hidden,
            dropout=config.attention_probs_dropout_prob,
            activation=config.hidden_act,
            layer_norm_eps=config.layer_norm_eps,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.num_hidden_layers)
        self.classifier = nn.Linear(hidden, len(LABELS))

    def forward(self, input_ids, token_type_ids, padding_mask):
        positions = torch.arange(input_ids.size(1), device=input_ids.device)
        embedded = (
            self.word_embeddings(input_ids)
            + self.position_embeddings(positions)[None, :, :]
            + self.token_type_embeddings(token_type_ids)
        )
        embedded = self.dropout(self.embedding_norm(embedded))
        hidden = self.encoder(embedded, src_key_padding_mask=padding_mask)
        return self.classifier(self.dropout(hidden[:, 0]))


def load_hf_classifier(name_or_path: str):
    """Adapter for a locally available pretrained checkpoint."""
    try:
        from transformers import AutoModelForSequenceClassification, AutoTokenizer
    except ImportError as err:
        raise RuntimeError("the hf encoder needs the transformers package") from err
    tokenizer = AutoTokenizer.from_pretrained(name_or_path)
    model = AutoModelForSequenceClassification.from_pretrained(
        name_or_path, num_labels=len(LABELS))
    return tokenizer, model
