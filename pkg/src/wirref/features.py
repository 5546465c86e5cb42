"""Deterministic featurization of pronoun instances.

Side-tagged context n-grams ("L:"/"R:" prefixes) with tf-idf weighting and
chi-squared feature selection, plus a fixed one-hot block over the pronoun's
case-sensitive word form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .annotation import RefClass
from .corpus import PRONOUN_INVENTORY, PronounInstance, context_window, resolve_instance

log = logging.getLogger(__name__)

# fixed word-form enumeration: every inventory form in lower and capitalized spelling
WORDFORM_COLUMNS = tuple(
    variant for form in sorted(PRONOUN_INVENTORY) for variant in (form, form.capitalize())
)
_WORDFORM_INDEX = {form: i for i, form in enumerate(WORDFORM_COLUMNS)}


@dataclass(frozen=True)
class FeatureConfig:
    """Defaults mirror the winning feature-based setup."""

    window: int = 20
    use_unigrams: bool = True
    use_bigrams: bool = True
    use_trigrams: bool = False
    tfidf: bool = True
    lemmatise: bool = True
    remove_stopwords: bool = False
    select_k: int = 300
    include_wordform: bool = True
    include_ner: bool = False

    def __post_init__(self):
        if self.select_k < 1:
            raise ValueError("select_k must be >= 1")
        if self.include_ner:
            raise NotImplementedError("named-entity features are not implemented")

    def ngram_sizes(self) -> tuple:
        sizes = []
        if self.use_unigrams:
            sizes.append(1)
        if self.use_bigrams:
            sizes.append(2)
        if self.use_trigrams:
            sizes.append(3)
        return tuple(sizes)


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset:
    text = resources.files("wirref.data").joinpath("stopwords_de.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


@dataclass
class Vocabulary:
    term_index: dict  # term -> column
    df: dict  # term -> document frequency (training side)
    chi2: dict  # term -> selection score
    n_documents: int
    config: FeatureConfig
    fitted: bool = True
    _idf: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.term_index)

    def idf_by_column(self) -> np.ndarray:
        """Smoothed idf per column: ln((1+N)/(1+df)) + 1."""
        if self._idf is None:
            idf = np.zeros(self.size)
            for term, col in self.term_index.items():
                idf[col] = math.log((1 + self.n_documents) / (1 + self.df[term])) + 1.0
            self._idf = idf
        return self._idf


@dataclass
class FeatureVector:
    ngram: list  # sorted (column, weight) pairs, columns < vocabulary size
    wordform: int | None  # column in the word-form block, None when disabled
    n_ngram_columns: int

    @property
    def dim(self) -> int:
        return self.n_ngram_columns + (len(WORDFORM_COLUMNS) if self.wordform is not None else 0)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        for col, weight in self.ngram:
            dense[col] = weight
        if self.wordform is not None:
            dense[self.n_ngram_columns + self.wordform] = 1.0
        return dense


def _instance_terms(
    instance: PronounInstance, segindex: dict, config: FeatureConfig, stopwords: frozenset
) -> list:
    """Side-tagged n-gram terms of one instance's context windows (with repeats)."""
    seg, flat = resolve_instance(instance.instance_id, segindex)
    left, right = context_window(seg, flat, config.window)
    terms = []
    for side, tokens in (("L", left), ("R", right)):
        texts = [(t.lemma if config.lemmatise else t.form).casefold() for t in tokens]
        if config.remove_stopwords:
            texts = [t for t in texts if t not in stopwords]
        for n in config.ngram_sizes():
            for i in range(len(texts) - n + 1):
                terms.append(f"{side}:{' '.join(texts[i : i + n])}")
    return terms


def chi2_presence(present_in_class: int, present_total: int, class_total: int, n: int) -> float:
    """Chi-squared statistic of the 2x2 presence/class contingency table."""
    n11 = present_in_class
    n10 = present_total - present_in_class
    n01 = class_total - present_in_class
    n00 = n - n11 - n10 - n01
    denom = (n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00)
    if denom == 0:
        return 0.0
    return n * (n11 * n00 - n10 * n01) ** 2 / denom


def fit_vocabulary(
    instances: Iterable[PronounInstance],
    labels: dict,
    segindex: dict,
    config: FeatureConfig,
) -> Vocabulary:
    """Select the top-k context terms by max-over-classes chi-squared association.

    `labels` maps instance_id -> RefClass for the training instances only;
    everything here is computed from those instances alone.
    """
    instances = [i for i in instances if i.instance_id in labels]
    if not instances:
        raise ValueError("no labeled training instances to fit a vocabulary on")
    stopwords = load_stopwords() if config.remove_stopwords else frozenset()

    doc_terms = []
    for inst in instances:
        doc_terms.append(frozenset(_instance_terms(inst, segindex, config, stopwords)))
    n = len(instances)
    df: dict = {}
    present_in_class: dict = {}
    class_totals = {cls: 0 for cls in RefClass}
    for inst, terms in zip(instances, doc_terms):
        cls = labels[inst.instance_id]
        class_totals[cls] += 1
        for term in terms:
            df[term] = df.get(term, 0) + 1
            key = (term, cls)
            present_in_class[key] = present_in_class.get(key, 0) + 1

    scores = {}
    for term in df:
        scores[term] = max(
            chi2_presence(present_in_class.get((term, cls), 0), df[term], class_totals[cls], n)
            for cls in RefClass
        )
    if len(scores) < config.select_k:
        log.warning("vocabulary has %d terms, fewer than select_k=%d; keeping all",
                    len(scores), config.select_k)
    ranked = sorted(scores, key=lambda t: (-scores[t], t))[: config.select_k]
    return Vocabulary(
        term_index={term: i for i, term in enumerate(ranked)},
        df={term: df[term] for term in ranked},
        chi2={term: scores[term] for term in ranked},
        n_documents=n,
        config=config,
    )


def _wordform_column(form: str) -> int:
    col = _WORDFORM_INDEX.get(form)
    if col is None:
        col = _WORDFORM_INDEX[form.casefold()]
    return col


def transform(
    instance: PronounInstance, vocab: Vocabulary, segindex: dict
) -> FeatureVector:
    """tf-idf weighted, L2-normalized n-gram block plus the word-form one-hot."""
    config = vocab.config
    stopwords = load_stopwords() if config.remove_stopwords else frozenset()
    counts: dict = {}
    for term in _instance_terms(instance, segindex, config, stopwords):
        col = vocab.term_index.get(term)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1

    idf = vocab.idf_by_column() if config.tfidf else None
    weights = {
        col: (tf * idf[col] if idf is not None else float(tf)) for col, tf in counts.items()
    }
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm > 0:
        weights = {c: w / norm for c, w in weights.items()}

    return FeatureVector(
        ngram=sorted(weights.items()),
        wordform=_wordform_column(instance.form) if config.include_wordform else None,
        n_ngram_columns=vocab.size,
    )


def transform_many(
    instances: Iterable[PronounInstance], vocab: Vocabulary, segindex: dict
) -> np.ndarray:
    """Dense feature matrix for a batch of instances."""
    vectors = [transform(inst, vocab, segindex) for inst in instances]
    if not vectors:
        width = vocab.size + (len(WORDFORM_COLUMNS) if vocab.config.include_wordform else 0)
        return np.zeros((0, width))
    return np.stack([v.to_dense() for v in vectors])


# ---------------------------------------------------------------------------
# file formats

def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    """TSV dump: term, index, df, chi2."""
    rows = sorted(vocab.term_index.items(), key=lambda kv: kv[1])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n_documents={vocab.n_documents}\n")
        fh.write("term\tindex\tdf\tchi2\n")
        for term, idx in rows:
            fh.write(f"{term}\t{idx}\t{vocab.df[term]}\t{vocab.chi2[term]:.12g}\n")


def read_vocabulary(path: str | Path, config: FeatureConfig) -> Vocabulary:
    term_index, df, chi2 = {}, {}, {}
    n_documents = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# n_documents="):
                n_documents = int(line.split("=", 1)[1])
                continue
            if not line or line.startswith("term\t"):
                continue
            term, idx, dfv, score = line.split("\t")
            term_index[term] = int(idx)
            df[term] = int(dfv)
            chi2[term] = float(score)
    return Vocabulary(term_index=term_index, df=df, chi2=chi2, n_documents=n_documents, config=config)


def write_svmlight(vectors: Iterable[FeatureVector], labels: Iterable[int], path: str | Path) -> None:
    """svmlight-style text lines: `<label> <col>:<weight> ...` (1-based columns)."""
    with open(path, "w", encoding="utf-8") as fh:
        for vec, label in zip(vectors, labels):
            pairs = list(vec.ngram)
            if vec.wordform is not None:
                pairs.append((vec.n_ngram_columns + vec.wordform, 1.0))
            body = " ".join(f"{col + 1}:{w:.12g}" for col, w in pairs)
            fh.write(f"{label} {body}\n")
