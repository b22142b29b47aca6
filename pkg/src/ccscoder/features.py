"""Featurization: n-gram vocabularies, sparse count rows, padded index sequences.

Vocabularies are fit on the training split only. Index 0 is reserved for
padding and index V+1 is the out-of-vocabulary token used by the sequence
encoder; the bag-of-words path simply drops out-of-vocabulary n-grams.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CleanRecord
from .errors import EmptyCorpus

NGRAM_MODES = ("unigram", "bigram")


@dataclass
class Vocabulary:
    """Token-to-index map; indices run 1..V in first-occurrence order.

    In bigram mode adjacent pairs are stored as "w1 w2" alongside unigrams.
    """

    ngram_mode: str
    token_to_index: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.token_to_index)

    @property
    def oov_index(self) -> int:
        return self.size + 1

    def to_json_dict(self) -> dict:
        ordered = sorted(self.token_to_index, key=self.token_to_index.get)
        return {"ngram_mode": self.ngram_mode, "tokens": ordered}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Vocabulary":
        return cls(
            ngram_mode=data["ngram_mode"],
            token_to_index={tok: i + 1 for i, tok in enumerate(data["tokens"])},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class DocTermMatrix:
    """Sparse row-major count matrix: one (index, count) list per document."""

    rows: list[list[tuple[int, int]]]
    cols: int

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class SequenceBatch:
    """Zero-padded index sequences with true lengths.

    sequences is (D, L_max) int64; entries past each row's length are 0 and
    entries before it are in [1, V+1]. `truncated` counts records cut down
    to L_max.
    """

    sequences: np.ndarray
    lengths: np.ndarray
    l_max: int
    truncated: int = 0


@dataclass
class LabelSet:
    """Class list (sorted CCS codes from training) and per-record class indices."""

    classes: list[int]
    labels: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def one_hot(self, label_index: int) -> np.ndarray:
        row = np.zeros(self.n_classes, dtype=np.float64)
        row[label_index] = 1.0
        return row


def record_ngrams(tokens: tuple[str, ...] | list[str], ngram_mode: str) -> list[str]:
    """The n-grams of one record: unigrams first, then adjacent bigrams."""
    grams = list(tokens)
    if ngram_mode == "bigram":
        grams.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return grams


def build_vocab(train_records: list[CleanRecord], ngram_mode: str) -> Vocabulary:
    """Vocabulary over the training split, indexed in first-occurrence order."""
    if ngram_mode not in NGRAM_MODES:
        raise ValueError(f"ngram_mode must be one of {NGRAM_MODES}, got {ngram_mode!r}")
    if not train_records:
        raise EmptyCorpus("cannot build a vocabulary from zero records")
    vocab = Vocabulary(ngram_mode=ngram_mode)
    index = vocab.token_to_index
    for rec in train_records:
        for gram in record_ngrams(rec.tokens, ngram_mode):
            if gram not in index:
                index[gram] = len(index) + 1
    return vocab


def vectorize_bow(tokens: tuple[str, ...] | list[str], vocab: Vocabulary) -> list[tuple[int, int]]:
    """Sparse count row over the vocabulary; out-of-vocabulary grams are dropped."""
    counts: dict[int, int] = {}
    index = vocab.token_to_index
    for gram in record_ngrams(tokens, vocab.ngram_mode):
        idx = index.get(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    return sorted(counts.items())


def build_dtm(records: list[CleanRecord], vocab: Vocabulary) -> DocTermMatrix:
    return DocTermMatrix(rows=[vectorize_bow(r.tokens, vocab) for r in records], cols=vocab.size)


def encode_sequence(
    tokens: tuple[str, ...] | list[str],
    vocab: Vocabulary,
    l_max: int,
) -> tuple[np.ndarray, int, bool]:
    """Unigram index sequence, zero-padded to l_max.

    Out-of-vocabulary tokens get the dedicated index V+1. Records longer than
    l_max are truncated; the returned flag reports whether that happened.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    index = vocab.token_to_index
    oov = vocab.oov_index
    truncated = len(tokens) > l_max
    kept = tokens[:l_max]
    seq = np.zeros(l_max, dtype=np.int64)
    for i, tok in enumerate(kept):
        seq[i] = index.get(tok, oov)
    return seq, len(kept), truncated


def encode_sequences(records: list[CleanRecord], vocab: Vocabulary, l_max: int) -> SequenceBatch:
    sequences = np.zeros((len(records), l_max), dtype=np.int64)
    lengths = np.zeros(len(records), dtype=np.int64)
    n_truncated = 0
    for i, rec in enumerate(records):
        seq, length, truncated = encode_sequence(rec.tokens, vocab, l_max)
        sequences[i] = seq
        lengths[i] = length
        n_truncated += truncated
    return SequenceBatch(sequences=sequences, lengths=lengths, l_max=l_max, truncated=n_truncated)


def max_record_length(records: list[CleanRecord]) -> int:
    if not records:
        raise EmptyCorpus("no records to measure")
    return max(len(r.tokens) for r in records)


def encode_labels(train_records: list[CleanRecord]) -> LabelSet:
    """Label set from the training split: sorted distinct codes, index per record."""
    if not train_records:
        raise EmptyCorpus("cannot encode labels for zero records")
    classes = sorted({r.label for r in train_records})
    class_index = {c: i for i, c in enumerate(classes)}
    labels = np.array([class_index[r.label] for r in train_records], dtype=np.int64)
    return LabelSet(classes=classes, labels=labels)


def label_indices(label_set: LabelSet, records: list[CleanRecord]) -> list[int | None]:
    """Class indices for records; None marks codes unseen in training.

    Unseen-label records are excluded from any loss yet still count in
    evaluation, where their truth class is never predictable by the model.
    """
    class_index = {c: i for i, c in enumerate(label_set.classes)}
    return [class_index.get(r.label) for r in records]
