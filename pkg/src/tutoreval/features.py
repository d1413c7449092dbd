"""Word n-gram featurization: bag-of-words and TF-IDF sparse vectors.

Tokens are lowercased maximal runs of at least two alphanumeric characters.
TF-IDF uses the smoothed formula idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1
and L2-normalizes the output vector, so dot product and cosine coincide for
downstream k-NN.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Weighting",
    "SparseVector",
    "VectorizerModel",
    "tokenize",
    "iter_ngrams",
    "fit_vectorizer",
    "transform",
    "save_vectorizer",
    "load_vectorizer",
]

MAX_NGRAM_ORDER = 8

# Maximal runs of >=2 alphanumerics; underscore is not alphanumeric.
_TOKEN_RE = re.compile(r"[^\W_]{2,}", re.UNICODE)

_FORMAT_VERSION = 1


class Weighting(Enum):
    BOW = "bow"
    TFIDF = "tfidf"


@dataclass(frozen=True, eq=False)
class SparseVector:
    """A sparse feature vector: strictly increasing indices, positive values."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values length mismatch")
        if len(self.indices) > 0:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[-1] >= self.dim or self.indices[0] < 0:
                raise ValueError("index out of range")
            if np.any(self.values <= 0):
                raise ValueError("values must be positive")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))


def tokenize(text: str) -> list[str]:
    """Split text into lowercased runs of >=2 alphanumeric characters, in order."""
    return _TOKEN_RE.findall(text.lower())


def iter_ngrams(tokens: list[str], lo: int, hi: int):
    """Yield space-joined word n-grams of orders lo..hi, in position order."""
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i : i + n])


def _check_range(lo: int, hi: int) -> None:
    if not (1 <= lo <= hi <= MAX_NGRAM_ORDER):
        raise ValueError(
            f"invalid n-gram range ({lo}, {hi}); need 1 <= lo <= hi <= {MAX_NGRAM_ORDER}"
        )


@dataclass(frozen=True)
class VectorizerModel:
    """A fitted n-gram vocabulary with optional idf weights.

    ``vocabulary`` maps each n-gram to a column index forming a bijection
    onto 0..len(vocabulary)-1.  ``idf`` is present only in TFIDF mode and is
    aligned with the column indices.
    """

    vocabulary: dict[str, int]
    ngram_range: tuple[int, int]
    weighting: Weighting
    idf: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        _check_range(*self.ngram_range)
        n = len(self.vocabulary)
        if sorted(self.vocabulary.values()) != list(range(n)):
            raise ValueError("vocabulary columns must form a bijection onto 0..n-1")
        if self.weighting is Weighting.TFIDF:
            if self.idf is None or len(self.idf) != n:
                raise ValueError("TFIDF model requires one idf value per vocabulary term")
            if np.any(self.idf < 0):
                raise ValueError("idf values must be nonnegative")
        elif self.idf is not None:
            raise ValueError("idf is only stored in TFIDF mode")

    @property
    def dim(self) -> int:
        return len(self.vocabulary)


def fit_vectorizer(
    corpus: list[str], ngram_range: tuple[int, int], weighting: Weighting
) -> VectorizerModel:
    """Fit a vocabulary (and idf in TFIDF mode) over a corpus of documents.

    The vocabulary holds every word n-gram of the requested orders occurring
    at least once, with columns assigned in sorted n-gram order.
    """
    if not corpus:
        raise ValueError("cannot fit a vectorizer on an empty corpus")
    lo, hi = ngram_range
    _check_range(lo, hi)

    df: Counter[str] = Counter()
    vocab_terms: set[str] = set()
    for doc in corpus:
        terms = set(iter_ngrams(tokenize(doc), lo, hi))
        vocab_terms.update(terms)
        df.update(terms)

    vocabulary = {term: col for col, term in enumerate(sorted(vocab_terms))}
    idf = None
    if weighting is Weighting.TFIDF:
        n_docs = len(corpus)
        idf = np.empty(len(vocabulary))
        for term, col in vocabulary.items():
            idf[col] = np.log((1.0 + n_docs) / (1.0 + df[term])) + 1.0
    return VectorizerModel(
        vocabulary=vocabulary, ngram_range=(lo, hi), weighting=weighting, idf=idf
    )


def transform(model: VectorizerModel, text: str) -> SparseVector:
    """Featurize one document against a fitted model.

    BOW emits raw n-gram counts; TFIDF emits count * idf, L2-normalized
    (a zero vector stays zero).  Out-of-vocabulary n-grams are ignored.
    """
    lo, hi = model.ngram_range
    counts: Counter[int] = Counter()
    for term in iter_ngrams(tokenize(text), lo, hi):
        col = model.vocabulary.get(term)
        if col is not None:
            counts[col] += 1
    if not counts:
        return SparseVector(
            indices=np.empty(0, dtype=np.int64), values=np.empty(0), dim=model.dim
        )
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=float)
    if model.weighting is Weighting.TFIDF:
        values = values * model.idf[indices]
        norm = np.sqrt(np.dot(values, values))
        if norm > 0:
            values = values / norm
    return SparseVector(indices=indices, values=values, dim=model.dim)


def save_vectorizer(model: VectorizerModel, path: str) -> None:
    """Serialize a fitted model to versioned JSON for CLI reuse."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(vectorizer_to_json(model), fh, ensure_ascii=False)
        fh.write("\n")


def load_vectorizer(path: str) -> VectorizerModel:
    with open(path, encoding="utf-8") as fh:
        return vectorizer_from_json(json.load(fh))


def vectorizer_to_json(model: VectorizerModel) -> dict:
    return {
        "format_version": _FORMAT_VERSION,
        "kind": "vectorizer",
        "weighting": model.weighting.value,
        "ngram_range": list(model.ngram_range),
        "vocabulary": model.vocabulary,
        "idf": model.idf.tolist() if model.idf is not None else None,
    }


def vectorizer_from_json(doc: dict) -> VectorizerModel:
    if doc.get("format_version") != _FORMAT_VERSION or doc.get("kind") != "vectorizer":
        raise ValueError("not a recognized vectorizer file")
    idf = doc.get("idf")
    return VectorizerModel(
        vocabulary={str(k): int(v) for k, v in doc["vocabulary"].items()},
        ngram_range=tuple(doc["ngram_range"]),
        weighting=Weighting(doc["weighting"]),
        idf=np.asarray(idf, dtype=float) if idf is not None else None,
    )
