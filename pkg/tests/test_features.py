"""Tokenization, n-gram vocabulary fitting, BoW/TF-IDF transforms."""

from __future__ import annotations

import math
import string

import numpy as np
import pytest

from tutoreval.features import (
    MAX_NGRAM_ORDER,
    SparseVector,
    Weighting,
    fit_vectorizer,
    iter_ngrams,
    load_vectorizer,
    save_vectorizer,
    tokenize,
    transform,
)


# ---------------------------------------------------------------------------
# independent oracle: quadratic n-gram counter over the same token rule


def oracle_tokenize(text: str) -> list[str]:
    out, current = [], []
    for ch in text.lower():
        if (ch.isalnum() and not ch == "_") and ch.isascii():
            current.append(ch)
        else:
            if len(current) >= 2:
                out.append("".join(current))
            current = []
    if len(current) >= 2:
        out.append("".join(current))
    return out


def oracle_ngram_counts(text: str, lo: int, hi: int) -> dict[str, int]:
    tokens = oracle_tokenize(text)
    counts: dict[str, int] = {}
    for order in range(lo, hi + 1):
        for start in range(len(tokens) - order + 1):
            gram = " ".join(tokens[start:start + order])
            counts[gram] = counts.get(gram, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# tokenize


def test_tokenize_drops_short_runs_and_lowercases():
    assert tokenize("Solve 2x + 4") == ["solve", "2x"]
    assert tokenize("") == []
    assert tokenize("A a AA") == ["aa"]


def test_tokenize_treats_underscore_as_separator():
    assert tokenize("foo_bar") == ["foo", "bar"]


def test_tokenize_matches_oracle_on_ascii_fuzz():
    rng = np.random.default_rng(11)
    alphabet = string.ascii_letters + string.digits + " .,;:!?-_()[]"
    for _ in range(200):
        text = "".join(rng.choice(list(alphabet), size=int(rng.integers(0, 80))))
        assert tokenize(text) == oracle_tokenize(text)


def test_iter_ngrams_orders():
    assert list(iter_ngrams(["xx", "yy", "zz"], 1, 2)) == [
        "xx", "yy", "zz", "xx yy", "yy zz",
    ]
    assert list(iter_ngrams([], 1, 3)) == []


# ---------------------------------------------------------------------------
# fitting


def test_fit_unigram_vocab():
    model = fit_vectorizer(["aa bb", "aa cc"], (1, 1), Weighting.BOW)
    assert set(model.vocabulary) == {"aa", "bb", "cc"}
    assert sorted(model.vocabulary.values()) == [0, 1, 2]
    assert model.idf is None


def test_fit_bigram_vocab():
    model = fit_vectorizer(["xx yy zz"], (1, 2), Weighting.BOW)
    assert set(model.vocabulary) == {"xx", "yy", "zz", "xx yy", "yy zz"}


def test_idf_of_ubiquitous_term_is_one():
    model = fit_vectorizer(["aa bb", "aa cc", "aa dd"], (1, 1), Weighting.TFIDF)
    assert model.idf[model.vocabulary["aa"]] == pytest.approx(1.0)
    # term in exactly one of three docs: ln(4/2) + 1
    assert model.idf[model.vocabulary["bb"]] == pytest.approx(math.log(4 / 2) + 1.0)


def test_fit_rejects_empty_corpus_and_bad_ranges():
    with pytest.raises(ValueError):
        fit_vectorizer([], (1, 1), Weighting.BOW)
    for rng_pair in ((0, 1), (2, 1), (1, MAX_NGRAM_ORDER + 1)):
        with pytest.raises(ValueError):
            fit_vectorizer(["aa bb"], rng_pair, Weighting.BOW)


def test_vocabulary_is_bijection_fuzz():
    rng = np.random.default_rng(7)
    words = ["alpha", "beta", "gamma", "delta", "eps", "zeta"]
    for _ in range(30):
        docs = [
            " ".join(rng.choice(words, size=int(rng.integers(1, 12))))
            for _ in range(int(rng.integers(1, 8)))
        ]
        lo = int(rng.integers(1, 3))
        hi = int(rng.integers(lo, 4))
        model = fit_vectorizer(docs, (lo, hi), Weighting.BOW)
        cols = sorted(model.vocabulary.values())
        assert cols == list(range(len(model.vocabulary)))


# ---------------------------------------------------------------------------
# transform


def test_transform_out_of_vocab_is_empty_with_full_dim():
    model = fit_vectorizer(["aa bb"], (1, 1), Weighting.TFIDF)
    vec = transform(model, "zz qq")
    assert vec.nnz == 0
    assert vec.dim == 2
    assert vec.norm == 0.0


def test_bow_counts_match_oracle():
    docs = [
        "the cat sat on the mat",
        "the cat ran off the mat quickly",
        "on and on and on it went",
    ]
    model = fit_vectorizer(docs, (1, 3), Weighting.BOW)
    for doc in docs:
        vec = transform(model, doc)
        expected = oracle_ngram_counts(doc, 1, 3)
        dense = vec.to_dense()
        for gram, col in model.vocabulary.items():
            assert dense[col] == expected.get(gram, 0), gram


def test_bow_counts_match_oracle_random_fuzz():
    rng = np.random.default_rng(99)
    words = ["aa", "bb", "cc", "dd", "ee"]
    docs = [
        " ".join(rng.choice(words, size=int(rng.integers(1, 25)))) for _ in range(40)
    ]
    lo, hi = 1, 4
    model = fit_vectorizer(docs, (lo, hi), Weighting.BOW)
    for _ in range(200):
        text = " ".join(rng.choice(words, size=int(rng.integers(0, 25))))
        vec = transform(model, text)
        expected = oracle_ngram_counts(text, lo, hi)
        dense = vec.to_dense()
        for gram, col in model.vocabulary.items():
            assert dense[col] == expected.get(gram, 0)


def test_tfidf_norm_is_zero_or_one():
    rng = np.random.default_rng(3)
    words = ["aa", "bb", "cc", "dd"]
    docs = [" ".join(rng.choice(words, size=8)) for _ in range(10)]
    model = fit_vectorizer(docs, (1, 2), Weighting.TFIDF)
    texts = docs + ["zz zz zz", "", "aa", "dd cc bb aa"]
    for text in texts:
        norm = transform(model, text).norm
        assert norm == 0.0 or abs(norm - 1.0) < 1e-9


def test_tfidf_values_hand_computed():
    # two docs; "aa" occurs in both (idf 1), "bb" only in the first
    model = fit_vectorizer(["aa bb", "aa aa"], (1, 1), Weighting.TFIDF)
    vec = transform(model, "aa bb")
    idf_bb = math.log(3 / 2) + 1.0
    raw = np.zeros(2)
    raw[model.vocabulary["aa"]] = 1.0 * 1.0
    raw[model.vocabulary["bb"]] = 1.0 * idf_bb
    expected = raw / np.linalg.norm(raw)
    np.testing.assert_allclose(vec.to_dense(), expected, atol=1e-12)


def test_transform_is_pure():
    model = fit_vectorizer(["aa bb cc"], (1, 2), Weighting.TFIDF)
    a = transform(model, "aa cc")
    b = transform(model, "aa cc")
    assert a == b


# ---------------------------------------------------------------------------
# sparse vector invariants + serialization


def test_sparse_vector_validates():
    with pytest.raises(ValueError):
        SparseVector(indices=(2, 1), values=(1.0, 1.0), dim=3)  # not increasing
    with pytest.raises(ValueError):
        SparseVector(indices=(0,), values=(0.0,), dim=3)  # zero value
    with pytest.raises(ValueError):
        SparseVector(indices=(5,), values=(1.0,), dim=3)  # out of range
    with pytest.raises(ValueError):
        SparseVector(indices=(0, 1), values=(1.0,), dim=3)  # length mismatch


def test_vectorizer_round_trip(tmp_path):
    model = fit_vectorizer(["aa bb cc", "bb cc dd"], (1, 2), Weighting.TFIDF)
    path = tmp_path / "vec.json"
    save_vectorizer(model, str(path))
    again = load_vectorizer(str(path))
    assert again.vocabulary == model.vocabulary
    assert again.weighting is model.weighting
    assert again.ngram_range == model.ngram_range
    np.testing.assert_allclose(again.idf, model.idf)
    probe = "bb cc unseen"
    assert transform(again, probe) == transform(model, probe)
