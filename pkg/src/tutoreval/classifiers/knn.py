"""k-nearest-neighbors over cosine distance, with balanced under-sampling.

Predictions use majority vote over the k nearest training rows; vote ties
fall back to the smaller summed distance, then the lower class id.  Between
rows at equal distance, the lower training index wins, which pins the
neighbor set deterministically.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..features import SparseVector
from ._base import Backend, FeatureRow, KnnParams, LabeledMatrix, TrainedClassifier, as_query


class KnnClassifier(TrainedClassifier):
    backend = Backend.KNN

    def __init__(self, data: LabeledMatrix, k: int):
        super().__init__(data.class_names, data.dim)
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > data.n:
            raise ValueError(f"k={k} exceeds the {data.n} stored training rows")
        self.k = k
        self._X = data.X
        self._y = data.y
        # Row norms fixed at fit time; zero rows get cosine similarity 0.
        if data.is_sparse:
            sq = np.asarray(self._X.multiply(self._X).sum(axis=1)).ravel()
        else:
            sq = np.einsum("ij,ij->i", self._X, self._X)
        self._norms = np.sqrt(sq)

    def _distances(self, x: FeatureRow) -> np.ndarray:
        q = as_query(x, self.dim)
        qnorm = np.sqrt(np.dot(q, q))
        dots = np.asarray(self._X @ q).ravel() if sp.issparse(self._X) else self._X @ q
        denom = self._norms * qnorm
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
        return 1.0 - sims

    def _neighbors(self, x: FeatureRow) -> np.ndarray:
        d = self._distances(x)
        order = np.lexsort((np.arange(d.shape[0]), d))
        return order[: self.k]

    def _vote(self, neighbor_idx: np.ndarray, d: np.ndarray) -> tuple[int, np.ndarray]:
        votes = np.bincount(self._y[neighbor_idx], minlength=self.n_classes)
        best = votes.max()
        tied = np.flatnonzero(votes == best)
        if len(tied) > 1:
            summed = np.array(
                [d[neighbor_idx[self._y[neighbor_idx] == c]].sum() for c in tied]
            )
            tied = tied[np.flatnonzero(summed == summed.min())]
        return int(tied[0]), votes

    def predict(self, x: FeatureRow) -> int:
        d = self._distances(x)
        neighbors = np.lexsort((np.arange(d.shape[0]), d))[: self.k]
        label, _ = self._vote(neighbors, d)
        return label

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        d = self._distances(x)
        neighbors = np.lexsort((np.arange(d.shape[0]), d))[: self.k]
        votes = np.bincount(self._y[neighbors], minlength=self.n_classes)
        return votes / votes.sum()

    def to_json(self) -> dict:
        doc: dict = {
            "backend": self.backend.value,
            "class_names": self.class_names,
            "dim": self.dim,
            "k": self.k,
            "labels": self._y.tolist(),
        }
        if sp.issparse(self._X):
            csr = self._X.tocsr()
            doc["rows"] = {
                "format": "csr",
                "indptr": csr.indptr.tolist(),
                "indices": csr.indices.tolist(),
                "data": csr.data.tolist(),
            }
        else:
            doc["rows"] = {"format": "dense", "data": self._X.tolist()}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "KnnClassifier":
        rows = doc["rows"]
        dim = int(doc["dim"])
        labels = doc["labels"]
        if rows["format"] == "csr":
            X = sp.csr_matrix(
                (
                    np.asarray(rows["data"], dtype=float),
                    np.asarray(rows["indices"], dtype=np.int64),
                    np.asarray(rows["indptr"], dtype=np.int64),
                ),
                shape=(len(labels), dim),
            )
            feats: list = []
            for i in range(X.shape[0]):
                s = X.getrow(i)
                order = np.argsort(s.indices)
                feats.append(
                    SparseVector(
                        indices=s.indices[order].astype(np.int64),
                        values=s.data[order].astype(float),
                        dim=dim,
                    )
                )
            data = LabeledMatrix(feats, labels, doc["class_names"])
        else:
            data = LabeledMatrix(np.asarray(rows["data"], dtype=float), labels, doc["class_names"])
        return cls(data, k=int(doc["k"]))


def balanced_subset_indices(y: np.ndarray, n_classes: int, seed: int) -> np.ndarray:
    """Pick a perfectly balanced subset: min-class-count rows per class.

    Rows are chosen uniformly at random without replacement using the given
    seed; the returned indices are sorted so row order stays deterministic.
    """
    counts = np.bincount(y, minlength=n_classes)
    present = np.flatnonzero(counts > 0)
    if len(present) == 0:
        raise ValueError("no labeled rows to balance")
    if np.any(counts == 0):
        missing = [int(c) for c in np.flatnonzero(counts == 0)]
        raise ValueError(f"every class needs at least one example; class ids {missing} have none")
    keep_per_class = int(counts.min())
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    for c in range(n_classes):
        idx = np.flatnonzero(y == c)
        kept.append(rng.choice(idx, size=keep_per_class, replace=False))
    return np.sort(np.concatenate(kept))


def fit_knn(data: LabeledMatrix, params: KnnParams) -> KnnClassifier:
    return KnnClassifier(data, k=params.k)


def fit_knn_balanced(data: LabeledMatrix, k: int, seed: int) -> KnnClassifier:
    """Fit k-NN on a perfectly balanced under-sample of the training data.

    Retains exactly min-class-count examples per class (seeded uniform
    choice), then fits a plain cosine k-NN on the retained rows.  ``k`` may
    not exceed the retained set size.
    """
    keep = balanced_subset_indices(data.y, data.n_classes, seed)
    if k > len(keep):
        raise ValueError(f"k={k} exceeds the balanced subset size {len(keep)}")
    model = KnnClassifier(data.subset(keep), k=k)
    model.backend = Backend.KNN_BALANCED
    return model
