"""Shared types for the classical classifier backends."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from ..features import SparseVector

FeatureRow = Union[SparseVector, np.ndarray, Sequence[float]]


class Backend(Enum):
    KNN = "knn"
    KNN_BALANCED = "knn_balanced"
    RANDOM_FOREST = "random_forest"
    LINEAR_SVM = "linear_svm"
    SOFTMAX_REGRESSION = "softmax_regression"
    GRADIENT_BOOSTED_TREES = "gradient_boosted_trees"


def _row_dim(row: FeatureRow) -> int:
    if isinstance(row, SparseVector):
        return row.dim
    arr = np.asarray(row)
    if arr.ndim != 1:
        raise ValueError("feature rows must be 1-dimensional")
    return arr.shape[0]


class LabeledMatrix:
    """Feature rows (sparse or dense, uniform dim) with parallel class ids.

    ``labels`` are integer ids into ``class_names``.  Rows are either all
    SparseVector or all dense; the stacked matrix is built lazily as a SciPy
    CSR matrix or a NumPy array.
    """

    def __init__(
        self,
        rows: Sequence[FeatureRow],
        labels: Sequence[int],
        class_names: Sequence[str],
    ):
        if len(rows) != len(labels):
            raise ValueError(f"{len(rows)} rows but {len(labels)} labels")
        if len(rows) == 0:
            raise ValueError("LabeledMatrix needs at least one row")
        self.class_names = list(class_names)
        self.y = np.asarray(labels, dtype=np.int64)
        if self.y.size and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise ValueError("every label must be a class id < len(class_names)")
        self.is_sparse = isinstance(rows[0], SparseVector)
        dims = {_row_dim(r) for r in rows}
        if len(dims) != 1:
            raise ValueError(f"inconsistent feature dims across rows: {sorted(dims)}")
        self.dim = dims.pop()
        if self.is_sparse:
            if not all(isinstance(r, SparseVector) for r in rows):
                raise ValueError("rows must be uniformly sparse or uniformly dense")
            self.X = stack_sparse(rows, self.dim)
        else:
            self.X = np.asarray([np.asarray(r, dtype=float) for r in rows])

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def dense(self) -> np.ndarray:
        return self.X.toarray() if self.is_sparse else self.X

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def subset(self, indices: np.ndarray) -> "LabeledMatrix":
        sub = LabeledMatrix.__new__(LabeledMatrix)
        sub.class_names = self.class_names
        sub.y = self.y[indices]
        sub.is_sparse = self.is_sparse
        sub.dim = self.dim
        sub.X = self.X[indices]
        return sub


def stack_sparse(rows: Sequence[SparseVector], dim: int) -> sp.csr_matrix:
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, r in enumerate(rows):
        indptr[i + 1] = indptr[i] + r.nnz
    indices = np.concatenate([r.indices for r in rows]) if rows else np.empty(0, np.int64)
    data = np.concatenate([r.values for r in rows]) if rows else np.empty(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), dim))


def as_query(x: FeatureRow, dim: int) -> np.ndarray:
    """Normalize a single input row to a dense 1-D array of the given dim."""
    if isinstance(x, SparseVector):
        if x.dim != dim:
            raise ValueError(f"query dim {x.dim} does not match training dim {dim}")
        return x.to_dense()
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ValueError(f"query shape {arr.shape} does not match training dim {dim}")
    return arr


@dataclass(frozen=True)
class KnnParams:
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: str | int = "sqrt"
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass(frozen=True)
class SvmParams:
    reg: float = 0.01
    epochs: int = 1000

    def __post_init__(self) -> None:
        if self.reg <= 0:
            raise ValueError("reg must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class SoftmaxParams:
    learning_rate: float = 0.5
    max_iter: int = 1000
    tol: float = 1e-4
    n_iter_no_change: int = 10

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass(frozen=True)
class GbtParams:
    n_rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    subsample: float = 1.0

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        # Rate 0 is allowed: it degenerates to the class-prior model.
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 < self.subsample <= 1:
            raise ValueError("subsample must be in (0, 1]")


class TrainedClassifier:
    """Base for fitted models: immutable, deterministic prediction."""

    backend: Backend

    def __init__(self, class_names: Sequence[str], dim: int):
        self.class_names = list(class_names)
        self.dim = dim

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def predict(self, x: FeatureRow) -> int:
        raise NotImplementedError

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        raise NotImplementedError

    def predict_many(self, rows: Sequence[FeatureRow]) -> list[int]:
        return [self.predict(r) for r in rows]

    def to_json(self) -> dict:
        raise NotImplementedError
