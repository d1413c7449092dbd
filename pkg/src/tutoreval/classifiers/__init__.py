"""Classical classifiers over sparse or dense feature vectors.

One ``fit`` entry point dispatches to the backends used across the tracks:
cosine k-NN (optionally on a balanced under-sample), a Gini random forest,
one-vs-rest linear SVM, multinomial softmax regression, and gradient-boosted
trees.  Every fit is a pure function of (data, params, seed), and fitted
models serialize to versioned JSON for CLI reuse.
"""

from __future__ import annotations

import json

import numpy as np

from ._base import (
    Backend,
    FeatureRow,
    ForestParams,
    GbtParams,
    KnnParams,
    LabeledMatrix,
    SoftmaxParams,
    SvmParams,
    TrainedClassifier,
)
from .boosting import GradientBoostedTreesClassifier, RegressionTree, fit_gradient_boosted_trees
from .knn import KnnClassifier, balanced_subset_indices, fit_knn, fit_knn_balanced
from .linear import (
    LinearSvmClassifier,
    SoftmaxRegressionClassifier,
    fit_linear_svm,
    fit_softmax_regression,
)
from .trees import DecisionTree, RandomForestClassifier, fit_random_forest

__all__ = [
    "Backend",
    "LabeledMatrix",
    "TrainedClassifier",
    "KnnParams",
    "ForestParams",
    "SvmParams",
    "SoftmaxParams",
    "GbtParams",
    "KnnClassifier",
    "RandomForestClassifier",
    "LinearSvmClassifier",
    "SoftmaxRegressionClassifier",
    "GradientBoostedTreesClassifier",
    "DecisionTree",
    "RegressionTree",
    "fit",
    "fit_knn_balanced",
    "balanced_subset_indices",
    "concat_features",
    "default_params",
    "save_model",
    "load_model",
]

_MODEL_FORMAT_VERSION = 1

_PARAM_TYPES = {
    Backend.KNN: KnnParams,
    Backend.KNN_BALANCED: KnnParams,
    Backend.RANDOM_FOREST: ForestParams,
    Backend.LINEAR_SVM: SvmParams,
    Backend.SOFTMAX_REGRESSION: SoftmaxParams,
    Backend.GRADIENT_BOOSTED_TREES: GbtParams,
}


def default_params(backend: Backend):
    """Default hyperparameters for a backend (k-NN variants require k)."""
    cls = _PARAM_TYPES[backend]
    if cls is KnnParams:
        return KnnParams(k=9)
    return cls()


def fit(backend: Backend, data: LabeledMatrix, params=None, seed: int = 0) -> TrainedClassifier:
    """Train a classifier; deterministic for fixed (data, params, seed)."""
    if params is None:
        params = default_params(backend)
    expected = _PARAM_TYPES[backend]
    if not isinstance(params, expected):
        raise ValueError(f"{backend.value} expects {expected.__name__}, got {type(params).__name__}")
    if backend is Backend.KNN:
        return fit_knn(data, params)
    if backend is Backend.KNN_BALANCED:
        return fit_knn_balanced(data, params.k, seed)
    if backend is Backend.RANDOM_FOREST:
        return fit_random_forest(data, params, seed)
    if backend is Backend.LINEAR_SVM:
        return fit_linear_svm(data, params)
    if backend is Backend.SOFTMAX_REGRESSION:
        return fit_softmax_regression(data, params)
    if backend is Backend.GRADIENT_BOOSTED_TREES:
        return fit_gradient_boosted_trees(data, params, seed)
    raise ValueError(f"unknown backend {backend!r}")


def concat_features(
    resp_emb: np.ndarray,
    hist_emb: np.ndarray | None = None,
    llm_probs: np.ndarray | None = None,
) -> np.ndarray:
    """Concatenate (response embedding, history embedding, label probabilities).

    Parts are joined in that fixed order; absent parts are skipped, so the
    output dim is the sum of the present part dims.  ``llm_probs`` must be a
    3-vector when given.
    """
    parts = [np.asarray(resp_emb, dtype=float)]
    if parts[0].ndim != 1:
        raise ValueError("response embedding must be 1-dimensional")
    if hist_emb is not None:
        h = np.asarray(hist_emb, dtype=float)
        if h.ndim != 1:
            raise ValueError("history embedding must be 1-dimensional")
        parts.append(h)
    if llm_probs is not None:
        p = np.asarray(llm_probs, dtype=float)
        if p.shape != (3,):
            raise ValueError(f"llm_probs must be a 3-vector, got shape {p.shape}")
        parts.append(p)
    return np.concatenate(parts)


_MODEL_CLASSES = {
    Backend.KNN.value: KnnClassifier,
    Backend.KNN_BALANCED.value: KnnClassifier,
    Backend.RANDOM_FOREST.value: RandomForestClassifier,
    Backend.LINEAR_SVM.value: LinearSvmClassifier,
    Backend.SOFTMAX_REGRESSION.value: SoftmaxRegressionClassifier,
    Backend.GRADIENT_BOOSTED_TREES.value: GradientBoostedTreesClassifier,
}


def model_to_json(model: TrainedClassifier) -> dict:
    doc = model.to_json()
    doc["format_version"] = _MODEL_FORMAT_VERSION
    return doc


def model_from_json(doc: dict) -> TrainedClassifier:
    if doc.get("format_version") != _MODEL_FORMAT_VERSION:
        raise ValueError("not a recognized model file")
    backend = doc.get("backend")
    cls = _MODEL_CLASSES.get(backend)
    if cls is None:
        raise ValueError(f"unknown model backend {backend!r}")
    model = cls.from_json(doc)
    model.backend = Backend(backend)
    return model


def save_model(model: TrainedClassifier, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh)
        fh.write("\n")


def load_model(path: str) -> TrainedClassifier:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
