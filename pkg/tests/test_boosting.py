"""Gradient-boosted trees: prior degeneration, separable fits, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from tutoreval.classifiers import Backend, LabeledMatrix, fit, model_from_json, model_to_json
from tutoreval.classifiers._base import GbtParams
from tutoreval.classifiers.boosting import RegressionTree, fit_gradient_boosted_trees


def _blobs(rng, per_class: int, n_classes: int, dim: int = 4, scale: float = 0.2):
    rows, labels = [], []
    for c in range(n_classes):
        center = np.zeros(dim)
        center[c % dim] = 4.0 + c
        for _ in range(per_class):
            rows.append(center + rng.normal(scale=scale, size=dim))
            labels.append(c)
    return LabeledMatrix(rows, labels, [f"c{i}" for i in range(n_classes)])


def test_zero_learning_rate_degenerates_to_class_prior():
    rng = np.random.default_rng(0)
    for trial in range(5):
        counts = rng.integers(1, 30, size=3)
        rows, labels = [], []
        for c, cnt in enumerate(counts):
            for _ in range(cnt):
                rows.append(rng.normal(size=4))
                labels.append(c)
        data = LabeledMatrix(rows, labels, ["a", "b", "c"])
        model = fit_gradient_boosted_trees(
            data, GbtParams(n_rounds=10, learning_rate=0.0), seed=trial
        )
        prior_argmax = int(np.argmax(np.bincount(labels, minlength=3)))
        for _ in range(20):
            assert model.predict(rng.normal(size=4)) == prior_argmax


def test_fits_separable_blobs():
    rng = np.random.default_rng(1)
    data = _blobs(rng, per_class=12, n_classes=3)
    model = fit(Backend.GRADIENT_BOOSTED_TREES, data, GbtParams(n_rounds=20), seed=0)
    pred = [model.predict(np.asarray(r)) for r in data.dense()]
    assert pred == data.y.tolist()


def test_proba_on_simplex():
    rng = np.random.default_rng(2)
    data = _blobs(rng, per_class=8, n_classes=4, dim=5)
    model = fit_gradient_boosted_trees(data, GbtParams(n_rounds=5), seed=0)
    for _ in range(30):
        p = model.predict_proba(rng.normal(size=5))
        assert np.all(p >= 0)
        assert abs(p.sum() - 1.0) < 1e-9


def test_absent_class_never_predicted():
    # class id 2 exists in class_names but has zero training rows
    rng = np.random.default_rng(3)
    rows = [rng.normal(size=3) for _ in range(20)]
    labels = [i % 2 for i in range(20)]
    data = LabeledMatrix(rows, labels, ["a", "b", "never"])
    model = fit_gradient_boosted_trees(data, GbtParams(n_rounds=5), seed=0)
    for _ in range(40):
        q = rng.normal(scale=5.0, size=3)
        assert model.predict(q) != 2
        assert model.predict_proba(q)[2] < 1e-12


def test_subsample_is_seeded_and_deterministic():
    rng = np.random.default_rng(4)
    data = _blobs(rng, per_class=15, n_classes=2, scale=1.5)
    probes = [rng.normal(size=4) for _ in range(25)]
    params = GbtParams(n_rounds=12, subsample=0.6)
    a = fit_gradient_boosted_trees(data, params, seed=11)
    b = fit_gradient_boosted_trees(data, params, seed=11)
    c = fit_gradient_boosted_trees(data, params, seed=12)
    pa = [a.predict(q) for q in probes]
    assert pa == [b.predict(q) for q in probes]
    proba_a = np.array([a.predict_proba(q) for q in probes])
    proba_c = np.array([c.predict_proba(q) for q in probes])
    assert not np.allclose(proba_a, proba_c)


def test_param_validation():
    with pytest.raises(ValueError):
        GbtParams(n_rounds=0)
    with pytest.raises(ValueError):
        GbtParams(learning_rate=-0.1)
    with pytest.raises(ValueError):
        GbtParams(subsample=0.0)
    with pytest.raises(ValueError):
        GbtParams(subsample=1.2)
    GbtParams(learning_rate=0.0)  # rate 0 is legal: the prior-only model


def test_regression_tree_fits_step_function():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    target = np.array([0.0, 0.0, 10.0, 10.0])
    tree = RegressionTree(max_depth=2).fit(X, target)
    np.testing.assert_allclose(tree.predict(X), target)


def test_round_trip_serialization():
    rng = np.random.default_rng(6)
    data = _blobs(rng, per_class=10, n_classes=3)
    model = fit_gradient_boosted_trees(data, GbtParams(n_rounds=8), seed=2)
    again = model_from_json(model_to_json(model))
    for _ in range(20):
        q = rng.normal(size=4)
        assert model.predict(q) == again.predict(q)
        np.testing.assert_allclose(model.predict_proba(q), again.predict_proba(q))
