"""Linear models: one-vs-rest hinge-loss SVM and multinomial softmax regression.

The SVM trains each class against the rest by full-batch sub-gradient descent
on regularized hinge loss and exposes margins, not probabilities.  Softmax
regression is the zero-hidden-layer network: full-batch gradient descent with
backtracking (so the training loss never increases across accepted steps),
stopping once improvement stays within tolerance for ten straight iterations.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ._base import (
    Backend,
    FeatureRow,
    LabeledMatrix,
    SoftmaxParams,
    SvmParams,
    TrainedClassifier,
    as_query,
)


class LinearSvmClassifier(TrainedClassifier):
    backend = Backend.LINEAR_SVM

    def __init__(self, class_names, dim, W: np.ndarray, b: np.ndarray):
        super().__init__(class_names, dim)
        self.W = W  # (n_classes, dim)
        self.b = b

    def decision_function(self, x: FeatureRow) -> np.ndarray:
        q = as_query(x, self.dim)
        return self.W @ q + self.b

    def predict(self, x: FeatureRow) -> int:
        return int(np.argmax(self.decision_function(x)))

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        raise ValueError("LinearSvm exposes margins only; it does not support probabilities")

    def to_json(self) -> dict:
        return {
            "backend": self.backend.value,
            "class_names": self.class_names,
            "dim": self.dim,
            "weights": self.W.tolist(),
            "bias": self.b.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LinearSvmClassifier":
        return cls(
            doc["class_names"],
            int(doc["dim"]),
            np.asarray(doc["weights"], dtype=float),
            np.asarray(doc["bias"], dtype=float),
        )


def fit_linear_svm(data: LabeledMatrix, params: SvmParams) -> LinearSvmClassifier:
    if len(np.unique(data.y)) < 2:
        raise ValueError("linear SVM needs at least two classes in the training data")
    X = data.X
    n = data.n
    W = np.zeros((data.n_classes, data.dim))
    b = np.zeros(data.n_classes)
    for c in range(data.n_classes):
        yc = np.where(data.y == c, 1.0, -1.0)
        w = np.zeros(data.dim)
        bc = 0.0
        for t in range(params.epochs):
            margins = yc * ((X @ w) + bc)
            viol = margins < 1.0
            eta = 1.0 / (params.reg * (t + 1))
            if np.any(viol):
                yv = yc[viol]
                if sp.issparse(X):
                    grad_w = params.reg * w - np.asarray(X[viol].T @ yv).ravel() / n
                else:
                    grad_w = params.reg * w - (X[viol].T @ yv) / n
                grad_b = -yv.sum() / n
            else:
                grad_w = params.reg * w
                grad_b = 0.0
            w = w - eta * grad_w
            bc = bc - eta * grad_b
        W[c] = w
        b[c] = bc
    return LinearSvmClassifier(data.class_names, data.dim, W, b)


class SoftmaxRegressionClassifier(TrainedClassifier):
    backend = Backend.SOFTMAX_REGRESSION

    def __init__(self, class_names, dim, W: np.ndarray, b: np.ndarray):
        super().__init__(class_names, dim)
        self.W = W
        self.b = b

    def _scores(self, x: FeatureRow) -> np.ndarray:
        q = as_query(x, self.dim)
        return self.W @ q + self.b

    def predict(self, x: FeatureRow) -> int:
        return int(np.argmax(self._scores(x)))

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        z = self._scores(x)
        z = z - z.max()
        e = np.exp(z)
        return e / e.sum()

    def to_json(self) -> dict:
        return {
            "backend": self.backend.value,
            "class_names": self.class_names,
            "dim": self.dim,
            "weights": self.W.tolist(),
            "bias": self.b.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SoftmaxRegressionClassifier":
        return cls(
            doc["class_names"],
            int(doc["dim"]),
            np.asarray(doc["weights"], dtype=float),
            np.asarray(doc["bias"], dtype=float),
        )


def _xent_loss(X, y_onehot, W, b) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and predicted probabilities for the whole batch."""
    scores = (X @ W.T) + b
    scores = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    probs = e / e.sum(axis=1, keepdims=True)
    eps = 1e-12
    loss = -float(np.mean(np.log(np.clip((probs * y_onehot).sum(axis=1), eps, None))))
    return loss, probs


def fit_softmax_regression(
    data: LabeledMatrix, params: SoftmaxParams
) -> SoftmaxRegressionClassifier:
    """Full-batch gradient descent until the loss stops improving by more
    than ``tol`` for ``n_iter_no_change`` consecutive accepted iterations."""
    if len(np.unique(data.y)) < 2 and params.max_iter > 0:
        raise ValueError("softmax regression needs at least two classes in the training data")
    X = data.X
    n, k = data.n, data.n_classes
    onehot = np.zeros((n, k))
    onehot[np.arange(n), data.y] = 1.0
    W = np.zeros((k, data.dim))
    b = np.zeros(k)

    loss, probs = _xent_loss(X, onehot, W, b)
    lr = params.learning_rate
    stall = 0
    for _ in range(params.max_iter):
        err = probs - onehot  # (n, k)
        if sp.issparse(X):
            grad_W = np.asarray((X.T @ err).T) / n
        else:
            grad_W = (err.T @ X) / n
        grad_b = err.sum(axis=0) / n
        # Backtrack until the step does not increase the loss.
        accepted = False
        for _attempt in range(30):
            W_new = W - lr * grad_W
            b_new = b - lr * grad_b
            new_loss, new_probs = _xent_loss(X, onehot, W_new, b_new)
            if new_loss <= loss:
                accepted = True
                break
            lr /= 2.0
        if not accepted:
            break
        W, b, probs = W_new, b_new, new_probs
        improvement = loss - new_loss
        loss = new_loss
        stall = stall + 1 if improvement <= params.tol else 0
        if stall >= params.n_iter_no_change:
            break
    return SoftmaxRegressionClassifier(data.class_names, data.dim, W, b)
