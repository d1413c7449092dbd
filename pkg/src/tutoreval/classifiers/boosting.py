"""Gradient-boosted trees for multiclass softmax classification.

Raw scores start at the log class priors; each round fits one depth-limited
regression tree per class to the softmax residual (one-hot minus predicted
probability) and adds its leaf means scaled by the learning rate.  With a
learning rate of zero the model degenerates to the class-prior argmax.
"""

from __future__ import annotations

import numpy as np

from ._base import Backend, FeatureRow, GbtParams, LabeledMatrix, TrainedClassifier, as_query

_NEG_INF_SCORE = -1e10  # stands in for log(0) so softmax stays NaN-free


class _RegNode:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class RegressionTree:
    """Depth-limited regression tree; splits minimize summed squared error."""

    def __init__(self, max_depth: int):
        self.max_depth = max_depth
        self.root: _RegNode | None = None

    def fit(self, X: np.ndarray, target: np.ndarray) -> "RegressionTree":
        self.root = self._grow(X, target, np.arange(X.shape[0]), 0)
        return self

    def _grow(self, X, target, idx, depth) -> _RegNode:
        node = _RegNode()
        node.value = float(target[idx].mean())
        if depth >= self.max_depth or idx.shape[0] < 2:
            return node
        split = self._best_split(X, target, idx)
        if split is None:
            return node
        f, thr, left_mask = split
        node.feature = f
        node.threshold = thr
        node.left = self._grow(X, target, idx[left_mask], depth + 1)
        node.right = self._grow(X, target, idx[~left_mask], depth + 1)
        return node

    @staticmethod
    def _best_split(X, target, idx):
        n = idx.shape[0]
        t = target[idx]
        total = t.sum()
        best_sse = float(np.dot(t, t) - total * total / n)  # SSE with no split
        best = None
        for f in range(X.shape[1]):
            vals = X[idx, f]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            st = t[order]
            csum = np.cumsum(st)
            csq = np.cumsum(st * st)
            boundaries = np.flatnonzero(sv[1:] > sv[:-1])
            for b in boundaries:
                nl = b + 1
                nr = n - nl
                sl, sr = csum[b], total - csum[b]
                sse = (csq[b] - sl * sl / nl) + ((csq[-1] - csq[b]) - sr * sr / nr)
                if sse < best_sse - 1e-12:
                    best_sse = sse
                    best = (f, float((sv[b] + sv[b + 1]) / 2.0))
        if best is None:
            return None
        f, thr = best
        return f, thr, X[idx, f] <= thr

    def predict_one(self, x: np.ndarray) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(x) for x in X])

    def to_json(self) -> dict:
        def enc(node: _RegNode) -> dict:
            if node.is_leaf:
                return {"value": node.value}
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "left": enc(node.left),
                "right": enc(node.right),
                "value": node.value,
            }

        return {"max_depth": self.max_depth, "root": enc(self.root)}

    @classmethod
    def from_json(cls, doc: dict) -> "RegressionTree":
        def dec(obj: dict) -> _RegNode:
            node = _RegNode()
            node.value = float(obj["value"])
            if "feature" in obj:
                node.feature = int(obj["feature"])
                node.threshold = float(obj["threshold"])
                node.left = dec(obj["left"])
                node.right = dec(obj["right"])
            return node

        tree = cls(int(doc["max_depth"]))
        tree.root = dec(doc["root"])
        return tree


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class GradientBoostedTreesClassifier(TrainedClassifier):
    backend = Backend.GRADIENT_BOOSTED_TREES

    def __init__(self, class_names, dim, base_scores: np.ndarray, learning_rate: float,
                 trees: list[list[RegressionTree]]):
        super().__init__(class_names, dim)
        self.base_scores = np.asarray(base_scores, dtype=float)
        self.learning_rate = learning_rate
        self.trees = trees  # one list of per-class trees per boosting round

    def _raw_scores(self, x: np.ndarray) -> np.ndarray:
        scores = self.base_scores.copy()
        for round_trees in self.trees:
            for c, tree in enumerate(round_trees):
                scores[c] += self.learning_rate * tree.predict_one(x)
        return scores

    def predict(self, x: FeatureRow) -> int:
        return int(np.argmax(self._raw_scores(as_query(x, self.dim))))

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        return _softmax(self._raw_scores(as_query(x, self.dim)))

    def to_json(self) -> dict:
        return {
            "backend": self.backend.value,
            "class_names": self.class_names,
            "dim": self.dim,
            "base_scores": self.base_scores.tolist(),
            "learning_rate": self.learning_rate,
            "rounds": [[t.to_json() for t in rt] for rt in self.trees],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GradientBoostedTreesClassifier":
        trees = [[RegressionTree.from_json(t) for t in rt] for rt in doc["rounds"]]
        return cls(
            doc["class_names"],
            int(doc["dim"]),
            np.asarray(doc["base_scores"], dtype=float),
            float(doc["learning_rate"]),
            trees,
        )


def fit_gradient_boosted_trees(
    data: LabeledMatrix, params: GbtParams, seed: int
) -> GradientBoostedTreesClassifier:
    """Train the boosted ensemble (defaults: 100 rounds, depth 3, rate 0.1,
    subsample 1.0, seeded)."""
    X = data.dense()
    n, k = data.n, data.n_classes
    priors = data.class_counts() / n
    base = np.where(priors > 0, np.log(np.where(priors > 0, priors, 1.0)), _NEG_INF_SCORE)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), data.y] = 1.0

    rng = np.random.default_rng(seed)
    scores = np.tile(base, (n, 1))
    all_rounds: list[list[RegressionTree]] = []
    for _ in range(params.n_rounds):
        probs = _softmax(scores)
        residual = onehot - probs
        if params.subsample < 1.0:
            m = max(1, int(round(params.subsample * n)))
            rows = np.sort(rng.choice(n, size=m, replace=False))
        else:
            rows = np.arange(n)
        round_trees = []
        for c in range(k):
            tree = RegressionTree(max_depth=params.max_depth).fit(X[rows], residual[rows, c])
            round_trees.append(tree)
            scores[:, c] += params.learning_rate * tree.predict(X)
        all_rounds.append(round_trees)
    return GradientBoostedTreesClassifier(
        data.class_names, data.dim, base, params.learning_rate, all_rounds
    )
