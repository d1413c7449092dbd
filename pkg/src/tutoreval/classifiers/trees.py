"""Decision trees on Gini impurity and the bagged random forest.

Split search sorts each candidate feature once and sweeps boundaries between
distinct values with prefix class counts; strictly-better comparisons keep
the first-found split, so fits are deterministic for a fixed seed.  Sparse
input rows are densified here: tree training needs column access.
"""

from __future__ import annotations

import numpy as np

from ._base import Backend, FeatureRow, ForestParams, LabeledMatrix, TrainedClassifier, as_query


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "counts")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.counts = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _gini_from_counts(counts: np.ndarray, n: int) -> float:
    p = counts / n
    return 1.0 - float(np.dot(p, p))


def _best_split(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray, features: np.ndarray, n_classes: int
):
    """Return (feature, threshold, left_mask) minimizing weighted Gini, or None."""
    n = idx.shape[0]
    best_cost = np.inf
    best = None
    parent_counts = np.bincount(y[idx], minlength=n_classes)
    if _gini_from_counts(parent_counts, n) == 0.0:
        return None
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[idx[order]]
        # Prefix class counts: left side of a cut after position i is sy[:i+1].
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sy] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        boundaries = np.flatnonzero(sv[1:] > sv[:-1])
        for b in boundaries:
            n_left = b + 1
            left_counts = prefix[b]
            right_counts = parent_counts - left_counts
            cost = (
                n_left * _gini_from_counts(left_counts, n_left)
                + (n - n_left) * _gini_from_counts(right_counts, n - n_left)
            ) / n
            if cost < best_cost:
                best_cost = cost
                best = (int(f), float((sv[b] + sv[b + 1]) / 2.0))
    if best is None:
        return None
    f, thr = best
    return f, thr, X[idx, f] <= thr


class DecisionTree:
    """A single Gini classification tree; leaves store class counts."""

    def __init__(
        self,
        max_depth: int | None = None,
        min_samples_split: int = 2,
        max_features: int | None = None,
    ):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.root: _Node | None = None
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator):
        self.n_classes = n_classes
        self.root = self._grow(X, y, np.arange(X.shape[0]), 0, rng)
        return self

    def _grow(self, X, y, idx, depth, rng) -> _Node:
        node = _Node()
        node.counts = np.bincount(y[idx], minlength=self.n_classes)
        if (
            (self.max_depth is not None and depth >= self.max_depth)
            or idx.shape[0] < self.min_samples_split
        ):
            return node
        d = X.shape[1]
        n_feat = self.max_features if self.max_features is not None else d
        n_feat = min(n_feat, d)
        features = np.sort(rng.choice(d, size=n_feat, replace=False))
        split = _best_split(X, y, idx, features, self.n_classes)
        if split is None:
            return node
        f, thr, left_mask = split
        node.feature = f
        node.threshold = thr
        node.left = self._grow(X, y, idx[left_mask], depth + 1, rng)
        node.right = self._grow(X, y, idx[~left_mask], depth + 1, rng)
        return node

    def leaf_counts(self, x: np.ndarray) -> np.ndarray:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.counts

    def vote(self, x: np.ndarray) -> int:
        # argmax breaks count ties toward the lower class id
        return int(np.argmax(self.leaf_counts(x)))

    def to_json(self) -> dict:
        def enc(node: _Node) -> dict:
            if node.is_leaf:
                return {"counts": node.counts.tolist()}
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "left": enc(node.left),
                "right": enc(node.right),
                "counts": node.counts.tolist(),
            }

        return {"n_classes": self.n_classes, "root": enc(self.root)}

    @classmethod
    def from_json(cls, doc: dict) -> "DecisionTree":
        def dec(obj: dict) -> _Node:
            node = _Node()
            node.counts = np.asarray(obj["counts"], dtype=np.int64)
            if "feature" in obj:
                node.feature = int(obj["feature"])
                node.threshold = float(obj["threshold"])
                node.left = dec(obj["left"])
                node.right = dec(obj["right"])
            return node

        tree = cls()
        tree.n_classes = int(doc["n_classes"])
        tree.root = dec(doc["root"])
        return tree


class RandomForestClassifier(TrainedClassifier):
    """Bagged Gini trees; the forest probability is the tree-vote fraction."""

    backend = Backend.RANDOM_FOREST

    def __init__(self, class_names, dim, trees: list[DecisionTree]):
        super().__init__(class_names, dim)
        self.trees = trees

    def predict(self, x: FeatureRow) -> int:
        return int(np.argmax(self._votes(x)))

    def predict_proba(self, x: FeatureRow) -> np.ndarray:
        votes = self._votes(x)
        return votes / votes.sum()

    def _votes(self, x: FeatureRow) -> np.ndarray:
        q = as_query(x, self.dim)
        votes = np.zeros(self.n_classes)
        for t in self.trees:
            votes[t.vote(q)] += 1
        return votes

    def to_json(self) -> dict:
        return {
            "backend": self.backend.value,
            "class_names": self.class_names,
            "dim": self.dim,
            "trees": [t.to_json() for t in self.trees],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RandomForestClassifier":
        trees = [DecisionTree.from_json(t) for t in doc["trees"]]
        return cls(doc["class_names"], int(doc["dim"]), trees)


def fit_random_forest(
    data: LabeledMatrix, params: ForestParams, seed: int
) -> RandomForestClassifier:
    """Train a seeded random forest (defaults: 100 trees, Gini, sqrt features,
    bootstrap sampling)."""
    X = data.dense()
    if params.max_features == "sqrt":
        n_feat = max(1, int(np.sqrt(data.dim)))
    elif params.max_features == "all":
        n_feat = data.dim
    else:
        n_feat = int(params.max_features)
        if n_feat < 1:
            raise ValueError("max_features must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(params.n_trees)
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        if params.bootstrap:
            sample = rng.integers(0, data.n, size=data.n)
            Xs, ys = X[sample], data.y[sample]
        else:
            Xs, ys = X, data.y
        tree = DecisionTree(
            max_depth=params.max_depth,
            min_samples_split=params.min_samples_split,
            max_features=n_feat,
        )
        tree.fit(Xs, ys, data.n_classes, rng)
        trees.append(tree)
    return RandomForestClassifier(data.class_names, data.dim, trees)
