"""
TF-IDF n-grams and the classical classifier zoo
===============================================

Featurize tutor responses with word n-grams, then fit every classical
backend on the same matrix and compare dev-set scores.  No neural network
anywhere: the vectorizer and all classifiers are pure numpy/scipy.
"""

import numpy as np

from tutoreval import (
    Backend,
    LabeledMatrix,
    TernaryLabel,
    Weighting,
    fit,
    fit_vectorizer,
    metrics,
    tokenize,
    transform,
)
from tutoreval.classifiers import (
    ForestParams,
    GbtParams,
    KnnParams,
    SoftmaxParams,
    SvmParams,
)
from tutoreval.evaluation import format_report_table

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------------
# Synthetic responses with label-correlated wording.  A tutor that names the
# error sounds different from one that only encourages.

PHRASES = {
    TernaryLabel.YES: [
        "you made a sign error when moving the three",
        "the mistake is in step two where you divided",
        "look again at how you expanded the bracket",
        "your subtraction flipped the sign check it",
    ],
    TernaryLabel.TO_SOME_EXTENT: [
        "something seems off in your working double check",
        "part of this is right but revisit the middle step",
        "close but one of the steps hides a slip",
        "almost there although a detail is wrong",
    ],
    TernaryLabel.NO: [
        "great job that answer is correct well done",
        "nice work you solved it perfectly",
        "good that is exactly the right approach",
        "correct you can move to the next exercise",
    ],
}
FILLER = ["keep going", "take your time", "remember the rules", "write it out"]


def sample_text(label: TernaryLabel) -> str:
    # A quarter of the responses borrow wording from a neighbouring label,
    # so the mapping from surface form to annotation stays noisy.
    pool = label
    if rng.random() < 0.25:
        pool = list(TernaryLabel)[rng.integers(0, 3)]
    base = PHRASES[pool][rng.integers(0, 4)]
    return base + " " + FILLER[rng.integers(0, 4)]


labels = [list(TernaryLabel)[i] for i in rng.integers(0, 3, size=240)]
texts = [sample_text(lab) for lab in labels]

train_texts, dev_texts = texts[:180], texts[180:]
train_labels, dev_labels = labels[:180], labels[180:]

print("sample tokenization:", tokenize(train_texts[0]))

# ---------------------------------------------------------------------------
# Fit the vectorizer on training text only; dev text is transformed with the
# frozen vocabulary (out-of-vocabulary n-grams simply vanish).

vectorizer = fit_vectorizer(train_texts, ngram_range=(1, 2), weighting=Weighting.TFIDF)
print(f"vocabulary: {vectorizer.dim} distinct 1-2-grams")

train_rows = [transform(vectorizer, t) for t in train_texts]
dev_rows = [transform(vectorizer, t) for t in dev_texts]

class_names = sorted({lab.value for lab in train_labels})
name_to_id = {name: i for i, name in enumerate(class_names)}
data = LabeledMatrix(train_rows, [name_to_id[lab.value] for lab in train_labels], class_names)

# ---------------------------------------------------------------------------
# One fit() call per backend.  Every fit is deterministic given
# (data, params, seed).

runs = [
    ("knn k=9", Backend.KNN, KnnParams(k=9)),
    ("knn balanced", Backend.KNN_BALANCED, KnnParams(k=9)),
    ("random forest", Backend.RANDOM_FOREST, ForestParams(n_trees=60)),
    ("linear svm", Backend.LINEAR_SVM, SvmParams(epochs=400)),
    ("softmax regression", Backend.SOFTMAX_REGRESSION, SoftmaxParams(max_iter=300)),
    ("boosted trees", Backend.GRADIENT_BOOSTED_TREES, GbtParams(n_rounds=40)),
]

rows = []
gold = [lab.value for lab in dev_labels]
for name, backend, params in runs:
    model = fit(backend, data, params, seed=0)
    pred = [model.class_names[model.predict(r)] for r in dev_rows]
    rows.append((name, metrics(gold, pred)))

print()
print(format_report_table(rows))
