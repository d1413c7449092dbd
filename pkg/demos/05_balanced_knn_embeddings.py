"""
Score files and nearest neighbours on skewed data
=================================================

Embeddings computed elsewhere enter the toolkit through JSONL score files.
This script writes such a file, joins it back onto the corpus, and then
contrasts plain k-NN with its class-balanced variant on a label
distribution where "To some extent" is rare.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from tutoreval import (
    Backend,
    Dimension,
    LabeledMatrix,
    ScoreRecord,
    fit,
    grouped_split,
    join_scores,
    load_dataset,
    metrics,
    read_scores,
    write_scores,
)
from tutoreval.classifiers import KnnParams

rng = np.random.default_rng(21)
workdir = Path(tempfile.mkdtemp(prefix="knn-demo-"))

# ---------------------------------------------------------------------------
# Corpus with a skewed mistake_identification distribution: mostly Yes,
# a sliver of To some extent.

WEIGHTS = [("Yes", 0.70), ("No", 0.20), ("To some extent", 0.10)]


def pick_label() -> str:
    return rng.choice([w[0] for w in WEIGHTS], p=[w[1] for w in WEIGHTS])


doc = {"conversations": []}
for i in range(200):
    label = pick_label()
    doc["conversations"].append(
        {
            "id": f"conv-{i:03d}",
            "history": [{"speaker": "Student", "text": "I think x equals 4?"}],
            "responses": [
                {
                    "id": f"conv-{i:03d}-r",
                    "tutor_id": "Tutor1",
                    "text": f"feedback variant number {i}",
                    "annotations": {
                        "mistake_identification": label,
                        "mistake_location": label,
                        "providing_guidance": label,
                        "actionability": label,
                    },
                }
            ],
        }
    )
corpus_path = workdir / "corpus.json"
corpus_path.write_text(json.dumps(doc), encoding="utf-8")
dataset = load_dataset(str(corpus_path))

# ---------------------------------------------------------------------------
# Fabricate 16-d embeddings whose geometry reflects the gold label, write
# them to a score file, and read them back.  The file is the only thing a
# real embedding pipeline would need to produce.

CENTERS = {"Yes": 0.9, "To some extent": 0.0, "No": -0.9}
dim = Dimension.MISTAKE_IDENTIFICATION

records = []
for conv in dataset.conversations:
    for resp in conv.responses:
        center = CENTERS[resp.annotations[dim].value]
        vec = center + 0.55 * rng.standard_normal(16)
        records.append(
            ScoreRecord(response_id=resp.id, source="demo-embedder", embedding=vec)
        )

scores_path = workdir / "embeddings.jsonl"
write_scores(records, str(scores_path))
print(f"wrote {len(records)} records to {scores_path.name}")

train, dev = grouped_split(dataset, ratio=0.8, seed=9)

loaded = read_scores(str(scores_path))
train_rows = join_scores(train, loaded, require={"embedding"})
dev_rows = join_scores(dev, loaded, require={"embedding"})
print(f"joined: {len(train_rows)} train rows, {len(dev_rows)} dev rows")


def matrix(rows) -> LabeledMatrix:
    class_names = ["No", "To some extent", "Yes"]
    labels = [class_names.index(r.response.annotations[dim].value) for r in rows]
    return LabeledMatrix([r.record.embedding for r in rows], labels, class_names)


data = matrix(train_rows)
print(f"train class counts (No/TSE/Yes): {data.class_counts().tolist()}")

# ---------------------------------------------------------------------------
# Plain k-NN lets the majority class outvote rare neighbours.  The balanced
# variant trains on an equal-sized subsample per class instead.

gold = [r.response.annotations[dim].value for r in dev_rows]
for backend in (Backend.KNN, Backend.KNN_BALANCED):
    model = fit(backend, data, KnnParams(k=7), seed=0)
    pred = [model.class_names[model.predict(r.record.embedding)] for r in dev_rows]
    m = metrics(gold, pred)
    tse = m.per_class_f1.get("To some extent", 0.0)
    print(
        f"{backend.value:<13} macro-F1 {m.macro_f1:6.2f}"
        f"  accuracy {m.accuracy:6.2f}  F1(To some extent) {tse:6.2f}"
    )
