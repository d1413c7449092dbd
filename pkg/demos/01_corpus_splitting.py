"""
Loading a dialogue corpus and splitting it without leakage
==========================================================

A corpus is a set of tutoring conversations.  Each conversation carries the
dialogue history (the student working through a problem) and one response
per tutor, annotated along four assessment dimensions.  Because several
responses share one conversation, a train/dev split has to happen at the
conversation level -- otherwise the model sees the dev dialogue context
during training.
"""

import json
import tempfile
from pathlib import Path

from tutoreval import (
    Dimension,
    class_distribution,
    grouped_split,
    load_dataset,
    save_dataset,
)

workdir = Path(tempfile.mkdtemp(prefix="corpus-demo-"))

# ---------------------------------------------------------------------------
# Write a tiny corpus in the on-disk schema.  Annotations use the exact
# label strings "Yes" / "To some extent" / "No".

doc = {
    "conversations": [
        {
            "id": f"conv-{i:03d}",
            "history": [
                {"speaker": "Tutor", "text": "What do you get for 2x + 3 = 7?"},
                {"speaker": "Student", "text": "I got x = 5"},
            ],
            "responses": [
                {
                    "id": f"conv-{i:03d}-t1",
                    "tutor_id": "Tutor1",
                    "text": "Check how you moved the 3 across the equals sign.",
                    "annotations": {
                        "mistake_identification": "Yes",
                        "mistake_location": "Yes",
                        "providing_guidance": "To some extent",
                        "actionability": "Yes",
                    },
                },
                {
                    "id": f"conv-{i:03d}-t2",
                    "tutor_id": "Tutor2",
                    "text": "Great job, that is correct!",
                    "annotations": {
                        "mistake_identification": "No",
                        "mistake_location": "No",
                        "providing_guidance": "No",
                        "actionability": "No",
                    },
                },
            ],
        }
        for i in range(20)
    ]
}
corpus_path = workdir / "corpus.json"
corpus_path.write_text(json.dumps(doc, indent=1), encoding="utf-8")

dataset = load_dataset(str(corpus_path))
print(f"loaded {dataset.n_conversations} conversations, {dataset.n_responses} responses")

# ---------------------------------------------------------------------------
# Class balance per dimension.  The distributions drive everything later:
# the always-Yes baseline score is a pure function of the Yes share.

for dim in Dimension:
    dist = class_distribution(dataset, dim)
    parts = ", ".join(f"{lab.value}: {count}" for lab, (count, _) in dist.items())
    print(f"{dim.value:<24} {parts}")

# ---------------------------------------------------------------------------
# An 80/20 grouped split.  Conversations -- not responses -- are shuffled,
# so both responses of a conversation land on the same side.

train, dev = grouped_split(dataset, ratio=0.8, seed=7)
print(f"\ntrain: {train.n_conversations} conversations ({train.n_responses} responses)")
print(f"dev:   {dev.n_conversations} conversations ({dev.n_responses} responses)")

train_ids = {c.id for c in train.conversations}
dev_ids = {c.id for c in dev.conversations}
print(f"overlap between sides: {sorted(train_ids & dev_ids)}")

# The split is a pure function of (dataset, ratio, seed): re-running it
# gives byte-identical files.
save_dataset(train, str(workdir / "train.json"))
save_dataset(dev, str(workdir / "dev.json"))
again, _ = grouped_split(dataset, ratio=0.8, seed=7)
assert [c.id for c in again.conversations] == [c.id for c in train.conversations]
print(f"\nwrote train.json / dev.json under {workdir}")
