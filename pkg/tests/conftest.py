"""Shared fixtures: synthetic dialogue corpora and score-file builders."""

from __future__ import annotations

import json

import pytest

from tutoreval.corpus import (
    Conversation,
    Dataset,
    Dimension,
    Speaker,
    TernaryLabel,
    Turn,
    TutorResponse,
)

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def make_response(rid: str, labels: dict[Dimension, TernaryLabel] | None = None,
                  text: str = "check the sign in step two", tutor_id: str = "Tutor1"):
    return TutorResponse(id=rid, tutor_id=tutor_id, text=text, annotations=labels or {})


def make_conversation(cid: str, responses, n_turns: int = 2) -> Conversation:
    history = tuple(
        Turn(speaker=Speaker.TUTOR if i % 2 == 0 else Speaker.STUDENT, text=f"turn {i} of {cid}")
        for i in range(max(1, n_turns))
    )
    return Conversation(id=cid, history=history, responses=tuple(responses))


def make_dataset(label_seq, dim: Dimension = Dimension.MISTAKE_IDENTIFICATION,
                 per_conv: int = 2) -> Dataset:
    """Dataset whose responses carry ``label_seq`` for ``dim``, grouped per_conv at a time."""
    convs = []
    rid = 0
    for start in range(0, len(label_seq), per_conv):
        chunk = label_seq[start:start + per_conv]
        responses = []
        for label in chunk:
            responses.append(
                make_response(f"r{rid:05d}", {dim: label}, text=f"response number {rid}")
            )
            rid += 1
        convs.append(make_conversation(f"c{start // per_conv:05d}", responses))
    return Dataset(conversations=tuple(convs))


@pytest.fixture
def two_conversation_doc() -> dict:
    """The canonical on-disk schema: 2 conversations, 4 responses."""
    return {
        "conversations": [
            {
                "id": "conv-a",
                "history": [
                    {"speaker": "Tutor", "text": "What do you get for 2x + 3 = 7?"},
                    {"speaker": "Student", "text": "I got x = 5"},
                ],
                "responses": [
                    {
                        "id": "a1",
                        "tutor_id": "Tutor1",
                        "text": "Check how you moved the 3 across.",
                        "annotations": {
                            "mistake_identification": "Yes",
                            "mistake_location": "Yes",
                            "providing_guidance": "To some extent",
                            "actionability": "Yes",
                        },
                    },
                    {
                        "id": "a2",
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
            },
            {
                "id": "conv-b",
                "history": [
                    {"speaker": "Tutor", "text": "Simplify (x+1)(x-1)."},
                    {"speaker": "Student", "text": "x^2 + 1"},
                ],
                "responses": [
                    {
                        "id": "b1",
                        "tutor_id": "Tutor1",
                        "text": "Almost - look at the sign of the last term.",
                        "annotations": {
                            "mistake_identification": "Yes",
                            "mistake_location": "To some extent",
                            "providing_guidance": "Yes",
                            "actionability": "To some extent",
                        },
                    },
                    {
                        "id": "b2",
                        "tutor_id": "Tutor3",
                        "text": "Recall the difference-of-squares identity.",
                    },
                ],
            },
        ]
    }


@pytest.fixture
def corpus_file(tmp_path, two_conversation_doc):
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps(two_conversation_doc), encoding="utf-8")
    return str(path)
