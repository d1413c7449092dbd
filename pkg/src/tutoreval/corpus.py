"""Dialogue corpus schema, loading, grouped splitting, and class balance.

A dataset is a list of conversations; each conversation carries its dialogue
history and the candidate tutor responses, annotated with a three-way label
(Yes / To some extent / No) on up to four pedagogical dimensions.  Train/dev
splitting happens at conversation granularity so that a conversation and all
of its responses always land on the same side.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import total_ordering

import numpy as np

__all__ = [
    "TernaryLabel",
    "Dimension",
    "Speaker",
    "Turn",
    "TutorResponse",
    "Conversation",
    "Dataset",
    "Split",
    "InputTextMode",
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "grouped_split",
    "class_distribution",
    "build_input_text",
]


class DatasetError(ValueError):
    """Raised when a dataset file or in-memory dataset violates the schema."""


@total_ordering
class TernaryLabel(Enum):
    """Three-way annotation value, ordered No < ToSomeExtent < Yes.

    The order backs the logit-threshold logic: larger positive-class scores
    move the decision upward through this chain.
    """

    NO = "No"
    TO_SOME_EXTENT = "To some extent"
    YES = "Yes"

    @property
    def rank(self) -> int:
        return _LABEL_RANK[self]

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, TernaryLabel):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def from_string(cls, raw: str) -> "TernaryLabel":
        try:
            return cls(raw)
        except ValueError:
            known = ", ".join(repr(m.value) for m in cls)
            raise DatasetError(f"unknown label {raw!r}; expected one of {known}") from None


_LABEL_RANK = {TernaryLabel.NO: 0, TernaryLabel.TO_SOME_EXTENT: 1, TernaryLabel.YES: 2}


class Dimension(Enum):
    """The four pedagogical dimensions, one per track 1-4."""

    MISTAKE_IDENTIFICATION = "mistake_identification"
    MISTAKE_LOCATION = "mistake_location"
    PROVIDING_GUIDANCE = "providing_guidance"
    ACTIONABILITY = "actionability"

    @property
    def track(self) -> int:
        return list(Dimension).index(self) + 1

    @classmethod
    def from_track(cls, track: int) -> "Dimension":
        dims = list(cls)
        if not 1 <= track <= len(dims):
            raise DatasetError(f"no dimension for track {track}; dimensions cover tracks 1-4")
        return dims[track - 1]

    @classmethod
    def from_string(cls, raw: str) -> "Dimension":
        try:
            return cls(raw)
        except ValueError:
            known = ", ".join(m.value for m in cls)
            raise DatasetError(f"unknown dimension {raw!r}; expected one of {known}") from None


class Speaker(Enum):
    TUTOR = "Tutor"
    STUDENT = "Student"


class InputTextMode(Enum):
    """How classifier input text is assembled from a response."""

    RESPONSE_ONLY = "response"
    RESPONSE_WITH_HISTORY = "response_history"


@dataclass(frozen=True)
class Turn:
    speaker: Speaker
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise DatasetError("turn text is empty after whitespace trim")


@dataclass(frozen=True)
class TutorResponse:
    id: str
    tutor_id: str
    text: str
    annotations: dict[Dimension, TernaryLabel] = field(default_factory=dict)


@dataclass(frozen=True)
class Conversation:
    id: str
    history: tuple[Turn, ...]
    responses: tuple[TutorResponse, ...]

    def __post_init__(self) -> None:
        if len(self.history) < 1:
            raise DatasetError(f"conversation {self.id!r} has no turns")
        if len(self.responses) < 1:
            raise DatasetError(f"conversation {self.id!r} has no responses")
        seen: set[str] = set()
        for r in self.responses:
            if r.id in seen:
                raise DatasetError(f"duplicate response id {r.id!r} in conversation {self.id!r}")
            seen.add(r.id)


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of conversations with unique ids."""

    conversations: tuple[Conversation, ...]

    def __post_init__(self) -> None:
        conv_ids: set[str] = set()
        resp_ids: set[str] = set()
        for c in self.conversations:
            if c.id in conv_ids:
                raise DatasetError(f"duplicate conversation id {c.id!r}")
            conv_ids.add(c.id)
            for r in c.responses:
                if r.id in resp_ids:
                    raise DatasetError(f"duplicate response id {r.id!r} across dataset")
                resp_ids.add(r.id)

    def responses(self):
        """Iterate (conversation, response) pairs in dataset order."""
        for c in self.conversations:
            for r in c.responses:
                yield c, r

    @property
    def n_conversations(self) -> int:
        return len(self.conversations)

    @property
    def n_responses(self) -> int:
        return sum(len(c.responses) for c in self.conversations)


@dataclass(frozen=True)
class Split(Dataset):
    """One side of a grouped train/dev partition, recording its origin."""

    seed: int | None = None
    ratio: float | None = None


def _parse_turn(obj: dict, where: str) -> Turn:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: turn must be an object")
    try:
        speaker_raw = obj["speaker"]
        text = obj["text"]
    except KeyError as exc:
        raise DatasetError(f"{where}: missing turn field {exc.args[0]!r}") from None
    try:
        speaker = Speaker(speaker_raw)
    except ValueError:
        raise DatasetError(f"{where}: unknown speaker {speaker_raw!r} (expected 'Tutor' or 'Student')") from None
    if not isinstance(text, str) or not text.strip():
        raise DatasetError(f"{where}: turn text must be a non-empty string")
    return Turn(speaker=speaker, text=text)


def _parse_response(obj: dict, where: str) -> TutorResponse:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: response must be an object")
    for key in ("id", "tutor_id", "text"):
        if key not in obj:
            raise DatasetError(f"{where}: missing response field {key!r}")
    annotations: dict[Dimension, TernaryLabel] = {}
    for dim_raw, label_raw in (obj.get("annotations") or {}).items():
        try:
            dim = Dimension.from_string(dim_raw)
            label = TernaryLabel.from_string(label_raw)
        except DatasetError as exc:
            raise DatasetError(f"{where}.annotations: {exc}") from None
        annotations[dim] = label
    return TutorResponse(
        id=str(obj["id"]),
        tutor_id=str(obj["tutor_id"]),
        text=str(obj["text"]),
        annotations=annotations,
    )


def _parse_conversation(obj: dict, where: str) -> Conversation:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: conversation must be an object")
    for key in ("id", "history", "responses"):
        if key not in obj:
            raise DatasetError(f"{where}: missing conversation field {key!r}")
    history = tuple(
        _parse_turn(t, f"{where}.history[{i}]") for i, t in enumerate(obj["history"])
    )
    responses = tuple(
        _parse_response(r, f"{where}.responses[{i}]") for i, r in enumerate(obj["responses"])
    )
    try:
        return Conversation(id=str(obj["id"]), history=history, responses=responses)
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from None


def load_dataset(path: str, format: str = "json") -> Dataset:
    """Load and validate a dataset file.

    The file must follow the UTF-8 JSON schema
    ``{"conversations": [{"id", "history": [...], "responses": [...]}]}``
    with exact label strings ("Yes", "No", "To some extent").  Per-response
    ``annotations`` are optional, so unlabeled test data loads too.

    Raises DatasetError with line/field context on malformed input,
    duplicate ids, or unknown label strings.
    """
    if format != "json":
        raise DatasetError(f"unsupported dataset format {format!r}; only 'json' is supported")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "conversations" not in doc:
        raise DatasetError(f"{path}: top-level object must contain a 'conversations' list")
    conversations = tuple(
        _parse_conversation(c, f"conversations[{i}]") for i, c in enumerate(doc["conversations"])
    )
    return Dataset(conversations=conversations)


def _turn_to_json(t: Turn) -> dict:
    return {"speaker": t.speaker.value, "text": t.text}


def _response_to_json(r: TutorResponse) -> dict:
    obj: dict = {"id": r.id, "tutor_id": r.tutor_id, "text": r.text}
    if r.annotations:
        obj["annotations"] = {d.value: lab.value for d, lab in r.annotations.items()}
    return obj


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a dataset (or split) back out in the canonical JSON schema."""
    doc = {
        "conversations": [
            {
                "id": c.id,
                "history": [_turn_to_json(t) for t in c.history],
                "responses": [_response_to_json(r) for r in c.responses],
            }
            for c in dataset.conversations
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def grouped_split(dataset: Dataset, ratio: float, seed: int) -> tuple[Split, Split]:
    """Partition a dataset into (train, dev) at conversation granularity.

    Conversation membership is drawn by shuffling with NumPy's PCG64
    generator (``numpy.random.default_rng``) seeded explicitly, so the split
    is a pure function of (dataset, ratio, seed).  The train side gets
    round(ratio * N) conversations (half-up), clamped so both sides are
    non-empty whenever N >= 2.  Each side keeps the original dataset order.
    """
    if dataset.n_conversations == 0:
        raise DatasetError("cannot split an empty dataset")
    if not 0.0 < ratio < 1.0:
        raise DatasetError(f"split ratio must be in (0, 1), got {ratio}")
    n = dataset.n_conversations
    n_train = int(np.floor(ratio * n + 0.5))
    if n >= 2:
        n_train = min(max(n_train, 1), n - 1)
    elif n_train == n or n_train == 0:
        warnings.warn(
            f"grouped_split of {n} conversation(s) at ratio {ratio} leaves one side empty",
            stacklevel=2,
        )
        n_train = min(max(n_train, 0), n)

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    train_idx = set(order[:n_train].tolist())
    train = tuple(c for i, c in enumerate(dataset.conversations) if i in train_idx)
    dev = tuple(c for i, c in enumerate(dataset.conversations) if i not in train_idx)
    return (
        Split(conversations=train, seed=seed, ratio=ratio),
        Split(conversations=dev, seed=seed, ratio=ratio),
    )


def class_distribution(
    dataset: Dataset, dim: Dimension
) -> dict[TernaryLabel, tuple[int, float]]:
    """Count label occurrences for one dimension, as {label: (count, fraction)}.

    Every response must be annotated for ``dim``; offending response ids are
    listed otherwise.  Only labels that actually occur appear in the result.
    """
    counts: dict[TernaryLabel, int] = {}
    missing: list[str] = []
    total = 0
    for _, r in dataset.responses():
        label = r.annotations.get(dim)
        if label is None:
            missing.append(r.id)
            continue
        counts[label] = counts.get(label, 0) + 1
        total += 1
    if missing:
        raise DatasetError(
            f"{len(missing)} response(s) missing annotation for {dim.value}: "
            + ", ".join(missing[:20])
            + ("..." if len(missing) > 20 else "")
        )
    if total == 0:
        raise DatasetError("dataset has no responses")
    return {lab: (cnt, cnt / total) for lab, cnt in counts.items()}


def build_input_text(
    response: TutorResponse, conversation: Conversation, mode: InputTextMode
) -> str:
    """Assemble the classifier input text for a response.

    RESPONSE_ONLY returns the response text verbatim.  RESPONSE_WITH_HISTORY
    renders each history turn as a "Speaker: text" line, then a "---"
    separator line, then the response text.
    """
    if not any(r.id == response.id for r in conversation.responses):
        raise DatasetError(
            f"response {response.id!r} does not belong to conversation {conversation.id!r}"
        )
    if mode is InputTextMode.RESPONSE_ONLY:
        return response.text
    lines = [f"{t.speaker.value}: {t.text}" for t in conversation.history]
    lines.append("---")
    lines.append(response.text)
    return "\n".join(lines)
