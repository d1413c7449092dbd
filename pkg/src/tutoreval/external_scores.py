"""Ingest offline-produced neural artifacts and join them to responses.

Score files are JSON Lines, one record per response, carrying any of an
embedding vector, three class-label probabilities, or a positive-class
logit.  The primary pipeline never runs a neural network; it only consumes
these files.  Prediction files (response_id, track, prediction) share the
same line-oriented format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, DatasetError, TernaryLabel, TutorResponse
from .thresholds import ClassProbabilities

__all__ = [
    "ScoreRecord",
    "JoinedRow",
    "ScoreFileError",
    "PAYLOAD_KINDS",
    "read_scores",
    "write_scores",
    "join_scores",
    "read_predictions",
    "write_predictions",
]

PAYLOAD_KINDS = ("embedding", "probs", "logit")

_SIMPLEX_TOL = 1e-4


class ScoreFileError(ValueError):
    """Raised for malformed or inconsistent score / prediction files."""


@dataclass(frozen=True)
class ScoreRecord:
    """One response's externally computed payloads (at least one present)."""

    response_id: str
    source: str = ""
    embedding: np.ndarray | None = None
    probs: ClassProbabilities | None = None
    logit: float | None = None

    def __post_init__(self) -> None:
        if self.embedding is None and self.probs is None and self.logit is None:
            raise ScoreFileError(
                f"record {self.response_id!r} carries no payload "
                "(need embedding, probs, or logit)"
            )

    def has(self, kind: str) -> bool:
        if kind not in PAYLOAD_KINDS:
            raise ValueError(f"unknown payload kind {kind!r}; expected one of {PAYLOAD_KINDS}")
        return getattr(self, kind) is not None


def _parse_record(obj: dict, lineno: int) -> ScoreRecord:
    if not isinstance(obj, dict):
        raise ScoreFileError(f"line {lineno}: record must be a JSON object")
    if "response_id" not in obj:
        raise ScoreFileError(f"line {lineno}: missing 'response_id'")
    embedding = None
    if obj.get("embedding") is not None:
        embedding = np.asarray(obj["embedding"], dtype=float)
        if embedding.ndim != 1 or embedding.size == 0:
            raise ScoreFileError(f"line {lineno}: embedding must be a non-empty flat list")
    probs = None
    if obj.get("probs") is not None:
        praw = obj["probs"]
        try:
            p_yes, p_no, p_tse = float(praw["yes"]), float(praw["no"]), float(praw["tse"])
        except (KeyError, TypeError) as exc:
            raise ScoreFileError(f"line {lineno}: malformed probs object: {exc}") from None
        total = p_yes + p_no + p_tse
        if abs(total - 1.0) > _SIMPLEX_TOL or min(p_yes, p_no, p_tse) < 0:
            raise ScoreFileError(
                f"line {lineno}: probs ({p_yes}, {p_no}, {p_tse}) are not on the "
                f"simplex (sum {total})"
            )
        # Renormalize the residual within tolerance so downstream checks at
        # tighter tolerances still pass.
        probs = ClassProbabilities(p_yes=p_yes / total, p_no=p_no / total, p_tse=p_tse / total)
    logit = None
    if obj.get("logit") is not None:
        logit = float(obj["logit"])
    try:
        return ScoreRecord(
            response_id=str(obj["response_id"]),
            source=str(obj.get("source", "")),
            embedding=embedding,
            probs=probs,
            logit=logit,
        )
    except ScoreFileError as exc:
        raise ScoreFileError(f"line {lineno}: {exc}") from None


def read_scores(path: str) -> list[ScoreRecord]:
    """Read and validate a JSON Lines score file.

    Rejects malformed lines (with line numbers), duplicate response ids,
    probability triples off the simplex (tolerance 1e-4), and embeddings of
    inconsistent dimension within the file.
    """
    records: list[ScoreRecord] = []
    seen: set[str] = set()
    emb_dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScoreFileError(f"line {lineno}: invalid JSON: {exc.msg}") from None
            rec = _parse_record(obj, lineno)
            if rec.response_id in seen:
                raise ScoreFileError(f"line {lineno}: duplicate response_id {rec.response_id!r}")
            seen.add(rec.response_id)
            if rec.embedding is not None:
                if emb_dim is None:
                    emb_dim = rec.embedding.shape[0]
                elif rec.embedding.shape[0] != emb_dim:
                    raise ScoreFileError(
                        f"line {lineno}: embedding dim {rec.embedding.shape[0]} differs "
                        f"from earlier dim {emb_dim}"
                    )
            records.append(rec)
    return records


def write_scores(records: list[ScoreRecord], path: str) -> None:
    """Write score records as JSON Lines (round-trips through read_scores)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj: dict = {"response_id": rec.response_id, "source": rec.source}
            if rec.embedding is not None:
                obj["embedding"] = [float(v) for v in rec.embedding]
            if rec.probs is not None:
                obj["probs"] = {
                    "yes": rec.probs.p_yes,
                    "no": rec.probs.p_no,
                    "tse": rec.probs.p_tse,
                }
            if rec.logit is not None:
                obj["logit"] = rec.logit
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class JoinedRow:
    """One response aligned with its gold labels and score payloads."""

    conversation_id: str
    response: TutorResponse
    record: ScoreRecord


def join_scores(
    split: Dataset, records: list[ScoreRecord], require: set[str] | frozenset[str] = frozenset()
) -> list[JoinedRow]:
    """Inner-join score records onto a split's responses, in split order.

    ``require`` names the payload kinds every response must have
    ("embedding", "probs", "logit").  Fails listing the offending response
    ids when a record is missing entirely or lacks a required payload.
    """
    for kind in require:
        if kind not in PAYLOAD_KINDS:
            raise ValueError(f"unknown payload kind {kind!r}; expected one of {PAYLOAD_KINDS}")
    by_id = {r.response_id: r for r in records}
    rows: list[JoinedRow] = []
    missing_record: list[str] = []
    missing_payload: dict[str, list[str]] = {kind: [] for kind in require}
    for conv, resp in split.responses():
        rec = by_id.get(resp.id)
        if rec is None:
            missing_record.append(resp.id)
            continue
        ok = True
        for kind in require:
            if not rec.has(kind):
                missing_payload[kind].append(resp.id)
                ok = False
        if ok:
            rows.append(JoinedRow(conversation_id=conv.id, response=resp, record=rec))
    problems: list[str] = []
    if missing_record:
        problems.append(
            f"{len(missing_record)} response(s) have no score record: "
            + ", ".join(missing_record[:20])
            + ("..." if len(missing_record) > 20 else "")
        )
    for kind in sorted(missing_payload):
        ids = missing_payload[kind]
        if ids:
            problems.append(
                f"{len(ids)} response(s) missing required payload '{kind}': "
                + ", ".join(ids[:20])
                + ("..." if len(ids) > 20 else "")
            )
    if problems:
        raise ScoreFileError("; ".join(problems))
    return rows


def write_predictions(
    response_ids: list[str], track: int, predictions: list[str], path: str
) -> None:
    """Write a predictions file: one {response_id, track, prediction} per line."""
    if len(response_ids) != len(predictions):
        raise ValueError(f"{len(response_ids)} ids but {len(predictions)} predictions")
    with open(path, "w", encoding="utf-8") as fh:
        for rid, pred in zip(response_ids, predictions):
            fh.write(
                json.dumps(
                    {"response_id": rid, "track": track, "prediction": pred},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_predictions(path: str) -> list[dict]:
    """Read a predictions file; returns dicts with response_id, track, prediction."""
    out: list[dict] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScoreFileError(f"line {lineno}: invalid JSON: {exc.msg}") from None
            for key in ("response_id", "track", "prediction"):
                if key not in obj:
                    raise ScoreFileError(f"line {lineno}: missing {key!r}")
            if obj["response_id"] in seen:
                raise ScoreFileError(
                    f"line {lineno}: duplicate response_id {obj['response_id']!r}"
                )
            seen.add(obj["response_id"])
            out.append(
                {
                    "response_id": str(obj["response_id"]),
                    "track": int(obj["track"]),
                    "prediction": str(obj["prediction"]),
                }
            )
    return out


def ternary_predictions(preds: list[dict]) -> list[TernaryLabel]:
    """Coerce prediction strings to ternary labels (tracks 1-4)."""
    try:
        return [TernaryLabel(p["prediction"]) for p in preds]
    except ValueError as exc:
        raise DatasetError(f"prediction is not a ternary label: {exc}") from None
