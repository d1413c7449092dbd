"""Score-file ingestion, joining, and prediction files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import make_dataset
from tutoreval.corpus import DatasetError, TernaryLabel
from tutoreval.external_scores import (
    ScoreFileError,
    ScoreRecord,
    join_scores,
    read_predictions,
    read_scores,
    ternary_predictions,
    write_predictions,
    write_scores,
)
from tutoreval.thresholds import ClassProbabilities

NO, TSE, YES = TernaryLabel.NO, TernaryLabel.TO_SOME_EXTENT, TernaryLabel.YES


def _write(tmp_path, lines, name="scores.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_read_three_payload_kinds(tmp_path):
    path = _write(
        tmp_path,
        [
            '{"response_id": "r1", "embedding": [0.1, 0.2, 0.3], "source": "encoder"}',
            "",
            '{"response_id": "r2", "probs": {"yes": 0.7, "no": 0.2, "tse": 0.1}}',
            '{"response_id": "r3", "logit": -0.42}',
        ],
    )
    records = read_scores(path)
    assert [r.response_id for r in records] == ["r1", "r2", "r3"]
    assert records[0].has("embedding") and not records[0].has("probs")
    assert records[0].source == "encoder"
    np.testing.assert_allclose(records[0].embedding, [0.1, 0.2, 0.3])
    assert records[1].probs.as_array() == pytest.approx([0.7, 0.2, 0.1], abs=1e-12)
    assert records[2].logit == -0.42


def test_off_simplex_probs_rejected(tmp_path):
    path = _write(tmp_path, ['{"response_id": "r1", "probs": {"yes": 0.5, "no": 0.4, "tse": 0.2}}'])
    with pytest.raises(ScoreFileError, match="line 1.*not on the.*simplex"):
        read_scores(path)


def test_probs_renormalized_within_tolerance(tmp_path):
    # sum 1.00005 is inside the 1e-4 gate and comes out exactly normalized
    path = _write(
        tmp_path, ['{"response_id": "r1", "probs": {"yes": 0.70005, "no": 0.2, "tse": 0.1}}']
    )
    (rec,) = read_scores(path)
    total = rec.probs.p_yes + rec.probs.p_no + rec.probs.p_tse
    assert total == pytest.approx(1.0, abs=1e-12)


def test_duplicate_response_id_rejected(tmp_path):
    path = _write(
        tmp_path,
        ['{"response_id": "r1", "logit": 0.1}', '{"response_id": "r1", "logit": 0.2}'],
    )
    with pytest.raises(ScoreFileError, match="line 2: duplicate response_id 'r1'"):
        read_scores(path)


def test_ragged_embedding_dims_rejected(tmp_path):
    path = _write(
        tmp_path,
        [
            '{"response_id": "r1", "embedding": [1.0, 2.0]}',
            '{"response_id": "r2", "embedding": [1.0, 2.0, 3.0]}',
        ],
    )
    with pytest.raises(ScoreFileError, match="line 2: embedding dim 3 differs from earlier dim 2"):
        read_scores(path)


def test_malformed_json_reports_line_number(tmp_path):
    path = _write(tmp_path, ['{"response_id": "r1", "logit": 0.5}', "{not json"])
    with pytest.raises(ScoreFileError, match="line 2: invalid JSON"):
        read_scores(path)


def test_missing_id_and_missing_payload(tmp_path):
    with pytest.raises(ScoreFileError, match="line 1: missing 'response_id'"):
        read_scores(_write(tmp_path, ['{"logit": 0.5}'], name="a.jsonl"))
    with pytest.raises(ScoreFileError, match="line 1.*carries no payload"):
        read_scores(_write(tmp_path, ['{"response_id": "r1"}'], name="b.jsonl"))
    with pytest.raises(ScoreFileError, match="flat list"):
        read_scores(_write(tmp_path, ['{"response_id": "r1", "embedding": [[1.0]]}'], name="c.jsonl"))
    with pytest.raises(ScoreFileError, match="malformed probs"):
        read_scores(_write(tmp_path, ['{"response_id": "r1", "probs": {"yes": 1.0}}'], name="d.jsonl"))


def test_record_requires_some_payload_on_construction():
    with pytest.raises(ScoreFileError, match="carries no payload"):
        ScoreRecord(response_id="r1")
    with pytest.raises(ValueError, match="unknown payload kind"):
        ScoreRecord(response_id="r1", logit=0.0).has("margins")


def test_write_read_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    records = [
        ScoreRecord(response_id=f"r{i}", source="test", embedding=rng.normal(size=8),
                    logit=float(rng.normal()))
        for i in range(5)
    ]
    records.append(
        ScoreRecord(response_id="r5", probs=ClassProbabilities(0.25, 0.5, 0.25))
    )
    path = tmp_path / "out.jsonl"
    write_scores(records, str(path))
    again = read_scores(str(path))
    assert len(again) == 6
    for a, b in zip(records, again):
        assert a.response_id == b.response_id
        if a.embedding is not None:
            np.testing.assert_allclose(a.embedding, b.embedding, atol=1e-9)
        if a.logit is not None:
            assert a.logit == pytest.approx(b.logit, abs=1e-9)
    assert again[5].probs.as_array() == pytest.approx(records[5].probs.as_array(), abs=1e-9)


# ---------------------------------------------------------------------------
# joining onto a split


def _score_lines(ids, dim=4):
    return [
        json.dumps({"response_id": rid, "embedding": [float(i)] * dim})
        for i, rid in enumerate(ids)
    ]


def test_join_preserves_split_order(tmp_path):
    data = make_dataset([YES, NO] * 5)  # 5 conversations, 10 responses
    ids = [resp.id for _, resp in data.responses()]
    shuffled = list(reversed(ids))  # file order differs from split order
    path = _write(tmp_path, _score_lines(shuffled))
    rows = join_scores(data, read_scores(path), require={"embedding"})
    assert [row.response.id for row in rows] == ids
    assert all(row.record.response_id == row.response.id for row in rows)
    assert rows[0].conversation_id == "c00000"


def test_join_missing_record_lists_id(tmp_path):
    data = make_dataset([YES, NO] * 5)
    ids = [resp.id for _, resp in data.responses()]
    path = _write(tmp_path, _score_lines(ids[:-1]))  # drop the last response
    with pytest.raises(ScoreFileError, match=f"1 response\\(s\\) have no score record: {ids[-1]}"):
        join_scores(data, read_scores(path), require={"embedding"})


def test_join_missing_required_payload(tmp_path):
    data = make_dataset([YES, NO])
    ids = [resp.id for _, resp in data.responses()]
    path = _write(tmp_path, _score_lines(ids))  # embeddings only
    with pytest.raises(ScoreFileError, match="missing required payload 'probs'"):
        join_scores(data, read_scores(path), require={"probs"})


def test_join_unknown_payload_kind():
    data = make_dataset([YES])
    with pytest.raises(ValueError, match="unknown payload kind 'margins'"):
        join_scores(data, [], require={"margins"})


def test_join_without_requirements_keeps_partial_records(tmp_path):
    data = make_dataset([YES, NO])
    ids = [resp.id for _, resp in data.responses()]
    lines = [json.dumps({"response_id": ids[0], "logit": 0.5}),
             json.dumps({"response_id": ids[1], "embedding": [1.0, 2.0]})]
    rows = join_scores(data, read_scores(_write(tmp_path, lines)))
    assert len(rows) == 2


# ---------------------------------------------------------------------------
# prediction files


def test_predictions_round_trip(tmp_path):
    path = tmp_path / "preds.jsonl"
    write_predictions(["r1", "r2", "r3"], 2, ["Yes", "No", "To some extent"], str(path))
    preds = read_predictions(str(path))
    assert [p["response_id"] for p in preds] == ["r1", "r2", "r3"]
    assert {p["track"] for p in preds} == {2}
    assert ternary_predictions(preds) == [YES, NO, TSE]


def test_predictions_tutor_identity_strings(tmp_path):
    path = tmp_path / "preds.jsonl"
    write_predictions(["r1", "r2"], 5, ["Sonnet", "Novice"], str(path))
    preds = read_predictions(str(path))
    assert [p["prediction"] for p in preds] == ["Sonnet", "Novice"]
    with pytest.raises(DatasetError, match="not a ternary label"):
        ternary_predictions(preds)


def test_predictions_validation(tmp_path):
    with pytest.raises(ValueError, match="2 ids but 1 predictions"):
        write_predictions(["r1", "r2"], 1, ["Yes"], str(tmp_path / "x.jsonl"))
    dup = _write(
        tmp_path,
        [
            '{"response_id": "r1", "track": 1, "prediction": "Yes"}',
            '{"response_id": "r1", "track": 1, "prediction": "No"}',
        ],
        name="dup.jsonl",
    )
    with pytest.raises(ScoreFileError, match="line 2: duplicate response_id"):
        read_predictions(dup)
    missing = _write(tmp_path, ['{"response_id": "r1", "track": 1}'], name="missing.jsonl")
    with pytest.raises(ScoreFileError, match="missing 'prediction'"):
        read_predictions(missing)
