import pytest

from tutoreval import Dimension, TernaryLabel
from tutoreval_exporter import (
    RUBRICS,
    PromptBundle,
    default_prompts,
    finetune_messages,
    history_text,
)


def test_default_bundle_has_all_placeholders_once():
    bundle = default_prompts()
    for placeholder in ("{history}", "{rubric}", "{response}"):
        assert bundle.user.count(placeholder) == 1


def test_rubrics_cover_every_dimension():
    assert set(RUBRICS) == set(Dimension)
    for text in RUBRICS.values():
        assert text.startswith("[")
        assert "1) Yes" in text
        assert "2) To some extent" in text
        assert "3) No" in text


def test_rubrics_are_pairwise_distinct():
    assert len({RUBRICS[d] for d in Dimension}) == 4


def test_missing_placeholder_rejected():
    with pytest.raises(ValueError, match=r"\{rubric\} exactly once"):
        PromptBundle(user="history {history} response {response}")


def test_duplicated_placeholder_rejected():
    with pytest.raises(ValueError, match="exactly once, found 2"):
        PromptBundle(user="{history} {rubric} {response} {response}")


def test_missing_rubric_rejected():
    rubrics = {d: RUBRICS[d] for d in Dimension if d is not Dimension.ACTIONABILITY}
    with pytest.raises(ValueError, match="actionability"):
        PromptBundle(rubrics=rubrics)


def test_render_user_substitutes_everything():
    bundle = default_prompts()
    rendered = bundle.render_user(
        "Student: I got x = 5", Dimension.MISTAKE_LOCATION, "check the sign"
    )
    assert "Student: I got x = 5" in rendered
    assert RUBRICS[Dimension.MISTAKE_LOCATION] in rendered
    assert rendered.rstrip().endswith("check the sign")
    assert "{" not in rendered


def test_history_text_keeps_most_recent_turns(corpus):
    conv = corpus.conversations[0]
    full = history_text(conv)
    assert full.splitlines()[0].startswith("Tutor:")
    last_only = history_text(conv, turns=1)
    assert last_only == full.splitlines()[-1]


def test_finetune_messages_end_with_label(corpus):
    conv = corpus.conversations[0]
    resp = conv.responses[0]
    dim = Dimension.ACTIONABILITY
    msgs = finetune_messages(
        default_prompts(), conv, resp, dim, resp.annotations[dim]
    )
    assert [m["role"] for m in msgs] == ["system", "user", "assistant"]
    assert msgs[2]["content"] in {lab.value for lab in TernaryLabel}
    assert resp.text in msgs[1]["content"]
