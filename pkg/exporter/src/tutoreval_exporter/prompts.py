"""Prompt templates for decoder fine-tuning and constrained label scoring.

The user message carries three placeholders -- ``{history}``, ``{rubric}``,
``{response}`` -- each of which must appear exactly once.  Rubric wording is
fixed per assessment dimension and is not meant to be edited casually: the
fine-tuned checkpoints were trained against these exact strings, so changing
a rubric silently invalidates them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from tutoreval import Dimension, TernaryLabel
from tutoreval.corpus import Conversation, TutorResponse

SYSTEM_PROMPT = """You are a critic evaluating a tutor's
interaction with a student, responsible
for providing a clear and objective single
evaluation based on specific criteria.
Each assessment must accurately reflect the
absolute performance standards."""

USER_TEMPLATE = """# Previous Conversation between Tutor and
Student:
{history}

# Scoring Rubric:
{rubric}

# Tutor Response:
{response}"""

RUBRICS: Mapping[Dimension, str] = MappingProxyType(
    {
        Dimension.MISTAKE_IDENTIFICATION: (
            "[Has the tutor identified a mistake in a\n"
            "student's response?]\n"
            "1) Yes\n"
            "2) To some extent\n"
            "3) No"
        ),
        Dimension.MISTAKE_LOCATION: (
            "[Does the tutor's response accurately point\n"
            "to a genuine mistake and its location?]\n"
            "1) Yes\n"
            "2) To some extent\n"
            "3) No"
        ),
        Dimension.PROVIDING_GUIDANCE: (
            "[Does the tutor offer correct and relevant\n"
            "guidance, such as an explanation, ela-\n"
            "boration, hint, examples, and so on?]\n"
            "1) Yes (guidance is correct and relevant\n"
            "to the mistake)\n"
            "2) To some extent (guidance is provided but\n"
            "it is fully or partially incorrect or\n"
            "incomplete)\n"
            "3) No"
        ),
        Dimension.ACTIONABILITY: (
            "[Is it clear from the tutor’s feedback what\n"
            "the student should do next?]\n"
            "1) Yes\n"
            "2) To some extent\n"
            "3) No"
        ),
    }
)

_PLACEHOLDERS = ("{history}", "{rubric}", "{response}")


@dataclass(frozen=True)
class PromptBundle:
    """System prompt, user-message template, and per-dimension rubrics."""

    system: str = SYSTEM_PROMPT
    user: str = USER_TEMPLATE
    rubrics: Mapping[Dimension, str] = field(default_factory=lambda: RUBRICS)

    def __post_init__(self) -> None:
        for ph in _PLACEHOLDERS:
            n = self.user.count(ph)
            if n != 1:
                raise ValueError(
                    f"user template must contain {ph} exactly once, found {n}"
                )
        missing = [d.value for d in Dimension if d not in self.rubrics]
        if missing:
            raise ValueError(f"rubrics missing for dimensions: {missing}")

    def render_user(self, history: str, dim: Dimension, response: str) -> str:
        """Fill the user template for one example."""
        return self.user.format(
            history=history, rubric=self.rubrics[dim], response=response
        )


def default_prompts() -> PromptBundle:
    return PromptBundle()


def history_text(conversation: Conversation, turns: int | None = None) -> str:
    """Render dialogue history as ``Speaker: text`` lines.

    ``turns`` keeps only the most recent that many turns; older turns are the
    first to go when a context window forces truncation.
    """
    selected = conversation.history if turns is None else conversation.history[-turns:]
    return "\n".join(f"{t.speaker.value}: {t.text}" for t in selected)


def finetune_messages(
    bundle: PromptBundle,
    conversation: Conversation,
    response: TutorResponse,
    dim: Dimension,
    label: TernaryLabel,
    turns: int | None = None,
) -> list[dict[str, str]]:
    """One training example in chat-message form.

    The assistant message is exactly the label string -- the training
    objective is next-token prediction on that message alone.
    """
    return [
        {"role": "system", "content": bundle.system},
        {
            "role": "user",
            "content": bundle.render_user(
                history_text(conversation, turns), dim, response.text
            ),
        },
        {"role": "assistant", "content": label.value},
    ]
