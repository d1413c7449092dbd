"""Neural score exporters for the tutor-response assessment toolkit."""

from .export import (
    ExporterError,
    build_prompt,
    candidate_first_tokens,
    export_decoder_probs,
    export_embeddings,
    export_encoder_logits,
    unconstrained_first_token,
)
from .finetune import data_fingerprint, finetune
from .prompts import (
    RUBRICS,
    SYSTEM_PROMPT,
    USER_TEMPLATE,
    PromptBundle,
    default_prompts,
    finetune_messages,
    history_text,
)
from .recipes import FinetuneRecipe, RecipeTarget, default_recipe

__all__ = [
    "ExporterError",
    "FinetuneRecipe",
    "PromptBundle",
    "RecipeTarget",
    "RUBRICS",
    "SYSTEM_PROMPT",
    "USER_TEMPLATE",
    "build_prompt",
    "candidate_first_tokens",
    "data_fingerprint",
    "default_prompts",
    "default_recipe",
    "export_decoder_probs",
    "export_embeddings",
    "export_encoder_logits",
    "finetune",
    "finetune_messages",
    "history_text",
    "unconstrained_first_token",
]
