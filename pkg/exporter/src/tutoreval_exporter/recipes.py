"""Fine-tuning recipes: which target, which hyperparameters.

Four targets exist.  The binary encoder covers the four ternary dimensions
with a 2-class objective (No and To-some-extent merged into the negative
class); the track-5 encoder classifies tutor identity; the two decoder
targets train a causal LM on next-token prediction over the assistant
label, either one model per dimension or one shared model.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum


class RecipeTarget(Enum):
    BINARY_ENCODER_134 = "binary_encoder_134"
    ENCODER_TRACK5 = "encoder_track5"
    DECODER_DIMENSION_SPECIFIC = "decoder_dimension_specific"
    DECODER_MULTI_DIMENSION = "decoder_multi_dimension"

    @property
    def is_decoder(self) -> bool:
        return self in (
            RecipeTarget.DECODER_DIMENSION_SPECIFIC,
            RecipeTarget.DECODER_MULTI_DIMENSION,
        )


@dataclass(frozen=True)
class FinetuneRecipe:
    target: RecipeTarget
    learning_rate: float
    epochs: int
    batch_size: int
    weight_decay: float = 0.0
    warmup_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if not 0 <= self.warmup_ratio < 1:
            raise ValueError("warmup_ratio must be in [0, 1)")
        # The binary encoder sweep only ever ran 1-3 epochs; anything larger
        # is almost certainly a mixed-up recipe rather than a real intent.
        if self.target is RecipeTarget.BINARY_ENCODER_134 and self.epochs > 3:
            raise ValueError("binary_encoder_134 trains for 1-3 epochs")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target"] = self.target.value
        return d


_DEFAULTS = {
    RecipeTarget.BINARY_ENCODER_134: dict(
        learning_rate=5e-6, epochs=3, batch_size=16
    ),
    RecipeTarget.ENCODER_TRACK5: dict(
        learning_rate=2e-5, epochs=4, batch_size=16, weight_decay=0.01
    ),
    RecipeTarget.DECODER_DIMENSION_SPECIFIC: dict(
        learning_rate=2e-4,
        epochs=3,
        batch_size=8,
        weight_decay=0.001,
        warmup_ratio=0.03,
    ),
    RecipeTarget.DECODER_MULTI_DIMENSION: dict(
        learning_rate=2e-4,
        epochs=3,
        batch_size=8,
        weight_decay=0.001,
        warmup_ratio=0.03,
    ),
}


def default_recipe(target: RecipeTarget) -> FinetuneRecipe:
    return FinetuneRecipe(target=target, **_DEFAULTS[target])
