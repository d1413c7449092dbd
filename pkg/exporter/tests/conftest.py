"""Offline fixtures: tiny random-init checkpoints and a synthetic corpus.

Nothing here touches the network.  The tokenizer is a word-level model
built from the fixture texts themselves; the encoder and decoder are
minimal transformer configs, so full fine-tuning runs in seconds on CPU.
"""

from __future__ import annotations

import json

import pytest
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
)

from tutoreval import TernaryLabel, load_dataset
from tutoreval_exporter import RUBRICS, SYSTEM_PROMPT, USER_TEMPLATE

PHRASES = {
    TernaryLabel.YES: "you made a sign mistake in step two fix it",
    TernaryLabel.NO: "great job that answer is correct well done",
    TernaryLabel.TO_SOME_EXTENT: "something is partly off almost there look again",
}
FILLERS = ["keep going", "take your time", "nice effort", "try once more"]
HISTORY_LINES = [
    ("Tutor", "What do you get for 2x + 3 = 7?"),
    ("Student", "I moved the 3 and got x = 5"),
]

DIM_NAMES = (
    "mistake_identification",
    "mistake_location",
    "providing_guidance",
    "actionability",
)


def _corpus_doc(n_conversations: int = 48) -> dict:
    labels = list(PHRASES)
    doc = {"conversations": []}
    for i in range(n_conversations):
        label = labels[i % 3]
        text = PHRASES[label] + " " + FILLERS[i % 4]
        doc["conversations"].append(
            {
                "id": f"conv-{i:03d}",
                "history": [
                    {"speaker": s, "text": t} for s, t in HISTORY_LINES
                ],
                "responses": [
                    {
                        "id": f"conv-{i:03d}-r",
                        "tutor_id": "Tutor1" if i % 2 else "Tutor2",
                        "text": text,
                        "annotations": {d: label.value for d in DIM_NAMES},
                    }
                ],
            }
        )
    return doc


def _fixture_words() -> list[str]:
    splitter = pre_tokenizers.Whitespace()
    seen: dict[str, None] = {}
    texts = [SYSTEM_PROMPT, USER_TEMPLATE, "Answer:", *RUBRICS.values()]
    texts += [f"{s}: {t}" for s, t in HISTORY_LINES]
    texts += [PHRASES[lab] for lab in PHRASES]
    texts += FILLERS
    texts += [lab.value for lab in TernaryLabel]
    for text in texts:
        for word, _ in splitter.pre_tokenize_str(text):
            seen.setdefault(word)
    return list(seen)


def make_tokenizer(drop: tuple[str, ...] = ()) -> PreTrainedTokenizerFast:
    """Word-level tokenizer over the fixture vocabulary.

    ``drop`` removes words from the vocabulary (they become [UNK]), which is
    how the first-token collision case is manufactured.
    """
    vocab = {"[PAD]": 0, "[UNK]": 1, "[EOS]": 2}
    for word in _fixture_words():
        if word not in vocab and word not in drop:
            vocab[word] = len(vocab)
    backend = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    backend.pre_tokenizer = pre_tokenizers.Whitespace()
    tok = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        pad_token="[PAD]",
        unk_token="[UNK]",
        eos_token="[EOS]",
    )
    tok.model_max_length = 256
    return tok


@pytest.fixture(scope="session")
def tokenizer() -> PreTrainedTokenizerFast:
    return make_tokenizer()


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.json"
    path.write_text(json.dumps(_corpus_doc()), encoding="utf-8")
    return load_dataset(str(path))


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus-file") / "corpus.json"
    path.write_text(json.dumps(_corpus_doc(12)), encoding="utf-8")
    return path


def make_encoder(tokenizer, num_labels: int, seed: int = 0) -> BertForSequenceClassification:
    import torch

    torch.manual_seed(seed)
    cfg = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=256,
        num_labels=num_labels,
        pad_token_id=tokenizer.pad_token_id,
    )
    return BertForSequenceClassification(cfg)


def make_decoder(tokenizer, seed: int = 0) -> GPT2LMHeadModel:
    import torch

    torch.manual_seed(seed)
    cfg = GPT2Config(
        vocab_size=tokenizer.vocab_size,
        n_embd=32,
        n_layer=2,
        n_head=2,
        n_positions=256,
        bos_token_id=tokenizer.eos_token_id,
        eos_token_id=tokenizer.eos_token_id,
        pad_token_id=tokenizer.pad_token_id,
    )
    return GPT2LMHeadModel(cfg)


@pytest.fixture(scope="session")
def encoder_init(tokenizer):
    return lambda n_labels: make_encoder(tokenizer, n_labels)


@pytest.fixture(scope="session")
def decoder_init(tokenizer):
    return lambda _n: make_decoder(tokenizer)
