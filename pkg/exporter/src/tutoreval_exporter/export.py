"""Turn corpora plus checkpoints into score files.

Three exporters, one per score payload kind:

- :func:`export_embeddings` -- mean-pooled sentence embeddings,
- :func:`export_encoder_logits` -- the positive-class logit of a binary
  sequence classifier,
- :func:`export_decoder_probs` -- per-label probabilities from a causal LM,
  softmax over exactly the three label-initial token logits.

All three iterate responses in corpus order, run the model without gradients
or sampling, and write the JSONL interchange format, so their output is
deterministic for a fixed checkpoint and always round-trips through
``read_scores``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import torch

from tutoreval import ClassProbabilities, Dimension, InputTextMode, ScoreRecord, TernaryLabel, write_scores
from tutoreval.corpus import Conversation, TutorResponse

from .prompts import PromptBundle, default_prompts, history_text


class ExporterError(ValueError):
    """Raised when a model/tokenizer cannot support the requested export."""


def _iter_responses(corpus) -> Iterable[tuple[Conversation, TutorResponse]]:
    for conv in corpus.conversations:
        for resp in conv.responses:
            yield conv, resp


def _model_max_length(model, tokenizer, max_length: int | None) -> int:
    if max_length is not None:
        return max_length
    limit = getattr(tokenizer, "model_max_length", None)
    if limit is not None and limit < 1_000_000:
        return int(limit)
    return int(getattr(model.config, "max_position_embeddings", 512))


def _encode_truncated(tokenizer, text: str, limit: int) -> dict[str, torch.Tensor]:
    return tokenizer(
        text, return_tensors="pt", truncation=True, max_length=limit
    )


def _mean_pool(last_hidden: torch.Tensor, mask: torch.Tensor) -> np.ndarray:
    """Attention-masked mean over the sequence axis."""
    m = mask.unsqueeze(-1).to(last_hidden.dtype)
    summed = (last_hidden * m).sum(dim=1)
    counts = m.sum(dim=1).clamp(min=1.0)
    return (summed / counts).squeeze(0).cpu().numpy().astype(np.float64)


def _embed_text(model, tokenizer, text: str, limit: int) -> np.ndarray:
    if not text:
        # tokenizers disagree about empty strings; a PAD placeholder keeps
        # the record (empty responses are legal corpus content)
        text = tokenizer.pad_token or " "
    enc = _encode_truncated(tokenizer, text, limit)
    with torch.no_grad():
        out = model(**enc)
    hidden = out.last_hidden_state if hasattr(out, "last_hidden_state") else out[0]
    return _mean_pool(hidden, enc["attention_mask"])


def export_embeddings(
    corpus,
    text_mode: InputTextMode,
    model,
    tokenizer,
    path: str,
    *,
    source: str | None = None,
    max_length: int | None = None,
) -> list[ScoreRecord]:
    """Write one embedding record per response.

    In ``RESPONSE_ONLY`` mode the embedding is the pooled response text; in
    ``RESPONSE_WITH_HISTORY`` mode it is the response embedding concatenated
    with the full-history embedding, doubling the dimension.  The two modes
    carry distinct ``source`` tags by default so downstream joins cannot mix
    them up.
    """
    model.eval()
    limit = _model_max_length(model, tokenizer, max_length)
    if source is None:
        source = f"embeddings:{text_mode.value}"

    records: list[ScoreRecord] = []
    for conv, resp in _iter_responses(corpus):
        vec = _embed_text(model, tokenizer, resp.text, limit)
        if text_mode is InputTextMode.RESPONSE_WITH_HISTORY:
            hist = _embed_text(model, tokenizer, history_text(conv), limit)
            vec = np.concatenate([vec, hist])
        records.append(
            ScoreRecord(response_id=resp.id, source=source, embedding=vec)
        )
    write_scores(records, path)
    return records


def export_encoder_logits(
    corpus,
    dim: Dimension,
    model,
    tokenizer,
    path: str,
    *,
    source: str | None = None,
    max_length: int | None = None,
) -> list[ScoreRecord]:
    """Write the positive-class logit of a binary encoder per response.

    The checkpoint must expose exactly two labels (the merged-negative
    training scheme); the exported value is ``logits[:, 1]``, raw and
    uncalibrated -- cut points come later.
    """
    model.eval()
    n_labels = int(getattr(model.config, "num_labels", 0))
    if n_labels != 2:
        raise ExporterError(
            f"binary logit export needs a 2-label head, checkpoint has {n_labels}"
        )
    limit = _model_max_length(model, tokenizer, max_length)
    if source is None:
        source = f"encoder-logits:{dim.value}"

    records: list[ScoreRecord] = []
    for _, resp in _iter_responses(corpus):
        text = resp.text or (tokenizer.pad_token or " ")
        enc = _encode_truncated(tokenizer, text, limit)
        with torch.no_grad():
            logits = model(**enc).logits
        records.append(
            ScoreRecord(
                response_id=resp.id,
                source=source,
                logit=float(logits[0, 1].item()),
            )
        )
    write_scores(records, path)
    return records


def candidate_first_tokens(tokenizer) -> dict[TernaryLabel, int]:
    """First token id of each label string; they must be pairwise distinct.

    Constrained scoring reads exactly one logit per label, so two labels
    sharing a first token would be indistinguishable.  That is a property of
    the tokenizer, not of any particular input, hence the hard error up
    front.
    """
    firsts: dict[TernaryLabel, int] = {}
    for label in TernaryLabel:
        ids = tokenizer.encode(label.value, add_special_tokens=False)
        if not ids:
            raise ExporterError(f"label {label.value!r} tokenizes to nothing")
        firsts[label] = int(ids[0])
    if len(set(firsts.values())) != len(firsts):
        pairs = {lab.value: tid for lab, tid in firsts.items()}
        raise ExporterError(
            f"label first tokens collide under this tokenizer: {pairs}"
        )
    return firsts


def _chat_prompt(tokenizer, system: str, user: str) -> str:
    """Serialized prompt up to (and including) the assistant-start marker."""
    if getattr(tokenizer, "chat_template", None):
        return tokenizer.apply_chat_template(
            [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            tokenize=False,
            add_generation_prompt=True,
        )
    return f"{system}\n\n{user}\n\nAnswer:"


def build_prompt(
    tokenizer,
    bundle: PromptBundle,
    conversation: Conversation,
    response: TutorResponse,
    dim: Dimension,
    limit: int,
) -> str:
    """Render the scoring prompt, dropping oldest history turns to fit.

    The final student turn carries the signal the rubric asks about, so
    truncation always eats from the top of the conversation.
    """
    n_turns = len(conversation.history)
    while True:
        user = bundle.render_user(
            history_text(conversation, n_turns or None), dim, response.text
        )
        text = _chat_prompt(tokenizer, bundle.system, user)
        if len(tokenizer.encode(text)) <= limit or n_turns == 0:
            return text
        n_turns -= 1


def export_decoder_probs(
    corpus,
    dim: Dimension,
    model,
    tokenizer,
    path: str,
    *,
    prompts: PromptBundle | None = None,
    source: str | None = None,
    max_length: int | None = None,
) -> list[ScoreRecord]:
    """Write per-label probabilities from one constrained forward pass each.

    The model never generates: the logits at the final prompt position are
    gathered at the three label-initial token ids and softmaxed.  Everything
    else in the vocabulary is ignored, which both prevents hallucinated
    labels and makes the export greedy-deterministic.
    """
    model.eval()
    bundle = prompts or default_prompts()
    firsts = candidate_first_tokens(tokenizer)
    limit = _model_max_length(model, tokenizer, max_length)
    if source is None:
        source = f"decoder-probs:{dim.value}"

    order = [TernaryLabel.YES, TernaryLabel.NO, TernaryLabel.TO_SOME_EXTENT]
    token_ids = torch.tensor([firsts[lab] for lab in order])

    records: list[ScoreRecord] = []
    for conv, resp in _iter_responses(corpus):
        text = build_prompt(tokenizer, bundle, conv, resp, dim, limit)
        enc = tokenizer(text, return_tensors="pt")
        with torch.no_grad():
            logits = model(**enc).logits[0, -1, :]
        picked = logits[token_ids]
        probs = torch.softmax(picked, dim=0).double().cpu().numpy()
        records.append(
            ScoreRecord(
                response_id=resp.id,
                source=source,
                probs=ClassProbabilities(
                    p_yes=float(probs[0]),
                    p_no=float(probs[1]),
                    p_tse=float(probs[2]),
                ),
            )
        )
    write_scores(records, path)
    return records


def unconstrained_first_token(model, tokenizer, text: str) -> int:
    """Full-vocabulary greedy first token for a rendered prompt.

    Diagnostic helper: whenever this lands on one of the three candidate
    ids, the constrained export must pick the same label.
    """
    enc = tokenizer(text, return_tensors="pt")
    with torch.no_grad():
        logits = model(**enc).logits[0, -1, :]
    return int(torch.argmax(logits).item())
