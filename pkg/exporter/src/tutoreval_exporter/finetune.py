"""Fine-tune the small checkpoints that feed the exporters.

One entry point, :func:`finetune`, driven entirely by the recipe target:

======================== ============================================ ======
target                   trains                                       dirs
======================== ============================================ ======
binary_encoder_134       2-class encoder per ternary dimension          4
encoder_track5           tutor-identity encoder                         1
decoder_dimension_specific causal LM per ternary dimension              4
decoder_multi_dimension  one causal LM on all four dimensions           1
======================== ============================================ ======

Every produced directory holds ``save_pretrained`` weights plus a
``manifest.json`` recording the recipe, the seed, and a fingerprint of the
training data -- enough to reconstruct which model saw what.

Out-of-memory recovery: if a training attempt dies with an out-of-memory
error, the run restarts from a fresh model with the batch size halved,
repeatedly, down to batch size 1.  The batch size that finally succeeded is
recorded in the manifest as ``batch_size_used``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
from torch.optim import AdamW
from transformers import get_linear_schedule_with_warmup

from tutoreval import Dimension, TernaryLabel, grouped_split
from tutoreval.corpus import Dataset

from .prompts import PromptBundle, default_prompts, finetune_messages
from .recipes import FinetuneRecipe, RecipeTarget


def data_fingerprint(corpus) -> str:
    """Stable digest of (conversation, response, dimension, label) tuples."""
    rows = []
    for conv in corpus.conversations:
        for resp in conv.responses:
            for dim in sorted(resp.annotations, key=lambda d: d.value):
                rows.append(
                    (conv.id, resp.id, dim.value, resp.annotations[dim].value)
                )
    blob = json.dumps(sorted(rows), separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _seed_everything(seed: int) -> np.random.Generator:
    torch.manual_seed(seed)
    return np.random.default_rng(seed)


def _pad_batch(seqs: Sequence[list[int]], pad_id: int) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(s) for s in seqs)
    ids = torch.full((len(seqs), width), pad_id, dtype=torch.long)
    mask = torch.zeros((len(seqs), width), dtype=torch.long)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = torch.tensor(s, dtype=torch.long)
        mask[i, : len(s)] = 1
    return ids, mask


def _run_with_oom_retry(
    train_once: Callable[[int], object], batch_size: int
) -> tuple[object, int]:
    bs = batch_size
    while True:
        try:
            return train_once(bs), bs
        except (RuntimeError, torch.cuda.OutOfMemoryError) as err:
            if "out of memory" not in str(err).lower() or bs <= 1:
                raise
            bs = max(1, bs // 2)


def _train_classifier(
    model_init: Callable[[int], torch.nn.Module],
    tokenizer,
    texts: list[str],
    labels: list[int],
    n_labels: int,
    recipe: FinetuneRecipe,
    seed: int,
) -> tuple[torch.nn.Module, int]:
    def train_once(batch_size: int) -> torch.nn.Module:
        rng = _seed_everything(seed)
        model = model_init(n_labels)
        model.train()
        opt = AdamW(
            model.parameters(),
            lr=recipe.learning_rate,
            weight_decay=recipe.weight_decay,
        )
        y = torch.tensor(labels, dtype=torch.long)
        for _ in range(recipe.epochs):
            order = rng.permutation(len(texts))
            for start in range(0, len(order), batch_size):
                idx = order[start : start + batch_size]
                enc = tokenizer(
                    [texts[i] or (tokenizer.pad_token or " ") for i in idx],
                    return_tensors="pt",
                    padding=True,
                    truncation=True,
                )
                out = model(**enc, labels=y[idx])
                opt.zero_grad()
                out.loss.backward()
                opt.step()
        model.eval()
        return model

    return _run_with_oom_retry(train_once, recipe.batch_size)


def _train_decoder(
    model_init: Callable[[int], torch.nn.Module],
    tokenizer,
    prompts: list[str],
    answers: list[str],
    recipe: FinetuneRecipe,
    seed: int,
) -> tuple[torch.nn.Module, int]:
    """Next-token prediction restricted to the assistant message.

    Prompt positions get label -100 so only the answer tokens contribute
    loss, matching the pre-training objective on exactly the text we want
    the model to emit.
    """
    pad_id = tokenizer.pad_token_id
    if pad_id is None:
        pad_id = tokenizer.eos_token_id

    encoded: list[tuple[list[int], int]] = []
    for prompt, answer in zip(prompts, answers):
        p_ids = tokenizer.encode(prompt)
        a_ids = tokenizer.encode(answer, add_special_tokens=False)
        encoded.append((p_ids + a_ids, len(p_ids)))

    def train_once(batch_size: int) -> torch.nn.Module:
        rng = _seed_everything(seed)
        model = model_init(0)
        model.train()
        opt = AdamW(
            model.parameters(),
            lr=recipe.learning_rate,
            weight_decay=recipe.weight_decay,
        )
        steps_per_epoch = -(-len(encoded) // batch_size)
        total = steps_per_epoch * recipe.epochs
        sched = get_linear_schedule_with_warmup(
            opt, int(recipe.warmup_ratio * total), total
        )
        for _ in range(recipe.epochs):
            order = rng.permutation(len(encoded))
            for start in range(0, len(order), batch_size):
                idx = order[start : start + batch_size]
                seqs = [encoded[i][0] for i in idx]
                ids, mask = _pad_batch(seqs, pad_id)
                labels = ids.clone()
                labels[mask == 0] = -100
                for row, i in enumerate(idx):
                    labels[row, : encoded[i][1]] = -100
                out = model(input_ids=ids, attention_mask=mask, labels=labels)
                opt.zero_grad()
                out.loss.backward()
                opt.step()
                sched.step()
        model.eval()
        return model

    return _run_with_oom_retry(train_once, recipe.batch_size)


def _write_bundle(
    out_dir: Path,
    model,
    tokenizer,
    manifest: dict,
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True), encoding="utf-8"
    )
    return out_dir


def _decoder_examples(
    corpus, dims: Sequence[Dimension], tokenizer, bundle: PromptBundle
) -> tuple[list[str], list[str]]:
    from .export import build_prompt  # shared prompt rendering

    limit = getattr(tokenizer, "model_max_length", 1 << 30)
    if limit > 1 << 29:
        limit = 1 << 29
    prompts, answers = [], []
    for conv in corpus.conversations:
        for resp in conv.responses:
            for dim in dims:
                if dim not in resp.annotations:
                    continue
                prompts.append(
                    build_prompt(tokenizer, bundle, conv, resp, dim, limit)
                )
                answers.append(resp.annotations[dim].value)
    return prompts, answers


def finetune(
    recipe: FinetuneRecipe,
    train_split,
    out_dir: str | Path,
    *,
    model_init: Callable[[int], torch.nn.Module],
    tokenizer,
    seed: int = 0,
    prompts: PromptBundle | None = None,
    base_model: str = "",
) -> list[Path]:
    """Train per the recipe and return the produced model directories.

    ``model_init`` must return a fresh, randomly-equivalent model each call
    (classifier targets receive the required label count; decoder targets
    ignore the argument).  ``train_split`` is the grouped training side; the
    decoder targets internally re-split it 80/20 at conversation level and
    record the held-out response ids in the manifest so decision thresholds
    can be derived on data the model never saw.
    """
    out_dir = Path(out_dir)
    bundle = prompts or default_prompts()
    fingerprint = data_fingerprint(train_split)
    base = {
        "recipe": recipe.to_dict(),
        "seed": seed,
        "base_model": base_model,
        "data_fingerprint": fingerprint,
        "objective": (
            "next_token_on_assistant" if recipe.target.is_decoder else "sequence_classification"
        ),
    }
    produced: list[Path] = []

    if recipe.target is RecipeTarget.BINARY_ENCODER_134:
        for dim in Dimension:
            texts, labels = [], []
            for conv in train_split.conversations:
                for resp in conv.responses:
                    if dim not in resp.annotations:
                        continue
                    texts.append(resp.text)
                    labels.append(
                        1 if resp.annotations[dim] is TernaryLabel.YES else 0
                    )
            model, used = _train_classifier(
                model_init, tokenizer, texts, labels, 2, recipe, seed
            )
            manifest = dict(
                base,
                dimension=dim.value,
                n_examples=len(texts),
                batch_size_used=used,
                label_scheme="positive=Yes negative=No+To-some-extent",
            )
            produced.append(
                _write_bundle(out_dir / f"binary_{dim.value}", model, tokenizer, manifest)
            )
        return produced

    if recipe.target is RecipeTarget.ENCODER_TRACK5:
        texts, tutors = [], []
        for conv in train_split.conversations:
            for resp in conv.responses:
                texts.append(resp.text)
                tutors.append(resp.tutor_id)
        names = sorted(set(tutors))
        labels = [names.index(t) for t in tutors]
        model, used = _train_classifier(
            model_init, tokenizer, texts, labels, len(names), recipe, seed
        )
        manifest = dict(
            base,
            n_examples=len(texts),
            batch_size_used=used,
            tutor_labels=names,
        )
        produced.append(
            _write_bundle(out_dir / "tutor_identity", model, tokenizer, manifest)
        )
        return produced

    # decoder targets: internal 80/20 grouped re-split for threshold work
    inner = Dataset(conversations=list(train_split.conversations))
    inner_train, inner_val = grouped_split(inner, ratio=0.8, seed=seed)
    val_ids = [r.id for c in inner_val.conversations for r in c.responses]

    dim_groups: list[tuple[str, list[Dimension]]]
    if recipe.target is RecipeTarget.DECODER_DIMENSION_SPECIFIC:
        dim_groups = [(f"decoder_{d.value}", [d]) for d in Dimension]
    else:
        dim_groups = [("decoder_multi", list(Dimension))]

    for name, dims in dim_groups:
        texts, answers = _decoder_examples(inner_train, dims, tokenizer, bundle)
        model, used = _train_decoder(
            model_init, tokenizer, texts, answers, recipe, seed
        )
        manifest = dict(
            base,
            dimensions=[d.value for d in dims],
            n_examples=len(texts),
            batch_size_used=used,
            internal_split={
                "ratio": 0.8,
                "train_conversations": len(inner_train.conversations),
                "val_conversations": len(inner_val.conversations),
                "val_response_ids": val_ids,
            },
        )
        produced.append(_write_bundle(out_dir / name, model, tokenizer, manifest))
    return produced
