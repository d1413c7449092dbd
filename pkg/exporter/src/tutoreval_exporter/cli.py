"""Command-line entry point: ``tutoreval-export``.

One executable, four tasks selected with ``--task``:

- ``embed``    corpus + encoder checkpoint -> embedding score file
- ``logits``   corpus + binary encoder     -> logit score file
- ``probs``    corpus + causal LM          -> probability score file
- ``finetune`` corpus + base checkpoint    -> trained model directories

Exit codes follow the main toolkit: 0 success, 1 invalid input, 2 I/O.
"""

from __future__ import annotations

import argparse
import sys

from tutoreval import Dimension, InputTextMode, load_dataset
from tutoreval.corpus import DatasetError

from .export import ExporterError, export_decoder_probs, export_embeddings, export_encoder_logits
from .finetune import finetune
from .recipes import FinetuneRecipe, RecipeTarget, default_recipe


def _dimension(value: str) -> Dimension:
    try:
        return Dimension(value)
    except ValueError:
        names = ", ".join(d.value for d in Dimension)
        raise argparse.ArgumentTypeError(f"dimension must be one of: {names}")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tutoreval-export",
        description="Produce neural score files for the tutor-response toolkit.",
    )
    p.add_argument(
        "--task", required=True, choices=["embed", "logits", "probs", "finetune"]
    )
    p.add_argument("--input", required=True, help="corpus JSON file")
    p.add_argument(
        "--model",
        required=True,
        help="checkpoint directory or hub identifier",
    )
    p.add_argument("--output", required=True, help="score file or model output dir")
    p.add_argument("--dimension", type=_dimension, default=None)
    p.add_argument(
        "--text-mode",
        choices=[m.value for m in InputTextMode],
        default=InputTextMode.RESPONSE_ONLY.value,
    )
    p.add_argument(
        "--recipe",
        choices=[t.value for t in RecipeTarget],
        default=None,
        help="finetune target (required for --task finetune)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-length", type=int, default=None)
    p.add_argument(
        "--epochs", type=int, default=None, help="override the recipe's epoch count"
    )
    p.add_argument(
        "--batch-size", type=int, default=None, help="override the recipe's batch size"
    )
    return p


def _require_dimension(args) -> Dimension:
    if args.dimension is None:
        raise ExporterError(f"--dimension is required for --task {args.task}")
    return args.dimension


def _run(args) -> int:
    from transformers import (
        AutoModel,
        AutoModelForCausalLM,
        AutoModelForSequenceClassification,
        AutoTokenizer,
    )

    dataset = load_dataset(args.input)
    tokenizer = AutoTokenizer.from_pretrained(args.model)

    if args.task == "embed":
        model = AutoModel.from_pretrained(args.model)
        records = export_embeddings(
            dataset,
            InputTextMode(args.text_mode),
            model,
            tokenizer,
            args.output,
            max_length=args.max_length,
        )
        print(f"wrote {len(records)} embedding records to {args.output}")
        return 0

    if args.task == "logits":
        dim = _require_dimension(args)
        model = AutoModelForSequenceClassification.from_pretrained(args.model)
        records = export_encoder_logits(
            dataset, dim, model, tokenizer, args.output, max_length=args.max_length
        )
        print(f"wrote {len(records)} logit records to {args.output}")
        return 0

    if args.task == "probs":
        dim = _require_dimension(args)
        model = AutoModelForCausalLM.from_pretrained(args.model)
        records = export_decoder_probs(
            dataset, dim, model, tokenizer, args.output, max_length=args.max_length
        )
        print(f"wrote {len(records)} probability records to {args.output}")
        return 0

    # finetune
    if args.recipe is None:
        raise ExporterError("--recipe is required for --task finetune")
    target = RecipeTarget(args.recipe)
    recipe = default_recipe(target)
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if overrides:
        recipe = FinetuneRecipe(**{**recipe.to_dict(), **overrides, "target": target})

    if target.is_decoder:
        def model_init(_: int):
            return AutoModelForCausalLM.from_pretrained(args.model)
    else:
        def model_init(n_labels: int):
            return AutoModelForSequenceClassification.from_pretrained(
                args.model, num_labels=n_labels, ignore_mismatched_sizes=True
            )

    dirs = finetune(
        recipe,
        dataset,
        args.output,
        model_init=model_init,
        tokenizer=tokenizer,
        seed=args.seed,
        base_model=args.model,
    )
    for d in dirs:
        print(f"trained {d}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return _run(args)
    except (ExporterError, DatasetError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
