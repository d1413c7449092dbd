"""Command-line surface for the tutor-response assessment pipeline.

Subcommands cover the batch workflow end to end: corpus splitting and label
statistics, n-gram model training and prediction, metric reports, logit
threshold calibration, probability-rule decoding, trivial baselines, and
leaderboard arithmetic (quartiles, winner deltas).

Exit codes: 0 on success, 1 on validation errors (bad flags, malformed or
inconsistent content), 2 on I/O errors (missing files, unwritable paths).
All randomness is controlled by an explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .corpus import (
    Dataset,
    DatasetError,
    Dimension,
    InputTextMode,
    TernaryLabel,
    build_input_text,
    class_distribution,
    grouped_split,
    load_dataset,
    save_dataset,
)
from .features import (
    Weighting,
    fit_vectorizer,
    transform,
    vectorizer_from_json,
    vectorizer_to_json,
)
from .classifiers import (
    Backend,
    LabeledMatrix,
    default_params,
    fit,
    model_from_json,
    model_to_json,
)
from .thresholds import (
    CalibrationObjective,
    calibrate_logit_thresholds,
    apply_prob_rules,
    default_rule_table,
    derive_rule_stats,
    load_rule_table,
    save_logit_thresholds,
    split_by_logit,
)
from .external_scores import (
    ScoreFileError,
    join_scores,
    read_predictions,
    read_scores,
    write_predictions,
)
from .evaluation import (
    EvalMode,
    MetricReport,
    always_yes,
    delta_report,
    format_delta_table,
    format_report_table,
    metrics,
    quartile,
    random_baseline,
)

BUNDLE_FORMAT_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors on stderr with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# shared helpers


def _labels_for_track(dataset: Dataset, track: int) -> tuple[list[str], list[str]]:
    """Collect (response ids, gold label strings) for a track, in corpus order."""
    ids: list[str] = []
    labels: list[str] = []
    if track == 5:
        for _, resp in dataset.responses():
            ids.append(resp.id)
            labels.append(resp.tutor_id)
        return ids, labels
    dim = Dimension.from_track(track)
    missing: list[str] = []
    for _, resp in dataset.responses():
        label = resp.annotations.get(dim)
        if label is None:
            missing.append(resp.id)
        else:
            ids.append(resp.id)
            labels.append(label.value)
    if missing:
        raise DatasetError(
            f"{len(missing)} response(s) missing annotation for {dim.value}: "
            + ", ".join(missing[:20])
            + ("..." if len(missing) > 20 else "")
        )
    return ids, labels


def _print_report(name: str, report: MetricReport, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report.to_json(), indent=1))
        return
    print(format_report_table([(name, report)]))
    parts = [f"{label} {score:.2f}" for label, score in sorted(report.per_class_f1.items())]
    print("per-class F1: " + " | ".join(parts))


def _track(value: str) -> int:
    track = int(value)
    if not 1 <= track <= 5:
        raise argparse.ArgumentTypeError(f"track must be in 1..5, got {track}")
    return track


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_split(args) -> int:
    dataset = load_dataset(args.input)
    train, dev = grouped_split(dataset, args.ratio, args.seed)
    base = args.input[: -len(".json")] if args.input.endswith(".json") else args.input
    train_out = args.train_out or base + ".train.json"
    dev_out = args.dev_out or base + ".dev.json"
    save_dataset(train, train_out)
    save_dataset(dev, dev_out)
    print(
        f"train: {train.n_conversations} conversations, "
        f"{train.n_responses} responses -> {train_out}"
    )
    print(f"dev:   {dev.n_conversations} conversations, {dev.n_responses} responses -> {dev_out}")
    return 0


def _tutor_distribution(dataset: Dataset) -> dict[str, tuple[int, float]]:
    counts: dict[str, int] = {}
    for _, resp in dataset.responses():
        counts[resp.tutor_id] = counts.get(resp.tutor_id, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise DatasetError("dataset has no responses")
    return {tid: (cnt, cnt / total) for tid, cnt in sorted(counts.items())}


def _cmd_stats(args) -> int:
    dataset = load_dataset(args.input)
    if args.track == 5:
        dist = _tutor_distribution(dataset)
        if args.json:
            print(
                json.dumps(
                    {tid: {"count": c, "share": round(f, 4)} for tid, (c, f) in dist.items()},
                    indent=1,
                )
            )
            return 0
        width = max(len(tid) for tid in dist)
        for tid, (count, frac) in dist.items():
            print(f"{tid:<{width}}  {count:>6}  {100 * frac:6.2f}%")
        return 0

    dims = [Dimension.from_track(args.track)] if args.track else list(Dimension)
    label_order = sorted(TernaryLabel, key=lambda lab: lab.rank, reverse=True)
    doc: dict[str, dict[str, dict]] = {}
    lines: list[str] = []
    name_w = max(len(d.value) for d in dims)
    label_w = max(len(lab.value) for lab in TernaryLabel)
    for dim in dims:
        dist = class_distribution(dataset, dim)
        doc[dim.value] = {
            lab.value: {"count": dist[lab][0], "share": round(dist[lab][1], 4)}
            for lab in label_order
            if lab in dist
        }
        for lab in label_order:
            if lab not in dist:
                continue
            count, frac = dist[lab]
            lines.append(
                f"{dim.value:<{name_w}}  {lab.value:<{label_w}}  {count:>6}  {100 * frac:6.2f}%"
            )
    if args.json:
        print(json.dumps(doc, indent=1))
    else:
        print("\n".join(lines))
    return 0


_PARAM_FLAGS = ("k", "n_trees", "max_depth", "reg", "epochs", "learning_rate", "rounds")
_FLAG_TO_FIELD = {"rounds": "n_rounds"}


def _build_params(args, backend: Backend):
    params = default_params(backend)
    legal = {f.name for f in dataclasses.fields(params)}
    overrides = {}
    for flag in _PARAM_FLAGS:
        value = getattr(args, flag)
        if value is None:
            continue
        name = _FLAG_TO_FIELD.get(flag, flag)
        if name not in legal:
            raise ValueError(
                f"--{flag.replace('_', '-')} does not apply to backend {backend.value}"
            )
        overrides[name] = value
    return dataclasses.replace(params, **overrides)


def _cmd_train(args) -> int:
    dataset = load_dataset(args.input)
    mode = InputTextMode(args.text_mode)
    _, labels = _labels_for_track(dataset, args.track)
    texts = [build_input_text(resp, conv, mode) for conv, resp in dataset.responses()]

    vectorizer = fit_vectorizer(texts, (args.ngram_lo, args.ngram_hi), Weighting(args.weighting))
    rows = [transform(vectorizer, text) for text in texts]
    class_names = sorted(set(labels))
    name_to_id = {name: i for i, name in enumerate(class_names)}
    data = LabeledMatrix(rows, [name_to_id[lab] for lab in labels], class_names)

    backend = Backend(args.backend)
    params = _build_params(args, backend)
    model = fit(backend, data, params, seed=args.seed)

    bundle = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "track": args.track,
        "text_mode": mode.value,
        "vectorizer": vectorizer_to_json(vectorizer),
        "model": model_to_json(model),
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh)
        fh.write("\n")
    print(
        f"trained {backend.value} on {data.n} responses "
        f"({len(class_names)} classes, {vectorizer.dim} features) -> {args.output}"
    )
    return 0


def _load_bundle(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        bundle = json.load(fh)
    if not isinstance(bundle, dict) or "model" not in bundle or "vectorizer" not in bundle:
        raise DatasetError(f"{path}: not a model bundle (expected vectorizer + model entries)")
    version = bundle.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise DatasetError(f"{path}: unsupported bundle format_version {version!r}")
    return bundle


def _cmd_predict(args) -> int:
    bundle = _load_bundle(args.model)
    vectorizer = vectorizer_from_json(bundle["vectorizer"])
    model = model_from_json(bundle["model"])
    mode = InputTextMode(bundle["text_mode"])
    track = int(bundle["track"])

    dataset = load_dataset(args.input)
    ids: list[str] = []
    predictions: list[str] = []
    for conv, resp in dataset.responses():
        vec = transform(vectorizer, build_input_text(resp, conv, mode))
        predictions.append(model.class_names[model.predict(vec)])
        ids.append(resp.id)
    write_predictions(ids, track, predictions, args.output)
    print(f"wrote {len(ids)} track-{track} predictions -> {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    rows = read_predictions(args.pred)
    if not rows:
        raise DatasetError(f"{args.pred}: no predictions")
    tracks = {int(row["track"]) for row in rows}
    if len(tracks) > 1:
        raise DatasetError(f"{args.pred}: mixed tracks {sorted(tracks)} in one predictions file")
    track = tracks.pop()
    if args.track is not None and args.track != track:
        raise DatasetError(f"--track {args.track} but predictions file carries track {track}")

    dataset = load_dataset(args.gold)
    ids, gold = _labels_for_track(dataset, track)
    by_id = {row["response_id"]: str(row["prediction"]) for row in rows}
    missing = [rid for rid in ids if rid not in by_id]
    if missing:
        raise DatasetError(
            f"{len(missing)} gold response(s) have no prediction: "
            + ", ".join(missing[:20])
            + ("..." if len(missing) > 20 else "")
        )
    pred = [by_id[rid] for rid in ids]
    report = metrics(gold, pred, EvalMode(args.mode))
    _print_report(args.name, report, args.json)
    return 0


def _cmd_calibrate(args) -> int:
    dataset = load_dataset(args.gold)
    records = read_scores(args.scores)
    rows = join_scores(dataset, records, require={"logit"})
    dim = Dimension.from_track(args.track)
    gold = []
    for row in rows:
        label = row.response.annotations.get(dim)
        if label is None:
            raise DatasetError(f"response {row.response.id!r} missing annotation for {dim.value}")
        gold.append(label)
    logits = [row.record.logit for row in rows]

    thresholds = calibrate_logit_thresholds(
        logits, gold, CalibrationObjective(args.objective), args.step
    )
    if args.output:
        save_logit_thresholds(thresholds, args.output)
    pred = [split_by_logit(logit, thresholds) for logit in logits]
    report = metrics(gold, pred, EvalMode.EXACT)
    if args.json:
        doc = {
            "t_low": thresholds.t_low,
            "t_high": thresholds.t_high,
            "objective": args.objective,
            "report": report.to_json(),
        }
        print(json.dumps(doc, indent=1))
    else:
        print(
            f"t_low {thresholds.t_low:+.2f}  t_high {thresholds.t_high:+.2f}  "
            f"macro-F1 {report.macro_f1:.2f}  accuracy {report.accuracy:.2f}"
        )
    return 0


def _cmd_rules(args) -> int:
    table = load_rule_table(args.table) if args.table else default_rule_table()
    records = read_scores(args.scores)
    dim = Dimension.from_track(args.track)

    gold: list[str] | None = None
    if args.gold:
        dataset = load_dataset(args.gold)
        rows = join_scores(dataset, records, require={"probs"})
        ids = [row.response.id for row in rows]
        probs = [row.record.probs for row in rows]
        gold = []
        for row in rows:
            label = row.response.annotations.get(dim)
            if label is None:
                raise DatasetError(
                    f"response {row.response.id!r} missing annotation for {dim.value}"
                )
            gold.append(label.value)
    else:
        lacking = [rec.response_id for rec in records if not rec.has("probs")]
        if lacking:
            raise ScoreFileError(
                f"{len(lacking)} record(s) carry no probs payload: "
                + ", ".join(lacking[:20])
                + ("..." if len(lacking) > 20 else "")
            )
        ids = [rec.response_id for rec in records]
        probs = [rec.probs for rec in records]

    pred = [apply_prob_rules(p, dim, table) for p in probs]
    if args.output:
        write_predictions(ids, args.track, [p.value for p in pred], args.output)
        print(f"wrote {len(ids)} track-{args.track} predictions -> {args.output}")

    counts = {label: pred.count(label) for label in sorted(TernaryLabel, reverse=True)}
    print("decisions: " + " | ".join(f"{lab.value} {cnt}" for lab, cnt in counts.items()))
    if args.stats:
        for label, mean in sorted(derive_rule_stats(probs, pred).items(), reverse=True):
            print(
                f"mean probs when {label.value}: "
                f"yes {mean.p_yes:.3f}  no {mean.p_no:.3f}  tse {mean.p_tse:.3f}"
            )
    if gold is not None:
        report = metrics(gold, [p.value for p in pred], EvalMode(args.mode))
        _print_report("rules", report, args.json)
    return 0


def _cmd_baseline(args) -> int:
    dataset = load_dataset(args.gold)
    _, gold = _labels_for_track(dataset, args.track)
    if args.kind == "always_yes":
        pred = [label.value for label in always_yes(len(gold))]
    else:
        pred = random_baseline(len(gold), sorted(set(gold)), args.seed)
    report = metrics(gold, pred, EvalMode(args.mode))
    _print_report(args.kind, report, args.json)
    return 0


def _cmd_quartile(args) -> int:
    bucket = quartile(args.rank, args.total)
    if args.json:
        print(json.dumps({"rank": args.rank, "total": args.total, "quartile": bucket}))
    else:
        print(f"Q{bucket}")
    return 0


def _read_score_map(path: str) -> dict[str, float]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or not doc:
        raise DatasetError(f"{path}: expected a non-empty JSON object of metric -> score")
    return {str(key): float(value) for key, value in doc.items()}


def _cmd_delta(args) -> int:
    if args.pair:
        ours = {name: float(our) for name, our, _ in args.pair}
        winners = {name: float(win) for name, _, win in args.pair}
    elif args.ours and args.winners:
        ours = _read_score_map(args.ours)
        winners = _read_score_map(args.winners)
    else:
        raise ValueError("provide either --ours and --winners files, or one or more --pair")
    if args.json:
        print(json.dumps(delta_report(ours, winners), indent=1))
    else:
        print(format_delta_table(ours, winners))
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="tutoreval", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("split", help="grouped train/dev split of a dialogue corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out")
    p.add_argument("--dev-out")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("stats", help="class balance per assessment dimension")
    p.add_argument("--input", required=True)
    p.add_argument("--track", type=_track, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("train", help="fit an n-gram classifier and save the model bundle")
    p.add_argument("--input", required=True)
    p.add_argument("--track", type=_track, required=True)
    p.add_argument("--backend", choices=[b.value for b in Backend], required=True)
    p.add_argument("--weighting", choices=[w.value for w in Weighting], default="tfidf")
    p.add_argument("--ngram-lo", type=int, default=1)
    p.add_argument("--ngram-hi", type=int, default=1)
    p.add_argument(
        "--text-mode", choices=[m.value for m in InputTextMode], default="response"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, help="neighbors (knn backends)")
    p.add_argument("--n-trees", type=int, help="ensemble size (random_forest)")
    p.add_argument("--max-depth", type=int, help="tree depth cap (tree backends)")
    p.add_argument("--reg", type=float, help="L2 strength (linear_svm)")
    p.add_argument("--epochs", type=int, help="subgradient epochs (linear_svm)")
    p.add_argument("--learning-rate", type=float, help="step size (softmax / boosting)")
    p.add_argument("--rounds", type=int, help="boosting rounds (gradient_boosted_trees)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a saved model bundle")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score a predictions file against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--track", type=_track, default=None, help="must match the predictions file")
    p.add_argument("--mode", choices=[m.value for m in EvalMode], default="exact")
    p.add_argument("--name", default="predictions", help="row label in the report table")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("calibrate", help="grid-search ternary cut points for binary logits")
    p.add_argument("--scores", required=True, help="JSON Lines score file with logit payloads")
    p.add_argument("--gold", required=True)
    p.add_argument("--track", type=_track, required=True)
    p.add_argument(
        "--objective", choices=[o.value for o in CalibrationObjective], default="macro_f1"
    )
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--output", help="write the chosen thresholds as JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("rules", help="decide ternary labels from per-class probabilities")
    p.add_argument("--scores", required=True, help="JSON Lines score file with probs payloads")
    p.add_argument("--track", type=_track, required=True)
    p.add_argument("--table", help="rule-table JSON (defaults to the bundled table)")
    p.add_argument("--gold", help="gold corpus; adds a metrics report")
    p.add_argument("--output", help="write decisions as a predictions file")
    p.add_argument("--mode", choices=[m.value for m in EvalMode], default="exact")
    p.add_argument("--stats", action="store_true", help="mean probabilities per decision")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_rules)

    p = sub.add_parser("baseline", help="score the trivial baselines")
    p.add_argument("--kind", choices=["always_yes", "random"], required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--track", type=_track, required=True)
    p.add_argument("--mode", choices=[m.value for m in EvalMode], default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("quartile", help="leaderboard rank -> quartile bucket")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_quartile)

    p = sub.add_parser("delta", help="winner-minus-ours score differences")
    p.add_argument("--ours", help="JSON file of metric -> our score")
    p.add_argument("--winners", help="JSON file of metric -> winning score")
    p.add_argument(
        "--pair",
        nargs=3,
        action="append",
        metavar=("NAME", "OURS", "WINNER"),
        help="inline score pair; repeatable",
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_delta)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # DatasetError / ScoreFileError included
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
