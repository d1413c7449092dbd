"""Shared-task scoring: macro-F1/accuracy, baselines, overrides, rankings.

Scores are reported on a 0-100 scale.  Macro-F1 averages per-class F1 over
the union of classes observed in gold or predictions; the lenient mode first
collapses "To some extent" into "Yes" on both sides.  Ranking positions are
summarized into quartiles, and winner gaps are rendered as two-decimal
deltas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Sequence

import numpy as np

from .corpus import TernaryLabel

__all__ = [
    "EvalMode",
    "MetricReport",
    "OverrideTable",
    "metrics",
    "always_yes",
    "random_baseline",
    "apply_overrides",
    "quartile",
    "delta_report",
    "format_report_table",
    "format_delta_table",
    "report_to_json",
]


class EvalMode(Enum):
    EXACT = "exact"
    LENIENT = "lenient"


@dataclass(frozen=True)
class MetricReport:
    """Macro-F1 and accuracy (0-100) plus per-class F1, for one label set."""

    macro_f1: float
    accuracy: float
    per_class_f1: dict[str, float]
    mode: EvalMode
    n: int

    def to_json(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_class_f1": self.per_class_f1,
            "mode": self.mode.value,
            "n": self.n,
        }


def _canonical(label: Hashable) -> str:
    return label.value if isinstance(label, TernaryLabel) else str(label)


def _collapse_lenient(labels: Sequence[Hashable]) -> list[str]:
    out = []
    for lab in labels:
        raw = _canonical(lab)
        try:
            tern = TernaryLabel(raw)
        except ValueError:
            raise ValueError(
                f"lenient mode is only defined for ternary labels, got {raw!r} "
                "(tutor-identity labels are scored exact only)"
            ) from None
        out.append(TernaryLabel.YES.value if tern is TernaryLabel.TO_SOME_EXTENT else raw)
    return out


def metrics(
    gold: Sequence[Hashable], pred: Sequence[Hashable], mode: EvalMode = EvalMode.EXACT
) -> MetricReport:
    """Score predictions against gold labels.

    Per-class F1 is 2PR/(P+R), zero when P+R is zero; macro-F1 averages over
    every class present in gold or predictions.  Labels may be TernaryLabel
    values or arbitrary strings (track 5 tutor identities); lenient mode
    requires ternary labels and maps To some extent to Yes on both sides
    before scoring.
    """
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    if len(gold) == 0:
        raise ValueError("cannot score an empty label set")
    if mode is EvalMode.LENIENT:
        g = _collapse_lenient(gold)
        p = _collapse_lenient(pred)
    else:
        g = [_canonical(x) for x in gold]
        p = [_canonical(x) for x in pred]

    classes = sorted(set(g) | set(p))
    n = len(g)
    correct = sum(1 for a, b in zip(g, p) if a == b)
    per_class: dict[str, float] = {}
    for c in classes:
        tp = sum(1 for a, b in zip(g, p) if a == c and b == c)
        gold_c = sum(1 for a in g if a == c)
        pred_c = sum(1 for b in p if b == c)
        per_class[c] = 0.0 if gold_c + pred_c == 0 or tp == 0 else 200.0 * tp / (gold_c + pred_c)
    macro = sum(per_class.values()) / len(per_class)
    return MetricReport(
        macro_f1=macro,
        accuracy=100.0 * correct / n,
        per_class_f1=per_class,
        mode=mode,
        n=n,
    )


def always_yes(n: int) -> list[TernaryLabel]:
    """The trivial baseline: predict Yes for every item."""
    if n <= 0:
        raise ValueError("n must be positive")
    return [TernaryLabel.YES] * n


def random_baseline(n: int, classes: Sequence[Hashable], seed: int) -> list:
    """Seeded i.i.d. uniform predictions over the given classes."""
    if n <= 0:
        raise ValueError("n must be positive")
    if len(classes) == 0:
        raise ValueError("need at least one class")
    rng = np.random.default_rng(seed)
    choices = list(classes)
    return [choices[i] for i in rng.integers(0, len(choices), size=n)]


class OverrideTable(dict):
    """Forced labels per anonymized tutor tag, e.g. {"Tutor9": "Novice"}."""


def apply_overrides(
    pred: Sequence[str], tags: Sequence[str], table: OverrideTable | dict[str, str]
) -> list[str]:
    """Force the label of every row whose tag appears in the table.

    Rows with unlisted tags pass through unchanged; the operation is
    idempotent.
    """
    if len(pred) != len(tags):
        raise ValueError(f"{len(pred)} predictions but {len(tags)} tags")
    return [table.get(tag, p) for p, tag in zip(pred, tags)]


def quartile(rank: int, total: int) -> int:
    """Bucket a leaderboard rank into quartiles 1-4: min(4, floor(4r/n) + 1)."""
    if not 1 <= rank <= total:
        raise ValueError(f"rank must satisfy 1 <= rank <= total, got {rank}/{total}")
    return min(4, math.floor(4 * rank / total) + 1)


def delta_report(ours: dict[str, float], winners: dict[str, float]) -> dict[str, float]:
    """Per-metric winner-minus-ours differences, rounded to two decimals."""
    missing = set(ours) ^ set(winners)
    if missing:
        raise ValueError(f"metric keys differ between the two score maps: {sorted(missing)}")
    return {key: round(winners[key] - ours[key], 2) for key in ours}


def format_report_table(rows: list[tuple[str, MetricReport]]) -> str:
    """Render named reports as an aligned two-metric text table."""
    name_w = max(len("Approach"), *(len(name) for name, _ in rows)) if rows else 8
    lines = [f"{'Approach':<{name_w}}  {'F1-macro':>8}  {'Accuracy':>8}"]
    for name, rep in rows:
        lines.append(f"{name:<{name_w}}  {rep.macro_f1:>8.2f}  {rep.accuracy:>8.2f}")
    return "\n".join(lines)


def format_delta_table(
    ours: dict[str, float], winners: dict[str, float]
) -> str:
    """Render winner gaps as 'winner - ours = delta' rows, two decimals each."""
    deltas = delta_report(ours, winners)
    key_w = max(len(k) for k in deltas)
    lines = []
    for key in deltas:
        lines.append(
            f"{key:<{key_w}}  {winners[key]:.2f} - {ours[key]:.2f} = {deltas[key]:05.2f}"
        )
    return "\n".join(lines)


def report_to_json(report: MetricReport) -> str:
    return json.dumps(report.to_json(), indent=1)
