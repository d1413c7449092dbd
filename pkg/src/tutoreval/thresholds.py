"""Three-class recovery from binary logits or label probabilities.

A binary positive-class logit is split into No / To some extent / Yes by two
cut points (No scores sit below To-some-extent scores even when both were
trained as one negative class, which is what makes the recovery work).  The
cut points are calibrated by exhaustive grid search over [-1, 1].  For
decoder pipelines, per-dimension rule tables on (p_yes, p_no) decide Yes or
No with To some extent as the fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files

import numpy as np

from .corpus import Dimension, TernaryLabel

__all__ = [
    "LogitThresholds",
    "DimensionRules",
    "ProbRuleTable",
    "ClassProbabilities",
    "CalibrationObjective",
    "split_by_logit",
    "apply_prob_rules",
    "validate_rule_table",
    "calibrate_logit_thresholds",
    "derive_rule_stats",
    "load_rule_table",
    "default_rule_table",
    "save_logit_thresholds",
    "load_logit_thresholds",
]

CALIBRATION_RANGE = (-1.0, 1.0)


class CalibrationObjective(Enum):
    MACRO_F1 = "macro_f1"
    ACCURACY = "accuracy"


@dataclass(frozen=True)
class LogitThresholds:
    """The two decision frontiers on the positive-class logit.

    ``t_low`` separates No from To some extent, ``t_high`` separates
    To some extent from Yes; both live in the calibration range [-1, 1].
    """

    t_low: float
    t_high: float

    def __post_init__(self) -> None:
        lo, hi = CALIBRATION_RANGE
        if not (lo <= self.t_low < self.t_high <= hi):
            raise ValueError(
                f"thresholds must satisfy {lo} <= t_low < t_high <= {hi}, "
                f"got ({self.t_low}, {self.t_high})"
            )


@dataclass(frozen=True)
class ClassProbabilities:
    """A point on the 3-class probability simplex (tolerance 1e-6)."""

    p_yes: float
    p_no: float
    p_tse: float

    def __post_init__(self) -> None:
        for name, p in (("p_yes", self.p_yes), ("p_no", self.p_no), ("p_tse", self.p_tse)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")
        total = self.p_yes + self.p_no + self.p_tse
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_yes, self.p_no, self.p_tse])


@dataclass(frozen=True)
class DimensionRules:
    """Decision rules for one dimension: Yes if p_yes > yes_p_yes_gt and
    p_no < yes_p_no_lt; No if p_yes < no_p_yes_lt and p_no > no_p_no_gt;
    otherwise To some extent."""

    yes_p_yes_gt: float
    yes_p_no_lt: float
    no_p_yes_lt: float
    no_p_no_gt: float

    def yes_fires(self, p: ClassProbabilities) -> bool:
        return p.p_yes > self.yes_p_yes_gt and p.p_no < self.yes_p_no_lt

    def no_fires(self, p: ClassProbabilities) -> bool:
        return p.p_yes < self.no_p_yes_lt and p.p_no > self.no_p_no_gt

    def constants(self) -> dict[str, float]:
        return {
            "yes.p_yes_gt": self.yes_p_yes_gt,
            "yes.p_no_lt": self.yes_p_no_lt,
            "no.p_yes_lt": self.no_p_yes_lt,
            "no.p_no_gt": self.no_p_no_gt,
        }


@dataclass
class ProbRuleTable:
    """Per-dimension Yes/No rules with To some extent as the fallback."""

    rules: dict[Dimension, DimensionRules]
    _checked: list[str] | None = field(default=None, repr=False, compare=False)

    def for_dimension(self, dim: Dimension) -> DimensionRules:
        if dim not in self.rules:
            raise ValueError(f"rule table has no entry for dimension {dim.value}")
        return self.rules[dim]


def split_by_logit(logit: float, th: LogitThresholds) -> TernaryLabel:
    """Map a positive-class logit to a label using the two cut points.

    Each frontier is inclusive on the upper region: logit < t_low gives No,
    t_low <= logit < t_high gives To some extent, logit >= t_high gives Yes.
    """
    if logit < th.t_low:
        return TernaryLabel.NO
    if logit < th.t_high:
        return TernaryLabel.TO_SOME_EXTENT
    return TernaryLabel.YES


def _simplex_grid(step: float):
    """Yield (p_yes, p_no, p_tse) over the simplex at the given step."""
    n = int(round(1.0 / step))
    for i in range(n + 1):
        for j in range(n - i + 1):
            p_yes = i * step
            p_no = j * step
            yield p_yes, p_no, 1.0 - p_yes - p_no


def validate_rule_table(table: ProbRuleTable, grid_step: float = 0.01) -> list[str]:
    """Check rule constants and Yes/No disjointness; returns violations.

    Disjointness is checked by scanning the probability simplex at
    ``grid_step``: no sampled point may fire both the Yes and the No rule.
    Never raises; an empty list means the table is usable.
    """
    violations: list[str] = []
    for dim, rules in table.rules.items():
        for name, value in rules.constants().items():
            if not 0.0 <= value <= 1.0:
                violations.append(f"{dim.value}: constant {name}={value} outside [0, 1]")
        for p_yes, p_no, p_tse in _simplex_grid(grid_step):
            p_tse = max(0.0, p_tse)
            p = ClassProbabilities(p_yes=p_yes, p_no=p_no, p_tse=p_tse)
            if rules.yes_fires(p) and rules.no_fires(p):
                violations.append(
                    f"{dim.value}: yes and no rules both fire at "
                    f"(p_yes={p_yes:.2f}, p_no={p_no:.2f})"
                )
                break
    table._checked = violations
    return violations


def apply_prob_rules(
    p: ClassProbabilities, dim: Dimension, table: ProbRuleTable
) -> TernaryLabel:
    """Decide a label from class probabilities via the dimension's rules.

    The Yes rule is checked first, then the No rule, else To some extent.
    The table must have been validated (validation is run once and cached).
    """
    if table._checked is None:
        validate_rule_table(table)
    if table._checked:
        raise ValueError(f"rule table failed validation: {table._checked[0]}")
    rules = table.for_dimension(dim)
    if rules.yes_fires(p):
        return TernaryLabel.YES
    if rules.no_fires(p):
        return TernaryLabel.NO
    return TernaryLabel.TO_SOME_EXTENT


_LABEL_TO_REGION = {TernaryLabel.NO: 0, TernaryLabel.TO_SOME_EXTENT: 1, TernaryLabel.YES: 2}


def _objective_value(confusion: np.ndarray, objective: CalibrationObjective) -> float:
    n = confusion.sum()
    if objective is CalibrationObjective.ACCURACY:
        return float(np.trace(confusion)) / n
    f1s = []
    for c in range(3):
        gold_c = confusion[c].sum()
        pred_c = confusion[:, c].sum()
        if gold_c == 0 and pred_c == 0:
            continue  # class absent on both sides: outside the macro average
        tp = confusion[c, c]
        f1s.append(0.0 if tp == 0 else 2.0 * tp / (gold_c + pred_c))
    return float(np.mean(f1s)) if f1s else 0.0


def calibrate_logit_thresholds(
    logits: list[float],
    gold: list[TernaryLabel],
    objective: CalibrationObjective = CalibrationObjective.MACRO_F1,
    grid_step: float = 0.01,
) -> LogitThresholds:
    """Grid-search the two cut points over [-1, 1] maximizing the objective.

    The search is exhaustive over all t_low < t_high on the grid; ties are
    broken toward the smaller (t_low, then t_high).
    """
    if len(logits) != len(gold):
        raise ValueError(f"{len(logits)} logits but {len(gold)} gold labels")
    if len(logits) == 0:
        raise ValueError("cannot calibrate on empty input")
    if grid_step <= 0:
        raise ValueError("grid_step must be > 0")
    lo, hi = CALIBRATION_RANGE
    n_steps = int(round((hi - lo) / grid_step))
    grid = lo + grid_step * np.arange(n_steps + 1)
    grid[-1] = hi

    x = np.asarray(logits, dtype=float)
    y = np.array([_LABEL_TO_REGION[g] for g in gold])
    best_value = -np.inf
    best: tuple[float, float] | None = None
    for i in range(len(grid)):
        for j in range(i + 1, len(grid)):
            regions = np.digitize(x, [grid[i], grid[j]])  # 0=No, 1=TSE, 2=Yes
            confusion = np.bincount(3 * y + regions, minlength=9).reshape(3, 3)
            value = _objective_value(confusion, objective)
            if value > best_value:
                best_value = value
                best = (float(grid[i]), float(grid[j]))
    return LogitThresholds(t_low=best[0], t_high=best[1])


def derive_rule_stats(
    probs: list[ClassProbabilities], predicted: list[TernaryLabel]
) -> dict[TernaryLabel, ClassProbabilities]:
    """Average the class probabilities grouped by the predicted label.

    Labels that were never predicted are absent from the result.  This is
    the statistic the manual rule constants are read off from.
    """
    if len(probs) != len(predicted):
        raise ValueError(f"{len(probs)} probability records but {len(predicted)} predictions")
    if not probs:
        raise ValueError("cannot derive statistics from empty input")
    groups: dict[TernaryLabel, list[np.ndarray]] = {}
    for p, label in zip(probs, predicted):
        groups.setdefault(label, []).append(p.as_array())
    out: dict[TernaryLabel, ClassProbabilities] = {}
    for label, arrays in groups.items():
        mean = np.mean(arrays, axis=0)
        out[label] = ClassProbabilities(
            p_yes=float(mean[0]), p_no=float(mean[1]), p_tse=float(mean[2])
        )
    return out


def _table_from_doc(doc: dict) -> ProbRuleTable:
    rules: dict[Dimension, DimensionRules] = {}
    for dim_raw, entry in doc.items():
        dim = Dimension.from_string(dim_raw)
        try:
            rules[dim] = DimensionRules(
                yes_p_yes_gt=float(entry["yes"]["p_yes_gt"]),
                yes_p_no_lt=float(entry["yes"]["p_no_lt"]),
                no_p_yes_lt=float(entry["no"]["p_yes_lt"]),
                no_p_no_gt=float(entry["no"]["p_no_gt"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed rule entry for {dim_raw!r}: {exc}") from None
    return ProbRuleTable(rules=rules)


def load_rule_table(path: str) -> ProbRuleTable:
    """Load a rule table from JSON keyed by dimension name."""
    with open(path, encoding="utf-8") as fh:
        return _table_from_doc(json.load(fh))


def default_rule_table() -> ProbRuleTable:
    """The bundled per-dimension rules tuned for the decoder pipeline."""
    doc = json.loads(files("tutoreval.data").joinpath("decoder_rules.json").read_text())
    return _table_from_doc(doc)


def save_logit_thresholds(th: LogitThresholds, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"t_low": th.t_low, "t_high": th.t_high}, fh)
        fh.write("\n")


def load_logit_thresholds(path: str) -> LogitThresholds:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return LogitThresholds(t_low=float(doc["t_low"]), t_high=float(doc["t_high"]))
