"""
Recovering three classes from one binary logit
==============================================

A binary model trained on "Yes" vs "No" still carries ordinal information:
borderline responses land between the two clusters.  Two cut points on the
logit axis turn that single score into Yes / To some extent / No decisions.
This walk-through calibrates the cut points on one sample and checks that
they transfer to a held-out sample.
"""

import numpy as np

from tutoreval import (
    LogitThresholds,
    TernaryLabel,
    calibrate_logit_thresholds,
    metrics,
    split_by_logit,
)

rng = np.random.default_rng(3)

# ---------------------------------------------------------------------------
# Simulate the logit geometry: gold-No responses score low, gold-Yes high,
# and partially-correct responses sit in the middle with heavy overlap.

CENTERS = {
    TernaryLabel.NO: -1.1,
    TernaryLabel.TO_SOME_EXTENT: 0.0,
    TernaryLabel.YES: 1.1,
}


def sample(n: int) -> tuple[list[float], list[TernaryLabel]]:
    gold = [list(CENTERS)[i] for i in rng.integers(0, 3, size=n)]
    logits = [CENTERS[g] + 0.45 * rng.standard_normal() for g in gold]
    return logits, gold


def score(gold: list[TernaryLabel], pred: list[TernaryLabel]):
    return metrics([g.value for g in gold], [p.value for p in pred])


cal_logits, cal_gold = sample(600)
held_logits, held_gold = sample(400)

# ---------------------------------------------------------------------------
# Exhaustive grid search over ordered (t_low, t_high) pairs, scored by
# macro-F1 of the induced three-way split.

th = calibrate_logit_thresholds(cal_logits, cal_gold, grid_step=0.05)
print(f"calibrated thresholds: t_low={th.t_low:+.2f}  t_high={th.t_high:+.2f}")

m = score(cal_gold, [split_by_logit(x, th) for x in cal_logits])
print(f"calibration sample: macro-F1 {m.macro_f1:.2f}  accuracy {m.accuracy:.2f}")

m = score(held_gold, [split_by_logit(x, th) for x in held_logits])
print(f"held-out sample:    macro-F1 {m.macro_f1:.2f}  accuracy {m.accuracy:.2f}")

# ---------------------------------------------------------------------------
# The same machinery scores hand-picked thresholds, which makes it easy to
# see how sensitive the objective is around the optimum.

print()
print("macro-F1 on the held-out sample for nearby threshold pairs:")
for lo_off, hi_off in [(-0.3, 0.2), (-0.1, 0.1), (0.0, 0.0), (0.1, -0.1)]:
    shifted = LogitThresholds(th.t_low + lo_off, th.t_high + hi_off)
    m = score(held_gold, [split_by_logit(x, shifted) for x in held_logits])
    print(
        f"  ({shifted.t_low:+.2f}, {shifted.t_high:+.2f})"
        f"  ->  {m.macro_f1:6.2f}"
    )
