"""
Reading a leaderboard: baselines, quartiles, winner gaps
========================================================

Shared-task results come back as ranks and winning scores, not just your
own numbers.  Three small tools put a submission in context: trivial
baselines bound the floor, quartiles compress a rank into a headline, and
a delta table states how far the winner was ahead.
"""

import numpy as np

from tutoreval import Dimension, always_yes, metrics, quartile, random_baseline
from tutoreval.evaluation import format_delta_table

rng = np.random.default_rng(2)

# ---------------------------------------------------------------------------
# Baseline floor.  On a dimension where 70% of gold labels are Yes, the
# always-Yes strategy already takes a high accuracy; macro-F1 exposes it.

gold = [lab for lab in rng.choice(
    ["Yes", "No", "To some extent"], p=[0.70, 0.18, 0.12], size=2000
)]
yes_pred = [lab.value for lab in always_yes(len(gold))]
rand_pred = random_baseline(len(gold), ["Yes", "No", "To some extent"], seed=0)

m_yes = metrics(gold, yes_pred)
m_rand = metrics(gold, rand_pred)
print("baseline floor on a 70%-Yes dimension:")
print(f"  always-Yes  macro-F1 {m_yes.macro_f1:6.2f}  accuracy {m_yes.accuracy:6.2f}")
print(f"  random      macro-F1 {m_rand.macro_f1:6.2f}  accuracy {m_rand.accuracy:6.2f}")

# ---------------------------------------------------------------------------
# Quartile headlines.  Rank 1 out of anything reasonable is Q1; the last
# rank is always Q4; everything else falls out of floor(4*rank/total)+1.

print()
print("rank -> quartile at three field sizes:")
for total in (12, 35, 50):
    line = "  ".join(f"{r}/{total}:Q{quartile(r, total)}" for r in (1, total // 3, total // 2, total))
    print(f"  {line}")

# ---------------------------------------------------------------------------
# Winner gaps.  Scores here are invented; the table format keeps one line
# per dimension with a zero-padded delta so columns stay aligned.

ours = {
    Dimension.MISTAKE_IDENTIFICATION.value: 68.40,
    Dimension.MISTAKE_LOCATION.value: 52.11,
    Dimension.PROVIDING_GUIDANCE.value: 55.02,
    Dimension.ACTIONABILITY.value: 63.77,
    "tutor_identification": 85.90,
}
winners = {
    Dimension.MISTAKE_IDENTIFICATION.value: 71.30,
    Dimension.MISTAKE_LOCATION.value: 60.01,
    Dimension.PROVIDING_GUIDANCE.value: 57.94,
    Dimension.ACTIONABILITY.value: 70.12,
    "tutor_identification": 96.50,
}
print()
print(format_delta_table(ours, winners))
