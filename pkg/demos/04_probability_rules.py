"""
Rule tables over generator label probabilities
==============================================

When a generator scores the three candidate labels directly, a small table
of probability cut-offs replaces any learned decision layer.  This script
applies the bundled table to simulated probability triples and then reads
the per-decision probability profile back out of the results.
"""

import numpy as np

from tutoreval import (
    ClassProbabilities,
    Dimension,
    TernaryLabel,
    apply_prob_rules,
    default_rule_table,
)
from tutoreval.thresholds import derive_rule_stats, validate_rule_table

rng = np.random.default_rng(11)

table = default_rule_table()
print("validation issues:", validate_rule_table(table) or "none")
print()

# Dirichlet corners give confident triples; the flat prior gives murky ones.
ALPHAS = {
    TernaryLabel.YES: (14.0, 1.0, 1.0),
    TernaryLabel.TO_SOME_EXTENT: (4.0, 3.0, 2.0),
    TernaryLabel.NO: (1.0, 1.0, 10.0),
}


def draw(kind: TernaryLabel) -> ClassProbabilities:
    y, t, n = rng.dirichlet(ALPHAS[kind])
    return ClassProbabilities(p_yes=y, p_no=n, p_tse=t)


kinds = [list(ALPHAS)[i] for i in rng.integers(0, 3, size=300)]
probs = [draw(k) for k in kinds]

dim = Dimension.MISTAKE_IDENTIFICATION
decided = [apply_prob_rules(p, dim, table) for p in probs]

counts = {label: decided.count(label) for label in TernaryLabel}
print(f"decisions on {dim.value}:")
for label, count in counts.items():
    print(f"  {label.value:<15} {count:4d}")

# derive_rule_stats averages the input triples per decided label, which is
# the quickest way to sanity-check a new table against real output.
print()
print("mean probability triple per decision:")
for label, mean in derive_rule_stats(probs, decided).items():
    print(
        f"  {label.value:<15} yes={mean.p_yes:.3f}"
        f"  tse={mean.p_tse:.3f}  no={mean.p_no:.3f}"
    )

# The four dimensions carry different cut-offs, so one triple near the
# decision boundary can land differently per dimension.
print()
p = ClassProbabilities(p_yes=0.80, p_no=0.14, p_tse=0.06)
for dim in Dimension:
    print(f"  {dim.value:<25} -> {apply_prob_rules(p, dim, table).value}")
