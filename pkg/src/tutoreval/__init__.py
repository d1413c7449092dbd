"""Toolkit for assessing tutor responses in educational dialogues.

Covers the full pipeline: loading annotated dialogue corpora, grouped
train/dev splitting, n-gram featurization, classical classifiers over
sparse or embedding features, threshold-based recovery of three-way labels
from binary logits or generative label probabilities, and a scoring harness
with macro-F1/accuracy reports, baselines, and leaderboard summaries.
"""

from .corpus import (
    Conversation,
    Dataset,
    DatasetError,
    Dimension,
    InputTextMode,
    Speaker,
    TernaryLabel,
    Turn,
    TutorResponse,
    build_input_text,
    class_distribution,
    grouped_split,
    load_dataset,
    save_dataset,
)
from .features import (
    SparseVector,
    VectorizerModel,
    Weighting,
    fit_vectorizer,
    load_vectorizer,
    save_vectorizer,
    tokenize,
    transform,
)
from .classifiers import (
    Backend,
    LabeledMatrix,
    concat_features,
    default_params,
    fit,
    load_model,
    save_model,
)
from .thresholds import (
    CalibrationObjective,
    ClassProbabilities,
    DimensionRules,
    LogitThresholds,
    ProbRuleTable,
    apply_prob_rules,
    calibrate_logit_thresholds,
    default_rule_table,
    load_rule_table,
    split_by_logit,
    validate_rule_table,
)
from .external_scores import (
    ScoreFileError,
    ScoreRecord,
    join_scores,
    read_predictions,
    read_scores,
    write_predictions,
    write_scores,
)
from .evaluation import (
    EvalMode,
    MetricReport,
    OverrideTable,
    always_yes,
    apply_overrides,
    delta_report,
    metrics,
    quartile,
    random_baseline,
)

__version__ = "0.1.0"
